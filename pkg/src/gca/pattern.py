"""C-, G-, extended G-, F-matrices and F-polynomials transported along mutation words."""

from __future__ import annotations

from dataclasses import dataclass, replace
from functools import lru_cache
from typing import Sequence

import numpy as np

from . import matrix as mx
from .poly import LaurentPoly, PositiveFraction, max_divisor_monomial, poly_div_exact
from .seed import MutationData, mutate_matrix, path, reduce_word


class SignCoherenceViolated(Exception):
    def __init__(self, column, word):
        self.column = column
        self.word = word
        super().__init__(f"c-vector {column} at vertex {list(word)} is not sign-coherent")


class HypothesisUnmet(Exception):
    pass


# -- matrix recursions -------------------------------------------------------


def c_step(md: MutationData, Bt: np.ndarray, C: np.ndarray, k: int, eps: int = 1) -> np.ndarray:
    n = md.n
    rk = md.r[k]
    out = C.copy()
    for i in range(n):
        cik = C[i, k]
        for j in range(n):
            if j == k:
                out[i, j] = -C[i, j]
            else:
                out[i, j] = C[i, j] + rk * (cik * mx.pos(eps * Bt[k, j]) + mx.pos(-eps * cik) * Bt[k, j])
    return out


def g_step_general(md, Bt, C, G, B0, k, eps=1) -> np.ndarray:
    """g-vector recursion with both sums, valid for either sign."""
    rk = md.r[k]
    n = md.n
    out = G.copy()
    acc = -G[:, k]
    for j in range(n):
        acc = acc + rk * mx.pos(-eps * Bt[j, k]) * G[:, j] - rk * mx.pos(-eps * C[j, k]) * B0[:, j]
    out[:, k] = acc
    return out


def tropical_sign(C: np.ndarray, k: int, word=()) -> int:
    eps = mx.sign_coherent(C[:, k])
    if eps is None:
        raise SignCoherenceViolated([int(v) for v in C[:, k]], word)
    return eps


def g_step(md, Bt, C, G, k, word=()) -> np.ndarray:
    """g-vector recursion using the tropical sign of c_k (second sum vanishes)."""
    eps = tropical_sign(C, k, word)
    rk = md.r[k]
    out = G.copy()
    acc = -G[:, k]
    for j in range(md.n):
        acc = acc + rk * mx.pos(-eps * Bt[j, k]) * G[:, j]
    out[:, k] = acc
    return out


def gext_step(md, Btilde_t, C, Gext, Btilde0, k, eps=1) -> np.ndarray:
    rk = md.r[k]
    out = Gext.copy()
    acc = -Gext[:, k]
    for j in range(md.m):
        acc = acc + rk * mx.pos(-eps * Btilde_t[j, k]) * Gext[:, j]
    for j in range(md.n):
        acc = acc - rk * mx.pos(-eps * C[j, k]) * Btilde0[:, j]
    out[:, k] = acc
    return out


def f_matrix_step(md, Bt, C_plus, C_minus, F, k, eps=1) -> np.ndarray:
    R = md.R
    n = md.n
    return (
        F.dot(mx.J(n, k) + mx.col_only(mx.pos(-eps * Bt.dot(R)), k))
        + mx.col_only(mx.pos(-eps * C_plus.dot(R)), k)
        + mx.col_only(mx.pos(eps * C_minus.dot(R)), k)
    )


def f_poly_step(md, Bt, C, Fpolys, FposReps, k, eps=1):
    """New F_k = M_k / F_k, plus a subtraction-free representative built without cancellation."""
    ring = md.yhat_ring
    n = md.n
    rk = md.r[k]
    up_exp = [mx.pos(eps * C[j, k]) for j in range(n)]
    down_exp = [mx.pos(-eps * C[j, k]) for j in range(n)]
    upF = downF = ring.one()
    upN = upD = downN = downD = ring.one()
    for j in range(n):
        a = mx.pos(eps * Bt[j, k])
        b = mx.pos(-eps * Bt[j, k])
        if a:
            upF = upF * Fpolys[j] ** a
            upN = upN * FposReps[j].num ** a
            upD = upD * FposReps[j].den ** a
        if b:
            downF = downF * Fpolys[j] ** b
            downN = downN * FposReps[j].num ** b
            downD = downD * FposReps[j].den ** b
    M = ring.zero()
    Mnum = ring.zero()
    upF_p, downF_p = _powers(upF, rk), _powers(downF, rk)
    upN_p, upD_p = _powers(upN, rk), _powers(upD, rk)
    downN_p, downD_p = _powers(downN, rk), _powers(downD, rk)
    for s in range(rk + 1):
        mono = ring.monomial([s * u + (rk - s) * d for u, d in zip(up_exp, down_exp)])
        zc = ring.z(md.z(k, s)) * mono
        M = M + zc * upF_p[s] * downF_p[rk - s]
        Mnum = Mnum + zc * upN_p[s] * upD_p[rk - s] * downN_p[rk - s] * downD_p[s]
    newF = poly_div_exact(M, Fpolys[k])
    if newF.is_nonnegative():
        rep = PositiveFraction(newF)
    else:
        rep = PositiveFraction(Mnum * FposReps[k].den, upD_p[rk] * downD_p[rk] * FposReps[k].num)
    polys = list(Fpolys)
    reps = list(FposReps)
    polys[k] = newF
    reps[k] = rep
    return tuple(polys), tuple(reps)


def _powers(p: LaurentPoly, e: int) -> list[LaurentPoly]:
    out = [p.ring.one()]
    for _ in range(e):
        out.append(out[-1] * p)
    return out


# -- pattern state -----------------------------------------------------------


@dataclass(frozen=True, eq=False)
class PatternState:
    md: MutationData
    Btilde0: np.ndarray
    word: tuple[int, ...]
    Btilde: np.ndarray
    C_plus: np.ndarray
    C_minus: np.ndarray
    G: np.ndarray
    G_minus: np.ndarray
    Gext: np.ndarray
    Fmat: np.ndarray
    Fmat_minus: np.ndarray
    Fpolys: tuple[LaurentPoly, ...] | None = None
    FposReps: tuple[PositiveFraction, ...] | None = None

    @classmethod
    def root(cls, md: MutationData, Btilde0, polys: bool = True) -> PatternState:
        B0 = mx.imat(Btilde0)
        if B0.shape != (md.m, md.n):
            raise ValueError(f"root matrix must be {md.m}x{md.n}")
        n = md.n
        one = md.yhat_ring.one()
        return cls(
            md=md,
            Btilde0=B0,
            word=(),
            Btilde=B0,
            C_plus=mx.eye(n),
            C_minus=mx.eye(n),
            G=mx.eye(n),
            G_minus=mx.eye(n),
            Gext=mx.eye(md.m),
            Fmat=mx.zeros(n, n),
            Fmat_minus=mx.zeros(n, n),
            Fpolys=(one,) * n if polys else None,
            FposReps=(PositiveFraction(one),) * n if polys else None,
        )

    @property
    def B0(self) -> np.ndarray:
        return self.Btilde0[: self.md.n, :]

    @property
    def Bt(self) -> np.ndarray:
        return self.Btilde[: self.md.n, :]

    @property
    def vertex(self) -> tuple[int, ...]:
        return reduce_word(self.word)

    @property
    def has_polys(self) -> bool:
        return self.Fpolys is not None

    def step(self, k: int, eps: int = 1) -> PatternState:
        md = self.md
        if not 0 <= k < md.n:
            raise ValueError(f"direction {k + 1} outside 1..{md.n}")
        Bt = self.Bt
        tropical_sign(self.C_minus, k, self.word)
        G = g_step(md, Bt, self.C_plus, self.G, k, self.word)
        G_minus = g_step(md, -Bt, self.C_minus, self.G_minus, k, self.word)
        Gext = gext_step(md, self.Btilde, self.C_plus, self.Gext, self.Btilde0, k, eps)
        Fmat = f_matrix_step(md, Bt, self.C_plus, self.C_minus, self.Fmat, k, eps)
        Fmat_minus = f_matrix_step(md, -Bt, self.C_minus, self.C_plus, self.Fmat_minus, k, eps)
        polys, reps = self.Fpolys, self.FposReps
        if polys is not None:
            polys, reps = f_poly_step(md, Bt, self.C_plus, polys, reps, k, eps)
        return replace(
            self,
            word=self.word + (k,),
            Btilde=mutate_matrix(md, self.Btilde, k, eps),
            C_plus=c_step(md, Bt, self.C_plus, k, eps),
            C_minus=c_step(md, -Bt, self.C_minus, k, eps),
            G=G,
            G_minus=G_minus,
            Gext=Gext,
            Fmat=Fmat,
            Fmat_minus=Fmat_minus,
            Fpolys=polys,
            FposReps=reps,
        )

    def walk(self, word: Sequence[int], eps: int = 1) -> PatternState:
        s = self
        for k in word:
            s = s.step(k, eps)
        return s

    def fvectors_from_polys(self) -> np.ndarray | None:
        """Columns are max_divisor_monomial of the F-polynomials; None if one has no maximum."""
        cols = [max_divisor_monomial(F) for F in self.Fpolys]
        if any(c is None for c in cols):
            return None
        return mx.imat([list(c) for c in cols]).T.copy()

    def to_json(self) -> dict:
        out = {
            "vertex_word": [k + 1 for k in self.word],
            "matrices": {
                "Btilde": mx.to_list(self.Btilde),
                "C_plus": mx.to_list(self.C_plus),
                "C_minus": mx.to_list(self.C_minus),
                "G": mx.to_list(self.G),
                "Gext": mx.to_list(self.Gext),
                "F": mx.to_list(self.Fmat),
            },
        }
        if self.Fpolys is not None:
            out["fpolys"] = [F.text() for F in self.Fpolys]
        return out


def walk(md: MutationData, Btilde0, word: Sequence[int], polys: bool = True, eps: int = 1) -> PatternState:
    return PatternState.root(md, Btilde0, polys).walk(word, eps)


@lru_cache(maxsize=4096)
def _walk_cached(md, B0_frozen, word, polys):
    return walk(md, mx.imat(B0_frozen), word, polys)


def rerooted(md: MutationData, Btilde0, root_word: Sequence[int], target_word: Sequence[int], polys=False) -> PatternState:
    """Pattern rooted at the vertex ``root_word``, walked to the vertex ``target_word``."""
    root_B = _walk_cached(md, mx.freeze(mx.imat(Btilde0)), reduce_word(root_word), False).Btilde
    return _walk_cached(md, mx.freeze(root_B), path(root_word, target_word), polys)


# -- ordinary patterns -------------------------------------------------------


def ordinary_md(n: int) -> MutationData:
    return MutationData(n, n, (1,) * n)


def ordinary_cg(B0, word: Sequence[int]) -> tuple[np.ndarray, np.ndarray]:
    """Ordinary C- and G-matrices for the ordinary B-pattern rooted at B0."""
    B0 = mx.imat(B0)
    md = ordinary_md(B0.shape[0])
    s = walk(md, B0, word, polys=False)
    return s.C_plus, s.G


# -- checks ------------------------------------------------------------------


def _check(name, family, ok, witness=None):
    out = {"name": name, "family": family, "pass": bool(ok)}
    if not ok and witness is not None:
        out["witness"] = witness
    return out


def check_dualities(state: PatternState) -> list[dict]:
    md = state.md
    R = md.R
    word = state.word
    B0, Bt = state.B0, state.Bt
    Cp, Cm, G, Gm, F = state.C_plus, state.C_minus, state.G, state.G_minus, state.Fmat
    from .seed import skew_symmetrizer

    D = skew_symmetrizer(B0)
    checks = []

    rhs = Cp + F.dot(Bt)
    checks.append(_check("C(-B) = C(B) + F B_t", "cgf-relations", mx.equal(Cm, rhs),
                         {"lhs": mx.to_list(Cm), "rhs": mx.to_list(rhs)}))
    rhs = G + B0.dot(F)
    checks.append(_check("G(-B) = G(B) + B_t0 F", "cgf-relations", mx.equal(Gm, rhs),
                         {"lhs": mx.to_list(Gm), "rhs": mx.to_list(rhs)}))
    checks.append(_check("F(-B) = F(B)", "cgf-relations", mx.equal(state.Fmat_minus, F),
                         {"lhs": mx.to_list(state.Fmat_minus), "rhs": mx.to_list(F)}))

    LC, LG = ordinary_cg(R.dot(B0), word)
    RC, RG = ordinary_cg(B0.dot(R), word)
    checks.append(_check("C = LC", "left-right-ordinary", mx.equal(Cp, LC),
                         {"C": mx.to_list(Cp), "LC": mx.to_list(LC)}))
    checks.append(_check("C R = R RC", "left-right-ordinary", mx.equal(Cp.dot(R), R.dot(RC)),
                         {"C": mx.to_list(Cp), "RC": mx.to_list(RC)}))
    checks.append(_check("G = RG", "left-right-ordinary", mx.equal(G, RG),
                         {"G": mx.to_list(G), "RG": mx.to_list(RG)}))
    checks.append(_check("R G = LG R", "left-right-ordinary", mx.equal(R.dot(G), LG.dot(R)),
                         {"G": mx.to_list(G), "LG": mx.to_list(LG)}))

    DC, _ = ordinary_cg(-R.dot(B0.T), word)
    checks.append(_check("D C D^-1 = C(-R B^T)", "dual-c-pattern", mx.equal(D.dot(Cp), DC.dot(D)),
                         {"DC": mx.to_list(D.dot(Cp)), "C_ord D": mx.to_list(DC.dot(D))}))

    back = rerooted(md, state.Btilde0, word, (), polys=False).Fmat
    checks.append(_check("D F_t^t0 D^-1 = (F_t0^t)^T", "f-symmetry", mx.equal(D.dot(F), back.T.dot(D)),
                         {"F_t^t0": mx.to_list(F), "F_t0^t": mx.to_list(back)}))
    return checks


def check_fpolys(state: PatternState) -> list[dict]:
    """F-polynomial facts: constant term 1, maximal monomial with coefficient 1 equal to the
    F-matrix column, and the subtraction-free representative reducing to the polynomial."""
    if not state.has_polys:
        return []
    nz = state.md.yhat_ring.nz
    checks = []
    for i, (F, rep) in enumerate(zip(state.Fpolys, state.FposReps)):
        checks.append(_check(f"F_{i + 1} constant term 1", "fpoly", F.constant_term() == {(0,) * nz: 1}))
        f = max_divisor_monomial(F)
        col = tuple(int(v) for v in state.Fmat[:, i])
        checks.append(_check(f"F_{i + 1} max monomial = F-matrix column", "fpoly", f == col,
                             {"max_monomial": f, "column": col}))
        checks.append(_check(f"F_{i + 1} positive representative", "fpoly", rep.represents(F)))
    return checks


def f_pattern_scale_invariance(mdA, BA, mdB, BB, words: Sequence[Sequence[int]]) -> list[dict]:
    """R_A^{-1} F_A = R_B^{-1} F_B along every word, given B_A R_A = B_B R_B."""
    BA, BB = mx.imat(BA), mx.imat(BB)
    if not mx.equal(BA[: mdA.n].dot(mdA.R), BB[: mdB.n].dot(mdB.R)):
        raise HypothesisUnmet("B_A R_A != B_B R_B")
    out = []
    for word in words:
        FA = walk(ordinary_like(mdA), BA[: mdA.n], word, polys=False).Fmat
        FB = walk(ordinary_like(mdB), BB[: mdB.n], word, polys=False).Fmat
        ok = mx.equal(mdB.R.dot(FA), mdA.R.dot(FB))
        out.append(_check(f"R^-1 F scale invariance {[k + 1 for k in word]}", "f-scale", ok,
                          {"F_A": mx.to_list(FA), "F_B": mx.to_list(FB)}))
    return out


def ordinary_like(md: MutationData) -> MutationData:
    """Same r with no frozen rows (the F-pattern only sees the principal part)."""
    return MutationData(md.n, md.n, md.r)


# -- initial-seed mutation ---------------------------------------------------


def initial_seed_mutation_f(md: MutationData, Btilde0, word_t: Sequence[int], k: int, eps: int = 1) -> np.ndarray:
    """F_{t0}^{t'} for t' = mu_k(t), from F_{t0}^t and ordinary G-patterns rooted at t."""
    word_t = reduce_word(word_t)
    R = md.R
    n = md.n
    Bt = rerooted(md, Btilde0, (), word_t).Bt
    F_t0_t = rerooted(md, Btilde0, word_t, (), polys=False).Fmat
    back = tuple(reversed(word_t))
    _, Gplus = ordinary_cg(Bt.dot(R), back)
    _, Gminus = ordinary_cg(-Bt.dot(R), back)
    return (
        (mx.J(n, k) + mx.row_only(mx.pos(-eps * R.dot(Bt)), k)).dot(F_t0_t)
        + md.r[k] * mx.row_only(mx.pos(eps * Gminus), k)
        + md.r[k] * mx.row_only(mx.pos(-eps * Gplus), k)
    )


def f_matrix_rooted(md: MutationData, Btilde0, root_word, target_word) -> np.ndarray:
    """F_{target}^{root} by rerunning the recursion from the root vertex."""
    return rerooted(md, Btilde0, root_word, target_word, polys=False).Fmat


def fpoly_size_bound(md: MutationData, Btilde0, root_word=(), target_word=()) -> int:
    """Largest prod_i (f_ij + 1) over F-matrix columns met on the path root -> target.

    Bounds the monomial count of every F-polynomial the polynomial walk would
    build; computed from matrices only, so it is cheap.
    """
    root_B = _walk_cached(md, mx.freeze(mx.imat(Btilde0)), reduce_word(root_word), False).Btilde
    s = PatternState.root(md, root_B, polys=False)
    worst = 1
    for k in path(root_word, target_word):
        s = s.step(k)
        for j in range(md.n):
            size = 1
            for i in range(md.n):
                size *= int(s.Fmat[i, j]) + 1
            worst = max(worst, size)
    return worst
