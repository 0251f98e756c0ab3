"""Mutation data, (r,z)-seeds, Y-seeds and compatible pairs."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from math import gcd, lcm
from typing import Sequence

import numpy as np

from . import matrix as mx
from .poly import LaurentPoly, Ring, ZSymbol, canonical_zsymbol, poly_div_exact, zsymbols_for


class SeedError(Exception):
    pass


class NotSkewSymmetrizable(SeedError):
    def __init__(self, msg, witness):
        self.witness = witness
        super().__init__(f"{msg}: {witness}")


class CompatibilityBroken(SeedError):
    def __init__(self, msg, witness=None):
        self.witness = witness
        super().__init__(msg if witness is None else f"{msg}: {witness}")


@dataclass(frozen=True)
class MutationData:
    n: int
    m: int
    r: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "r", tuple(int(v) for v in self.r))
        if not self.m >= self.n >= 1:
            raise SeedError(f"need m >= n >= 1, got n={self.n}, m={self.m}")
        if len(self.r) != self.n or any(v < 1 for v in self.r):
            raise SeedError(f"r must be {self.n} positive integers, got {self.r}")

    @cached_property
    def zsyms(self) -> tuple[ZSymbol, ...]:
        return zsymbols_for(self.r)

    @cached_property
    def R(self) -> np.ndarray:
        return mx.diag(self.r)

    @cached_property
    def xring(self) -> Ring:
        return Ring(tuple(f"x{i + 1}" for i in range(self.m)), self.zsyms)

    @cached_property
    def yhat_ring(self) -> Ring:
        return Ring(tuple(f"y{i + 1}" for i in range(self.n)), self.zsyms)

    @cached_property
    def yring(self) -> Ring:
        return Ring(tuple(f"y{i + 1}" for i in range(self.m)), self.zsyms)

    def z(self, k: int, s: int) -> ZSymbol | None:
        """z_{k,s} for 0-based direction k; None is the constant 1."""
        return canonical_zsymbol(k + 1, s, self.r[k])

    def with_r(self, r) -> MutationData:
        return MutationData(self.n, self.m, tuple(r))


def validate(md: MutationData, Btilde) -> np.ndarray:
    """Minimal positive diagonal D with D @ B skew-symmetric (B = principal part)."""
    Bt = mx.imat(Btilde)
    if Bt.shape != (md.m, md.n):
        raise SeedError(f"Btilde must be {md.m}x{md.n}, got {Bt.shape}")
    return skew_symmetrizer(Bt[: md.n, :])


def skew_symmetrizer(B) -> np.ndarray:
    B = mx.imat(B)
    n = B.shape[0]
    if B.shape != (n, n):
        raise SeedError("principal part must be square")
    for i in range(n):
        if B[i, i] != 0:
            raise NotSkewSymmetrizable("nonzero diagonal", (i + 1, i + 1))
        for j in range(n):
            if (B[i, j] == 0) != (B[j, i] == 0) or B[i, j] * B[j, i] > 0:
                raise NotSkewSymmetrizable("sign pattern violated", (i + 1, j + 1))
    d: list[Fraction | None] = [None] * n
    for start in range(n):
        if d[start] is not None:
            continue
        d[start] = Fraction(1)
        comp = [start]
        stack = [start]
        while stack:
            i = stack.pop()
            for j in range(n):
                if B[i, j] == 0:
                    continue
                want = d[i] * Fraction(-int(B[i, j]), int(B[j, i]))
                if d[j] is None:
                    d[j] = want
                    comp.append(j)
                    stack.append(j)
                elif d[j] != want:
                    raise NotSkewSymmetrizable("cycle condition fails", (start + 1, i + 1, j + 1))
        den = lcm(*(x.denominator for x in (d[i] for i in comp)))
        ints = [int(d[i] * den) for i in comp]
        g = gcd(*ints)
        for i, v in zip(comp, ints):
            d[i] = Fraction(v // g)
    return mx.diag([int(x) for x in d])


def mutate_matrix(md: MutationData, Btilde: np.ndarray, k: int, eps: int = 1) -> np.ndarray:
    """Generalized matrix mutation; works for any row count and any column count >= n."""
    rk = md.r[k]
    B = Btilde
    rows, cols = B.shape
    out = B.copy()
    colk = B[:, k]
    rowk = B[k, :]
    for i in range(rows):
        for j in range(cols):
            if i == k or j == k:
                out[i, j] = -B[i, j]
            else:
                out[i, j] = B[i, j] + rk * (mx.pos(-eps * colk[i]) * rowk[j] + colk[i] * mx.pos(eps * rowk[j]))
    return out


def mutate_matrix_along(md: MutationData, Btilde: np.ndarray, word: Sequence[int]) -> np.ndarray:
    B = mx.imat(Btilde)
    for k in word:
        B = mutate_matrix(md, B, k)
    return B


def reduce_word(word: Sequence[int]) -> tuple[int, ...]:
    """Free reduction: the tree vertex reached by ``word`` from the root."""
    out: list[int] = []
    for k in word:
        if out and out[-1] == k:
            out.pop()
        else:
            out.append(k)
    return tuple(out)


def path(from_word: Sequence[int], to_word: Sequence[int]) -> tuple[int, ...]:
    """Directions leading from the vertex ``from_word`` to the vertex ``to_word``."""
    return reduce_word(tuple(reversed(reduce_word(from_word))) + reduce_word(to_word))


# ---------------------------------------------------------------------------
# seeds


@dataclass(frozen=True, eq=False)
class Seed:
    md: MutationData
    Btilde: np.ndarray
    x: tuple[LaurentPoly, ...]
    D: np.ndarray = field(default=None, repr=False)

    def __post_init__(self):
        B = mx.imat(self.Btilde)
        object.__setattr__(self, "Btilde", B)
        if self.D is None:
            object.__setattr__(self, "D", validate(self.md, B))
        if len(self.x) != self.md.m:
            raise SeedError(f"cluster needs {self.md.m} entries")

    @classmethod
    def initial(cls, md: MutationData, Btilde) -> Seed:
        ring = md.xring
        return cls(md, mx.imat(Btilde), tuple(ring.var(j) for j in range(md.m)))

    @property
    def B(self) -> np.ndarray:
        return self.Btilde[: self.md.n, :]

    def __eq__(self, other):
        if not isinstance(other, Seed):
            return NotImplemented
        return self.md == other.md and mx.equal(self.Btilde, other.Btilde) and self.x == other.x

    __hash__ = None

    def key(self, unlabeled: bool = False):
        """Canonical hashable encoding; unlabeled mode quotients by r-preserving permutations."""
        if not unlabeled:
            return (mx.freeze(self.Btilde), self.x)
        best = None
        for perm in _r_permutations(self.md.r):
            full = list(perm) + list(range(self.md.n, self.md.m))
            B = self.Btilde[np.ix_(full, list(perm))]
            xs = tuple(self.x[i] for i in full)
            enc = (mx.freeze(B), tuple(sorted(x.terms.items()) for x in xs))
            if best is None or enc < best[0]:
                best = (enc, (mx.freeze(B), xs))
        return best[1]


def _r_permutations(r):
    from itertools import permutations

    n = len(r)
    for p in permutations(range(n)):
        if all(r[p[i]] == r[i] for i in range(n)):
            yield p


def yhat(s: Seed, k: int) -> LaurentPoly:
    """prod_j x_{j;t}^{b_{jk;t}} expanded in the initial variables."""
    out = s.md.xring.one()
    for j in range(s.md.m):
        e = int(s.Btilde[j, k])
        if e:
            out = out * (s.x[j] ** e)
    return out


def exchange_numerator(s: Seed, k: int, eps: int = 1) -> LaurentPoly:
    """(prod x_j^{[-eps b_jk]_+})^{r_k} * sum_s z_{k,s} yhat_k^{eps s}, as a polynomial in the x_{j;t}."""
    md = s.md
    ring = md.xring
    rk = md.r[k]
    up = ring.one()
    down = ring.one()
    for j in range(md.m):
        b = int(s.Btilde[j, k])
        if eps * b > 0:
            up = up * s.x[j] ** (eps * b)
        elif eps * b < 0:
            down = down * s.x[j] ** (-eps * b)
    up_pows = [ring.one()]
    down_pows = [ring.one()]
    for _ in range(rk):
        up_pows.append(up_pows[-1] * up)
        down_pows.append(down_pows[-1] * down)
    total = ring.zero()
    for sidx in range(rk + 1):
        total = total + ring.z(md.z(k, sidx)) * up_pows[sidx] * down_pows[rk - sidx]
    return total


def mutate_seed(s: Seed, k: int, eps: int = 1) -> Seed:
    """mu_k of an (r,z)-seed; raises NotDivisible if the new variable is not Laurent."""
    if not 0 <= k < s.md.n:
        raise SeedError(f"direction {k + 1} outside 1..{s.md.n}")
    new_xk = poly_div_exact(exchange_numerator(s, k, eps), s.x[k])
    xs = list(s.x)
    xs[k] = new_xk
    return Seed(s.md, mutate_matrix(s.md, s.Btilde, k, eps), tuple(xs), s.D)


def mutate_seed_along(s: Seed, word: Sequence[int]) -> Seed:
    for k in word:
        s = mutate_seed(s, k)
    return s


# ---------------------------------------------------------------------------
# Y-seeds.  y-variables are rational functions, kept as y^a * prod P^e with
# content-free polynomial factors P so that mutation back and forth cancels
# structurally; equality falls back to cross-multiplication.


class FactoredFraction:
    __slots__ = ("ring", "mono", "factors")

    def __init__(self, ring: Ring, mono: tuple[int, ...], factors: dict | None = None):
        self.ring = ring
        self.mono = tuple(mono)
        self.factors = {p: e for p, e in (factors or {}).items() if e}

    @classmethod
    def variable(cls, ring: Ring, j: int) -> FactoredFraction:
        mono = [0] * ring.nvars
        mono[j] = 1
        return cls(ring, mono)

    @classmethod
    def from_poly(cls, p: LaurentPoly) -> FactoredFraction:
        """Split off the content monomial of p."""
        content = p.min_exponents()
        rest = p.shift(-p.ring.key_of(content))
        if rest.is_one():
            return cls(p.ring, content)
        return cls(p.ring, content, {rest: 1})

    def __mul__(self, other: FactoredFraction) -> FactoredFraction:
        f = dict(self.factors)
        for p, e in other.factors.items():
            f[p] = f.get(p, 0) + e
        return FactoredFraction(self.ring, tuple(a + b for a, b in zip(self.mono, other.mono)), f)

    def __pow__(self, e: int) -> FactoredFraction:
        return FactoredFraction(
            self.ring, tuple(a * e for a in self.mono), {p: v * e for p, v in self.factors.items()}
        )

    def inverse(self) -> FactoredFraction:
        return self ** -1

    def num_den(self) -> tuple[LaurentPoly, LaurentPoly]:
        num = self.ring.monomial(self.mono)
        den = self.ring.one()
        for p, e in self.factors.items():
            if e > 0:
                num = num * p ** e
            else:
                den = den * p ** (-e)
        return num, den

    def __eq__(self, other):
        if not isinstance(other, FactoredFraction):
            return NotImplemented
        if self.mono == other.mono and self.factors == other.factors:
            return True
        a, b = self.num_den()
        c, d = other.num_den()
        return a * d == b * c

    __hash__ = None

    def text(self) -> str:
        num, den = self.num_den()
        return num.text() if den.is_one() else f"({num.text()}) / ({den.text()})"

    def __repr__(self):
        return f"FactoredFraction({self.text()})"


def z_sum(md: MutationData, k: int, y: FactoredFraction, eps: int) -> FactoredFraction:
    """sum_{s=0}^{r_k} z_{k,s} y^{eps s} as a factored fraction."""
    ring = y.ring
    rk = md.r[k]
    w = y if eps > 0 else y.inverse()
    top = ring.monomial(w.mono)
    bottom = ring.one()
    bottom_factors = {}
    for p, e in w.factors.items():
        if e > 0:
            top = top * p ** e
        else:
            bottom = bottom * p ** (-e)
            bottom_factors[p] = e
    # sum z_s top^s bottom^(r-s), over bottom^r; top may carry negative y-powers
    top_pows = [ring.one()]
    bot_pows = [ring.one()]
    for _ in range(rk):
        top_pows.append(top_pows[-1] * top)
        bot_pows.append(bot_pows[-1] * bottom)
    total = ring.zero()
    for s in range(rk + 1):
        total = total + ring.z(md.z(k, s)) * top_pows[s] * bot_pows[rk - s]
    out = FactoredFraction.from_poly(total)
    return out * FactoredFraction(ring, (0,) * ring.nvars, {p: e * rk for p, e in bottom_factors.items()})


@dataclass(frozen=True, eq=False)
class YSeed:
    md: MutationData
    Bhat: np.ndarray
    y: tuple[FactoredFraction, ...]

    def __post_init__(self):
        object.__setattr__(self, "Bhat", mx.imat(self.Bhat))
        if self.Bhat.shape != (self.md.n, self.md.m):
            raise SeedError(f"Bhat must be {self.md.n}x{self.md.m}")
        skew_symmetrizer(self.Bhat[:, : self.md.n])

    @classmethod
    def langlands_dual(cls, md: MutationData, Btilde) -> YSeed:
        """Initial Y-seed with Bhat = -Btilde^T and free y-variables."""
        ring = md.yring
        return cls(md, -mx.imat(Btilde).T, tuple(FactoredFraction.variable(ring, j) for j in range(md.m)))

    def __eq__(self, other):
        if not isinstance(other, YSeed):
            return NotImplemented
        return self.md == other.md and mx.equal(self.Bhat, other.Bhat) and self.y == other.y

    __hash__ = None


def mutate_bhat(md: MutationData, Bhat: np.ndarray, k: int, eps: int = 1) -> np.ndarray:
    rk = md.r[k]
    n, m = Bhat.shape
    out = Bhat.copy()
    for i in range(n):
        for j in range(m):
            if i == k or j == k:
                out[i, j] = -Bhat[i, j]
            else:
                out[i, j] = Bhat[i, j] + rk * (
                    mx.pos(-eps * Bhat[i, k]) * Bhat[k, j] + Bhat[i, k] * mx.pos(eps * Bhat[k, j])
                )
    return out


def mutate_y_seed(ys: YSeed, k: int, eps: int = 1) -> YSeed:
    md = ys.md
    if not 0 <= k < md.n:
        raise SeedError(f"direction {k + 1} outside 1..{md.n}")
    rk = md.r[k]
    yk = ys.y[k]
    S = z_sum(md, k, yk, eps)
    new = []
    for i in range(md.m):
        if i == k:
            new.append(yk.inverse())
            continue
        b = int(ys.Bhat[k, i])
        new.append(ys.y[i] * yk ** (rk * mx.pos(eps * b)) * S ** (-b))
    return YSeed(md, mutate_bhat(md, ys.Bhat, k, eps), tuple(new))


# ---------------------------------------------------------------------------
# compatible pairs


def e_matrix(md: MutationData, Btilde: np.ndarray, k: int, eps: int) -> np.ndarray:
    m = Btilde.shape[0]
    E = mx.eye(m)
    for i in range(m):
        E[i, k] = -1 if i == k else mx.pos(-eps * Btilde[i, k] * md.r[k])
    return E


def f_matrix(md: MutationData, Btilde: np.ndarray, k: int, eps: int) -> np.ndarray:
    n = md.n
    F = mx.eye(n)
    for i in range(n):
        F[k, i] = -1 if i == k else mx.pos(eps * md.r[k] * Btilde[k, i])
    return F


@dataclass(frozen=True, eq=False)
class CompatiblePair:
    md: MutationData
    Btilde: np.ndarray
    Lambda: np.ndarray
    D: np.ndarray = field(default=None)

    def __post_init__(self):
        B = mx.imat(self.Btilde)
        L = mx.imat(self.Lambda)
        object.__setattr__(self, "Btilde", B)
        object.__setattr__(self, "Lambda", L)
        m, n = self.md.m, self.md.n
        if B.shape != (m, n) or L.shape != (m, m):
            raise CompatibilityBroken("shape mismatch", {"Btilde": B.shape, "Lambda": L.shape})
        if not mx.equal(L.T, -L):
            bad = [(i + 1, j + 1) for i in range(m) for j in range(i, m) if L[i, j] != -L[j, i]]
            raise CompatibilityBroken("Lambda is not skew-symmetric", {"entries": bad[:5]})
        prod = B.T.dot(L)
        D = prod[:, :n]
        off = [(i + 1, j + 1) for i in range(n) for j in range(n) if i != j and D[i, j] != 0]
        if off or any(prod[:, n:].flatten() != 0):
            raise CompatibilityBroken("Btilde^T Lambda is not of the form [D 0]", mx.to_list(prod))
        if any(D[i, i] <= 0 for i in range(n)):
            raise CompatibilityBroken("D has a non-positive diagonal entry", [int(D[i, i]) for i in range(n)])
        D = mx.diag([D[i, i] for i in range(n)])
        if self.D is not None and not mx.equal(mx.imat(self.D), D):
            raise CompatibilityBroken("D changed", {"expected": mx.to_list(self.D), "got": mx.to_list(D)})
        object.__setattr__(self, "D", D)

    @classmethod
    def principal(cls, md: MutationData, B) -> CompatiblePair:
        """Btilde = [B; I_n], Lambda = [[0, -D], [D, B^T D]] with D the minimal skew-symmetrizer."""
        B = mx.imat(B)
        n = md.n
        if md.m != 2 * n:
            raise SeedError("principal coefficients need m = 2n")
        D = skew_symmetrizer(B)
        Bt = np.vstack([B, mx.eye(n)])
        L = mx.zeros(2 * n, 2 * n)
        L[:n, n:] = -D
        L[n:, :n] = D
        L[n:, n:] = B.T.dot(D)
        return cls(md, Bt, L)

    @property
    def d(self) -> tuple[int, ...]:
        return tuple(int(self.D[i, i]) for i in range(self.md.n))

    def __eq__(self, other):
        if not isinstance(other, CompatiblePair):
            return NotImplemented
        return mx.equal(self.Btilde, other.Btilde) and mx.equal(self.Lambda, other.Lambda)

    __hash__ = None


def mutate_compatible_pair(cp: CompatiblePair, k: int, eps: int = 1) -> CompatiblePair:
    md = cp.md
    E = e_matrix(md, cp.Btilde, k, eps)
    F = f_matrix(md, cp.Btilde, k, eps)
    return CompatiblePair(md, E.dot(cp.Btilde).dot(F), E.T.dot(cp.Lambda).dot(E), cp.D)


def mutate_pair_along(cp: CompatiblePair, word: Sequence[int]) -> CompatiblePair:
    for k in word:
        cp = mutate_compatible_pair(cp, k)
    return cp
