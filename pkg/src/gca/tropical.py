"""Tropical points of the X- and Y-patterns, the duality maps between them, and pointed elements."""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Sequence

import numpy as np

from . import matrix as mx
from .poly import LaurentPoly, PositiveFraction
from .seed import (
    CompatiblePair,
    MutationData,
    mutate_matrix,
    mutate_matrix_along,
    mutate_pair_along,
    path,
    reduce_word,
    skew_symmetrizer,
)


class RankDeficient(Exception):
    pass


@lru_cache(maxsize=8192)
def _btilde_at(md: MutationData, B0: tuple, word: tuple) -> np.ndarray:
    return mutate_matrix_along(md, mx.imat(B0), word)


def btilde_at(md: MutationData, Btilde0, word: Sequence[int]) -> np.ndarray:
    return _btilde_at(md, mx.freeze(mx.imat(Btilde0)), reduce_word(word))


def y_step(md: MutationData, Btilde_t: np.ndarray, g: Sequence[int], k: int) -> tuple[int, ...]:
    """Tropical Y-mutation, with bhat_{ki} = -b_{ik} (Langlands dual initialization)."""
    rk = md.r[k]
    gk = g[k]
    out = []
    for i, gi in enumerate(g):
        if i == k:
            out.append(-gk)
        else:
            bhat = -int(Btilde_t[i, k])
            out.append(gi + mx.pos(rk * bhat) * gk + (-rk * bhat) * mx.pos(gk))
    return tuple(out)


def x_step(md: MutationData, Btilde_t: np.ndarray, a: Sequence[int], k: int) -> tuple[int, ...]:
    rk = md.r[k]
    up = sum(mx.pos(int(Btilde_t[j, k]) * rk) * a[j] for j in range(len(a)))
    down = sum(mx.pos(-int(Btilde_t[j, k]) * rk) * a[j] for j in range(len(a)))
    out = list(a)
    out[k] = -a[k] + max(up, down)
    return tuple(out)


@dataclass(frozen=True)
class _TropicalPoint:
    md: MutationData
    Btilde0: tuple
    base: tuple[int, ...]
    vector: tuple[int, ...]

    _step = None

    def __post_init__(self):
        object.__setattr__(self, "Btilde0", mx.freeze(mx.imat(self.Btilde0)))
        object.__setattr__(self, "base", reduce_word(self.base))
        object.__setattr__(self, "vector", tuple(int(v) for v in self.vector))
        if len(self.vector) != self.md.m:
            raise ValueError(f"tropical point needs {self.md.m} coordinates")

    def btilde(self) -> np.ndarray:
        return btilde_at(self.md, self.Btilde0, self.base)

    def transport(self, k: int):
        v = type(self)._step(self.md, self.btilde(), self.vector, k)
        return type(self)(self.md, self.Btilde0, reduce_word(self.base + (k,)), v)

    def at(self, word: Sequence[int]):
        p = self
        for k in path(self.base, word):
            p = p.transport(k)
        return p

    def to_json(self) -> dict:
        return {"base_word": [k + 1 for k in self.base], "vector": list(self.vector)}


@dataclass(frozen=True)
class TropicalPointY(_TropicalPoint):
    _step = staticmethod(y_step)


@dataclass(frozen=True)
class TropicalPointX(_TropicalPoint):
    _step = staticmethod(x_step)


def transport_y(p: TropicalPointY, k: int) -> TropicalPointY:
    return p.transport(k)


def transport_x(p: TropicalPointX, k: int) -> TropicalPointX:
    return p.transport(k)


@dataclass(frozen=True, eq=False)
class SquareCompletion:
    """Btilde extended to a square m x m matrix (Btilde | M).

    ``Dtilde`` is a right skew-symmetrizer: Bsq @ Dtilde is skew-symmetric.
    That is the convention under which the X-to-Y duality map commutes with
    mutation (the left convention fails as soon as Dtilde is not scalar).
    """

    md: MutationData
    Bsq: np.ndarray
    Dtilde: np.ndarray = field(default=None)

    def __post_init__(self):
        Bsq = mx.imat(self.Bsq)
        if Bsq.shape != (self.md.m, self.md.m):
            raise ValueError(f"square completion must be {self.md.m}x{self.md.m}")
        object.__setattr__(self, "Bsq", Bsq)
        D = skew_symmetrizer(Bsq.T)
        if self.Dtilde is not None and not mx.equal(mx.imat(self.Dtilde), D):
            Dt = mx.imat(self.Dtilde)
            if not mx.equal(Bsq.dot(Dt), -(Bsq.dot(Dt)).T):
                raise ValueError("Dtilde does not skew-symmetrize the completion")
            D = Dt
        object.__setattr__(self, "Dtilde", D)

    @classmethod
    def from_block(cls, md: MutationData, Btilde0, M=None) -> SquareCompletion:
        Bt = mx.imat(Btilde0)
        if M is None:
            if md.m != md.n:
                raise ValueError("a completion block is required when m > n")
            return cls(md, Bt)
        return cls(md, np.hstack([Bt, mx.imat(M).reshape(md.m, md.m - md.n)]))

    @classmethod
    def default(cls, md: MutationData, Btilde0) -> SquareCompletion:
        """(Btilde | M) with M = [-E P^T; 0], P the frozen rows and E = lcm(d) D^-1.

        Then Bsq @ diag(E, I) is skew-symmetric, so any Btilde has a completion.
        """
        Bt = mx.imat(Btilde0)
        n, m = md.n, md.m
        if m == n:
            return cls(md, Bt)
        d = [int(v) for v in np.diag(skew_symmetrizer(Bt[:n]))]
        L = int(np.lcm.reduce(d))
        E = mx.diag([L // v for v in d])
        M = mx.zeros(m, m - n)
        M[:n, :] = -E.dot(Bt[n:].T)
        return cls(md, np.hstack([Bt, M]))

    @property
    def Btilde0(self) -> np.ndarray:
        return self.Bsq[:, : self.md.n]

    def at(self, word: Sequence[int]) -> np.ndarray:
        B = self.Bsq
        for k in reduce_word(word):
            B = mutate_matrix(self.md, B, k)
        return B


def phi(p: TropicalPointX, sq: SquareCompletion) -> TropicalPointY:
    """Dtilde (Bsq_t)^T a_t."""
    Bsq_t = sq.at(p.base)
    g = sq.Dtilde.dot(Bsq_t.T).dot(mx.imat(list(p.vector)))
    return TropicalPointY(p.md, p.Btilde0, p.base, tuple(int(v) for v in g))


def psi(p: TropicalPointY, cp: CompatiblePair) -> TropicalPointX:
    """Lambda_t g_t."""
    L = mutate_pair_along(cp, p.base).Lambda
    a = L.dot(mx.imat(list(p.vector)))
    return TropicalPointX(p.md, p.Btilde0, p.base, tuple(int(v) for v in a))


def dominance_leq(g1: Sequence[int], g2: Sequence[int], Btilde_t) -> bool:
    """g1 <=_t g2: g1 = g2 + Btilde_t nu for some nu in N^n."""
    B = mx.imat(Btilde_t)
    if mx.rank(B) < B.shape[1]:
        raise RankDeficient("Btilde_t does not have full column rank")
    diff = [int(a) - int(b) for a, b in zip(g1, g2)]
    nu = mx.solve_exact(B, diff)
    return nu is not None and all(v.denominator == 1 and v >= 0 for v in nu)


# -- pointed elements --------------------------------------------------------


@dataclass(frozen=True)
class Materialized:
    """u = x_t^g F(yhat_t) at one vertex."""

    g: tuple[int, ...]
    F: LaurentPoly
    Fpos: PositiveFraction


class PointedElement:
    """A user-supplied pointed element: degree and F-data per vertex.

    ``data`` maps vertex words to ``(g, F)`` or ``(g, F, PositiveFraction)``;
    ``F`` is a polynomial in yhat_1..yhat_n with constant term 1.
    """

    def __init__(self, md: MutationData, Btilde0, data: dict):
        self.md = md
        self.Btilde0 = mx.imat(Btilde0)
        self._data = {}
        for word, entry in data.items():
            g, F, *rest = entry
            if F.constant_term() != {(0,) * F.ring.nz: 1}:
                raise ValueError(f"F-polynomial at {list(word)} must have constant term 1")
            rep = rest[0] if rest else PositiveFraction(F)
            if not rep.represents(F):
                raise ValueError(f"subtraction-free representative at {list(word)} does not reduce to F")
            self._data[reduce_word(word)] = Materialized(tuple(int(v) for v in g), F, rep)

    def at(self, word: Sequence[int]) -> Materialized:
        key = reduce_word(word)
        if key not in self._data:
            raise KeyError(f"element not materialized at vertex {[k + 1 for k in key]}")
        return self._data[key]

    def degrees(self, word: Sequence[int]) -> TropicalPointY:
        return TropicalPointY(self.md, self.Btilde0, word, self.at(word).g)

    def describe(self) -> str:
        return "pointed element"


def fvec_of_pointed(u, t: Sequence[int]) -> tuple[int, ...]:
    """Componentwise maximal yhat-degree of the F-polynomial at t."""
    return u.at(t).F.max_exponents()


def is_bipointed(u, t: Sequence[int]) -> bool:
    mat = u.at(t)
    f = mat.F.max_exponents()
    return mat.F.coefficient(f) == {(0,) * mat.F.ring.nz: 1}
