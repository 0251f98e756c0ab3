"""Small exact integer matrices: numpy object arrays holding Python ints."""

from __future__ import annotations

from fractions import Fraction
from typing import Sequence

import numpy as np


def imat(rows) -> np.ndarray:
    a = np.array(rows, dtype=object)
    if a.ndim == 1 and a.size == 0:
        a = a.reshape(0, 0)
    return a


def zeros(r: int, c: int) -> np.ndarray:
    return np.zeros((r, c), dtype=object) + 0


def eye(n: int) -> np.ndarray:
    a = zeros(n, n)
    for i in range(n):
        a[i, i] = 1
    return a


def diag(values: Sequence[int]) -> np.ndarray:
    a = zeros(len(values), len(values))
    for i, v in enumerate(values):
        a[i, i] = int(v)
    return a


def pos(a):
    """Entrywise [a]_+."""
    if isinstance(a, np.ndarray):
        return np.where(a > 0, a, 0).astype(object)
    return a if a > 0 else 0


def col_only(a: np.ndarray, k: int) -> np.ndarray:
    """a^{.k}: zero outside column k."""
    out = zeros(*a.shape)
    out[:, k] = a[:, k]
    return out


def row_only(a: np.ndarray, k: int) -> np.ndarray:
    """a^{k.}: zero outside row k."""
    out = zeros(*a.shape)
    out[k, :] = a[k, :]
    return out


def J(n: int, k: int) -> np.ndarray:
    a = eye(n)
    a[k, k] = -1
    return a


def equal(a: np.ndarray, b: np.ndarray) -> bool:
    return a.shape == b.shape and bool(np.all(a == b))


def to_list(a: np.ndarray) -> list:
    return [[int(v) for v in row] for row in a]


def freeze(a: np.ndarray) -> tuple:
    return tuple(tuple(int(v) for v in row) for row in a)


def sign_coherent(v) -> int | None:
    """Common sign (+1/-1) of a nonzero vector, or None if it mixes signs."""
    has_pos = any(x > 0 for x in v)
    has_neg = any(x < 0 for x in v)
    if has_pos and has_neg:
        return None
    return -1 if has_neg else 1


def rank(a: np.ndarray) -> int:
    m = [[Fraction(int(x)) for x in row] for row in a]
    rows, cols = a.shape
    rk = 0
    for c in range(cols):
        piv = next((r for r in range(rk, rows) if m[r][c] != 0), None)
        if piv is None:
            continue
        m[rk], m[piv] = m[piv], m[rk]
        for r in range(rows):
            if r != rk and m[r][c] != 0:
                f = m[r][c] / m[rk][c]
                m[r] = [x - f * y for x, y in zip(m[r], m[rk])]
        rk += 1
    return rk


def solve_exact(a: np.ndarray, b: Sequence[int]) -> list[Fraction] | None:
    """Unique solution of a @ x == b for full-column-rank a, or None if inconsistent."""
    rows, cols = a.shape
    m = [[Fraction(int(x)) for x in row] + [Fraction(int(bv))] for row, bv in zip(a, b)]
    piv_cols = []
    rk = 0
    for c in range(cols):
        piv = next((r for r in range(rk, rows) if m[r][c] != 0), None)
        if piv is None:
            raise ValueError("matrix is column rank deficient")
        m[rk], m[piv] = m[piv], m[rk]
        p = m[rk][c]
        m[rk] = [x / p for x in m[rk]]
        for r in range(rows):
            if r != rk and m[r][c] != 0:
                f = m[r][c]
                m[r] = [x - f * y for x, y in zip(m[r], m[rk])]
        piv_cols.append(c)
        rk += 1
    if any(m[r][cols] != 0 for r in range(rk, rows)):
        return None
    return [m[i][cols] for i in range(cols)]
