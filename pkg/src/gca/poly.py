"""Exact sparse Laurent polynomials over Z[z].

A :class:`LaurentPoly` lives in a :class:`Ring`: a list of ambient variable
names (x_1..x_m, or yhat_1..yhat_n) plus the canonical z-symbols of the
mutation data.  Internally every monomial -- ambient exponents followed by
z-exponents -- is packed into one Python integer using signed base-2**32
digits.  Packing is linear, so multiplying monomials is integer addition,
and the integer order on packed keys is the lexicographic order on the
exponent vectors (a total order compatible with multiplication, which is
what exact division needs).
"""

from __future__ import annotations

import heapq
import os
from contextlib import contextmanager
from contextvars import ContextVar
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Mapping, Sequence

_SHIFT = 32
_BASE = 1 << _SHIFT
_HALF = 1 << (_SHIFT - 1)


class PolyError(Exception):
    pass


class RingMismatch(PolyError):
    pass


class NotDivisible(PolyError):
    """Exact division failed; ``remainder`` is the nonzero witness."""

    def __init__(self, dividend, divisor, remainder, reason="nonzero remainder"):
        self.dividend = dividend
        self.divisor = divisor
        self.remainder = remainder
        self.reason = reason
        super().__init__(
            f"{reason}: ({dividend.text(max_terms=8)}) / ({divisor.text(max_terms=8)}) "
            f"leaves remainder {remainder.text(max_terms=8)}"
        )


class TermLimitExceeded(PolyError):
    pass


_cap_override: ContextVar[int | None] = ContextVar("gca_term_cap", default=None)


def _term_cap():
    cap = _cap_override.get()
    if cap is not None:
        return cap
    raw = os.environ.get("GCA_MAX_TERMS")
    return int(raw) if raw else None


@contextmanager
def term_limit(cap: int | None):
    """Temporarily cap polynomial sizes (overrides GCA_MAX_TERMS)."""
    token = _cap_override.set(cap)
    try:
        yield
    finally:
        _cap_override.reset(token)


def pack(exps: Iterable[int]) -> int:
    key = 0
    for e in exps:
        if not -_HALF < e < _HALF:
            raise OverflowError(f"exponent {e} out of range")
        key = key * _BASE + e
    return key


def unpack(key: int, size: int) -> tuple[int, ...]:
    out = [0] * size
    for i in range(size - 1, -1, -1):
        d = key & (_BASE - 1)
        if d >= _HALF:
            d -= _BASE
        out[i] = d
        key = (key - d) >> _SHIFT
    return tuple(out)


@dataclass(frozen=True, order=True)
class ZSymbol:
    """The formal coefficient z[i,s]; ``s`` is always the canonical min(s, r_i - s)."""

    i: int
    s: int

    def __str__(self):
        return f"z[{self.i},{self.s}]"


def zsymbols_for(r: Sequence[int]) -> tuple[ZSymbol, ...]:
    return tuple(ZSymbol(i + 1, s) for i, ri in enumerate(r) for s in range(1, ri // 2 + 1))


def canonical_zsymbol(i: int, s: int, ri: int) -> ZSymbol | None:
    """Canonical symbol for z[i,s]; ``None`` stands for the constant 1 (s = 0 or s = r_i)."""
    if not 0 <= s <= ri:
        raise ValueError(f"z[{i},{s}] outside 0..{ri}")
    if s == 0 or s == ri:
        return None
    return ZSymbol(i, min(s, ri - s))


@dataclass(frozen=True)
class Ring:
    variables: tuple[str, ...]
    zsyms: tuple[ZSymbol, ...] = ()

    @property
    def nvars(self) -> int:
        return len(self.variables)

    @property
    def nz(self) -> int:
        return len(self.zsyms)

    @property
    def width(self) -> int:
        return len(self.variables) + len(self.zsyms)

    @cached_property
    def _zindex(self) -> dict:
        return {z: j for j, z in enumerate(self.zsyms)}

    @cached_property
    def _zmask_keys(self) -> tuple[int, ...]:
        return tuple(pack(_unit(self.width, self.nvars + j)) for j in range(self.nz))

    def var_key(self, j: int, e: int = 1) -> int:
        return e * pack(_unit(self.width, j))

    def z_key(self, z: ZSymbol, e: int = 1) -> int:
        return e * self._zmask_keys[self._zindex[z]]

    def split(self, key: int) -> tuple[tuple[int, ...], tuple[int, ...]]:
        full = unpack(key, self.width)
        return full[: self.nvars], full[self.nvars :]

    def key_of(self, xexp: Sequence[int], zexp: Sequence[int] | None = None) -> int:
        if len(xexp) != self.nvars:
            raise ValueError(f"expected {self.nvars} exponents, got {len(xexp)}")
        zexp = tuple(zexp) if zexp is not None else (0,) * self.nz
        return pack(tuple(xexp) + zexp)

    # constructors
    def zero(self) -> LaurentPoly:
        return LaurentPoly(self, {})

    def one(self) -> LaurentPoly:
        return LaurentPoly(self, {0: 1})

    def const(self, c: int) -> LaurentPoly:
        return LaurentPoly(self, {0: c} if c else {})

    def var(self, j: int) -> LaurentPoly:
        """The j-th ambient variable, 0-based."""
        return LaurentPoly(self, {self.var_key(j): 1})

    def monomial(self, xexp: Sequence[int], coeff: int = 1) -> LaurentPoly:
        return LaurentPoly(self, {self.key_of(xexp): coeff} if coeff else {})

    def z(self, z: ZSymbol | None) -> LaurentPoly:
        if z is None:
            return self.one()
        return LaurentPoly(self, {self.z_key(z): 1})

    def from_terms(self, terms: Mapping[tuple, int]) -> LaurentPoly:
        """Build from ``{(xexp, zexp): coeff}``."""
        d: dict[int, int] = {}
        for (xe, ze), c in terms.items():
            k = self.key_of(xe, ze)
            d[k] = d.get(k, 0) + c
        return LaurentPoly(self, {k: c for k, c in d.items() if c})


def _unit(width, j):
    v = [0] * width
    v[j] = 1
    return v


class LaurentPoly:
    """Immutable sparse Laurent polynomial in ``ring.variables`` with Z[z] coefficients."""

    __slots__ = ("ring", "terms", "_hash")

    def __init__(self, ring: Ring, terms: dict[int, int]):
        self.ring = ring
        self.terms = terms
        self._hash = None
        cap = _term_cap()
        if cap is not None and len(terms) > cap:
            raise TermLimitExceeded(f"{len(terms)} terms exceeds GCA_MAX_TERMS={cap}")

    # -- structure -------------------------------------------------------
    def _check(self, other: LaurentPoly):
        if other.ring is not self.ring and other.ring != self.ring:
            raise RingMismatch(f"{self.ring.variables} vs {other.ring.variables}")

    def __len__(self):
        return len(self.terms)

    def is_zero(self) -> bool:
        return not self.terms

    def is_one(self) -> bool:
        return self.terms == {0: 1}

    def __eq__(self, other):
        if isinstance(other, int):
            return self.terms == ({0: other} if other else {})
        if not isinstance(other, LaurentPoly):
            return NotImplemented
        return self.ring == other.ring and self.terms == other.terms

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(frozenset(self.terms.items()))
        return self._hash

    # -- arithmetic ------------------------------------------------------
    def __add__(self, other):
        if isinstance(other, int):
            other = self.ring.const(other)
        self._check(other)
        d = dict(self.terms)
        for k, c in other.terms.items():
            v = d.get(k, 0) + c
            if v:
                d[k] = v
            else:
                d.pop(k, None)
        return LaurentPoly(self.ring, d)

    __radd__ = __add__

    def __neg__(self):
        return LaurentPoly(self.ring, {k: -c for k, c in self.terms.items()})

    def __sub__(self, other):
        if isinstance(other, int):
            other = self.ring.const(other)
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, int):
            if other == 0:
                return self.ring.zero()
            return LaurentPoly(self.ring, {k: c * other for k, c in self.terms.items()})
        self._check(other)
        a, b = self.terms, other.terms
        if len(a) < len(b):
            a, b = b, a
        if len(b) == 1:
            (kb, cb), = b.items()
            return LaurentPoly(self.ring, {ka + kb: ca * cb for ka, ca in a.items()})
        d: dict[int, int] = {}
        get = d.get
        cap = _term_cap()
        for kb, cb in b.items():
            for ka, ca in a.items():
                k = ka + kb
                d[k] = get(k, 0) + ca * cb
            if cap is not None and len(d) > cap:
                # abort early; the cap applies to intermediate products too
                raise TermLimitExceeded(f"product exceeds {cap} terms")
        return LaurentPoly(self.ring, {k: c for k, c in d.items() if c})

    __rmul__ = __mul__

    def __pow__(self, e: int):
        if e < 0:
            if len(self.terms) != 1:
                raise NotDivisible(self.ring.one(), self, self.ring.one(), "negative power of a non-monomial")
            (k, c), = self.terms.items()
            if c not in (1, -1):
                raise NotDivisible(self.ring.one(), self, self.ring.one(), "negative power with non-unit coefficient")
            return LaurentPoly(self.ring, {-k * (-e): c ** (-e)})
        result = self.ring.one()
        base = self
        while e:
            if e & 1:
                result = result * base
            e >>= 1
            if e:
                base = base * base
        return result

    def shift(self, key: int) -> LaurentPoly:
        """Multiply by the monomial with packed exponent ``key``."""
        return LaurentPoly(self.ring, {k + key: c for k, c in self.terms.items()})

    def divide_exact(self, other: LaurentPoly) -> LaurentPoly:
        return poly_div_exact(self, other)

    # -- inspection ------------------------------------------------------
    def items(self):
        """Yield ``(xexp, zexp, coeff)`` in increasing monomial order."""
        for k in sorted(self.terms):
            xe, ze = self.ring.split(k)
            yield xe, ze, self.terms[k]

    def coefficient(self, xexp: Sequence[int]) -> dict[tuple[int, ...], int]:
        """The Z[z] coefficient of ``x^xexp`` as ``{zexp: int}``."""
        out = {}
        for xe, ze, c in self.items():
            if xe == tuple(xexp):
                out[ze] = c
        return out

    def constant_term(self) -> dict[tuple[int, ...], int]:
        return self.coefficient((0,) * self.ring.nvars)

    def support(self) -> set[tuple[int, ...]]:
        """Ambient exponent vectors with a nonzero Z[z] coefficient."""
        return {self.ring.split(k)[0] for k in self.terms}

    def is_nonnegative(self) -> bool:
        return all(c > 0 for c in self.terms.values())

    def is_polynomial(self) -> bool:
        return all(e >= 0 for k in self.terms for e in self.ring.split(k)[0])

    def min_exponents(self) -> tuple[int, ...]:
        vecs = [self.ring.split(k)[0] for k in self.terms]
        if not vecs:
            return (0,) * self.ring.nvars
        return tuple(min(col) for col in zip(*vecs))

    def max_exponents(self) -> tuple[int, ...]:
        vecs = [self.ring.split(k)[0] for k in self.terms]
        if not vecs:
            return (0,) * self.ring.nvars
        return tuple(max(col) for col in zip(*vecs))

    def substitute_monomials(self, target: Ring, images: Sequence[Sequence[int]]) -> LaurentPoly:
        """Replace ambient variable j by the monomial ``target^images[j]``; z-symbols carry over."""
        if target.zsyms != self.ring.zsyms:
            raise RingMismatch("z-symbols differ")
        img = [target.key_of(v) for v in images]
        zk = target._zmask_keys
        d: dict[int, int] = {}
        for k, c in self.terms.items():
            xe, ze = self.ring.split(k)
            nk = sum(e * ik for e, ik in zip(xe, img)) + sum(e * z for e, z in zip(ze, zk))
            d[nk] = d.get(nk, 0) + c
        return LaurentPoly(target, {k: c for k, c in d.items() if c})

    def map_ring(self, target: Ring) -> LaurentPoly:
        """Re-home into a ring with the same variable count and z-symbols."""
        if target.width != self.ring.width:
            raise RingMismatch("ring widths differ")
        return LaurentPoly(target, dict(self.terms))

    # -- rendering -------------------------------------------------------
    def text(self, max_terms: int | None = None) -> str:
        if not self.terms:
            return "0"
        parts = []
        for n_done, k in enumerate(sorted(self.terms, reverse=True)):
            if max_terms is not None and n_done >= max_terms:
                parts.append(f"... ({len(self.terms) - max_terms} more)")
                break
            xe, ze = self.ring.split(k)
            c = self.terms[k]
            factors = []
            for z, e in zip(self.ring.zsyms, ze):
                if e:
                    factors.append(str(z) if e == 1 else f"{z}^{e}")
            for name, e in zip(self.ring.variables, xe):
                if e:
                    factors.append(name if e == 1 else f"{name}^{e}")
            mono = "*".join(factors)
            if not mono:
                parts.append(str(c))
            elif c == 1:
                parts.append(mono)
            elif c == -1:
                parts.append("-" + mono)
            else:
                parts.append(f"{c}*{mono}")
        out = parts[0]
        for p in parts[1:]:
            out += " - " + p[1:] if p.startswith("-") else " + " + p
        return out

    __str__ = text

    def __repr__(self):
        return f"LaurentPoly({self.text(max_terms=6)})"

    def to_json(self) -> list:
        """Term list ``[{exponents, coeff: {zterms: [{z: [[i, s, e], ...], c}]}}]``, sorted."""
        grouped: dict[tuple, list] = {}
        for xe, ze, c in self.items():
            z = [[sym.i, sym.s, e] for sym, e in zip(self.ring.zsyms, ze) if e]
            grouped.setdefault(xe, []).append({"z": z, "c": c})
        return [{"exponents": list(xe), "coeff": {"zterms": zt}} for xe, zt in sorted(grouped.items())]

    @classmethod
    def from_json(cls, ring: Ring, data: list) -> LaurentPoly:
        terms: dict[int, int] = {}
        zindex = ring._zindex
        for entry in data:
            xe = entry["exponents"]
            for zt in entry["coeff"]["zterms"]:
                ze = [0] * ring.nz
                for i, s, e in zt["z"]:
                    ze[zindex[ZSymbol(i, s)]] += e
                k = ring.key_of(xe, ze)
                terms[k] = terms.get(k, 0) + zt["c"]
        return cls(ring, {k: c for k, c in terms.items() if c})


def poly_add(a: LaurentPoly, b: LaurentPoly) -> LaurentPoly:
    return a + b


def poly_mul(a: LaurentPoly, b: LaurentPoly) -> LaurentPoly:
    return a * b


def poly_div_exact(a: LaurentPoly, b: LaurentPoly) -> LaurentPoly:
    """Return q with q*b == a, or raise NotDivisible carrying the remainder.

    Leading-term elimination under the packed-key order.  If b divides a,
    every quotient term lies between min(a)-min(b) and max(a)-max(b), which
    bounds the loop even though Laurent monomial orders are not well-founded.
    """
    a._check(b)
    if b.is_zero():
        raise ZeroDivisionError("division by the zero polynomial")
    if a.is_zero():
        return a
    if len(b.terms) == 1:
        (kb, cb), = b.terms.items()
        if any(c % cb for c in a.terms.values()):
            raise NotDivisible(a, b, a, "coefficient not divisible")
        q = LaurentPoly(a.ring, {k - kb: c // cb for k, c in a.terms.items()})
        _check_z_nonneg(q, a, b)
        return q
    ring = a.ring
    lead_b = max(b.terms)
    cb = b.terms[lead_b]
    lower = min(a.terms) - min(b.terms)
    bterms = list(b.terms.items())
    rem = dict(a.terms)
    heap = [-k for k in rem]
    heapq.heapify(heap)
    quot: dict[int, int] = {}
    while rem:
        k = -heapq.heappop(heap)
        c = rem.get(k)
        if c is None:
            continue
        t = k - lead_b
        if t < lower or c % cb:
            reason = "coefficient not divisible" if t >= lower else "nonzero remainder"
            raise NotDivisible(a, b, LaurentPoly(ring, rem), reason)
        qc = c // cb
        quot[t] = qc
        for kk, cc in bterms:
            key = t + kk
            v = rem.get(key, 0) - qc * cc
            if v:
                if key not in rem:
                    heapq.heappush(heap, -key)
                rem[key] = v
            else:
                rem.pop(key, None)
    q = LaurentPoly(ring, quot)
    _check_z_nonneg(q, a, b)
    return q


def _check_z_nonneg(q: LaurentPoly, a, b):
    if q.ring.nz == 0:
        return
    for k in q.terms:
        if any(e < 0 for e in q.ring.split(k)[1]):
            raise NotDivisible(a, b, q, "quotient needs negative z-powers")


def max_divisor_monomial(F: LaurentPoly) -> tuple[int, ...] | None:
    """Exponent of the unique monomial divisible by every monomial of F, if it has coefficient 1.

    Returns ``None`` (no maximal monomial) when the componentwise maximum is
    not in the support or its Z[z]-coefficient is not exactly 1.
    """
    if F.is_zero():
        return None
    f = F.max_exponents()
    coeff = F.coefficient(f)
    if coeff != {(0,) * F.ring.nz: 1}:
        return None
    return f


class PositiveFraction:
    """A subtraction-free quotient num/den of polynomials with constant term 1."""

    __slots__ = ("num", "den")

    def __init__(self, num: LaurentPoly, den: LaurentPoly | None = None):
        den = num.ring.one() if den is None else den
        num._check(den)
        for name, p in (("num", num), ("den", den)):
            if not p.is_nonnegative():
                raise ValueError(f"{name} has a negative coefficient")
            if not p.is_polynomial():
                raise ValueError(f"{name} has a negative exponent")
            if p.constant_term() != {(0,) * p.ring.nz: 1}:
                raise ValueError(f"{name} must have constant term exactly 1")
        self.num = num
        self.den = den

    @property
    def ring(self) -> Ring:
        return self.num.ring

    def represents(self, F: LaurentPoly) -> bool:
        return self.num == F * self.den

    def __mul__(self, other: PositiveFraction) -> PositiveFraction:
        return PositiveFraction(self.num * other.num, self.den * other.den)

    def __pow__(self, e: int) -> PositiveFraction:
        if e < 0:
            return PositiveFraction(self.den ** -e, self.num ** -e)
        return PositiveFraction(self.num ** e, self.den ** e)

    def __eq__(self, other):
        if not isinstance(other, PositiveFraction):
            return NotImplemented
        return self.num * other.den == other.num * self.den

    __hash__ = None

    def __repr__(self):
        return f"PositiveFraction(({self.num.text(max_terms=6)}) / ({self.den.text(max_terms=6)}))"

    def to_json(self) -> dict:
        return {"num": self.num.to_json(), "den": self.den.to_json()}


def _max_dot(p: LaurentPoly, h: Sequence[int]) -> int:
    n = p.ring.nvars
    return max(sum(a * b for a, b in zip(unpack(k, p.ring.width)[:n], h)) for k in p.terms)


def trop_eval(F: PositiveFraction, h: Sequence[int]) -> int:
    """max over supp(num) of nu.h minus max over supp(den) of mu.h."""
    if len(h) != F.ring.nvars:
        raise ValueError(f"h has length {len(h)}, expected {F.ring.nvars}")
    return _max_dot(F.num, h) - _max_dot(F.den, h)
