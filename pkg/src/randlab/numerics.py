"""Exact rationals, rational intervals and interval-valued computable reals.

Every other module builds on :class:`fractions.Fraction`; nothing here ever
touches a float.  Precisions are absolute: an approximation at precision ``k``
has width at most ``2**-k``.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Dict, Union

Rational = Fraction
RationalLike = Union[int, Fraction]

__all__ = [
    "Rational",
    "DyadicInterval",
    "IntervalReal",
    "interval_arith",
    "log2_floor_scaled",
    "log2_lower",
    "log2_upper",
    "log2_interval",
    "log2_real",
    "rat_to_str",
    "rat_from_str",
    "ceil_log2",
]


def rat_to_str(q: RationalLike) -> str:
    q = Fraction(q)
    return f"{q.numerator}/{q.denominator}"


def rat_from_str(s: str) -> Fraction:
    s = s.strip()
    if "/" in s:
        p, q = s.split("/")
        if int(q) <= 0:
            raise ValueError(f"bad rational {s!r}: denominator must be positive")
        return Fraction(int(p), int(q))
    return Fraction(int(s))


def ceil_log2(q: RationalLike) -> int:
    """Smallest integer ``e`` with ``q <= 2**e`` (``q > 0``)."""
    q = Fraction(q)
    if q <= 0:
        raise ValueError("ceil_log2 needs a positive argument")
    e = q.numerator.bit_length() - q.denominator.bit_length()
    while Fraction(2) ** e < q:
        e += 1
    while Fraction(2) ** (e - 1) >= q:
        e -= 1
    return e


@dataclass(frozen=True)
class DyadicInterval:
    """Closed interval ``[lo, hi]`` with rational endpoints."""

    lo: Fraction
    hi: Fraction

    def __post_init__(self):
        object.__setattr__(self, "lo", Fraction(self.lo))
        object.__setattr__(self, "hi", Fraction(self.hi))
        if self.lo > self.hi:
            raise ValueError(f"empty interval [{self.lo}, {self.hi}]")

    @classmethod
    def point(cls, q: RationalLike) -> "DyadicInterval":
        return cls(Fraction(q), Fraction(q))

    @property
    def width(self) -> Fraction:
        return self.hi - self.lo

    @property
    def mid(self) -> Fraction:
        return (self.lo + self.hi) / 2

    def contains(self, x: RationalLike) -> bool:
        return self.lo <= x <= self.hi

    def subset_of(self, other: "DyadicInterval") -> bool:
        return other.lo <= self.lo and self.hi <= other.hi

    def __and__(self, other: "DyadicInterval") -> "DyadicInterval":
        return DyadicInterval(max(self.lo, other.lo), min(self.hi, other.hi))

    def __add__(self, other: "DyadicInterval") -> "DyadicInterval":
        return DyadicInterval(self.lo + other.lo, self.hi + other.hi)

    def __sub__(self, other: "DyadicInterval") -> "DyadicInterval":
        return DyadicInterval(self.lo - other.hi, self.hi - other.lo)

    def __neg__(self) -> "DyadicInterval":
        return DyadicInterval(-self.hi, -self.lo)

    def __mul__(self, other: "DyadicInterval") -> "DyadicInterval":
        c = (self.lo * other.lo, self.lo * other.hi, self.hi * other.lo, self.hi * other.hi)
        return DyadicInterval(min(c), max(c))

    def scale(self, c: RationalLike) -> "DyadicInterval":
        c = Fraction(c)
        a, b = self.lo * c, self.hi * c
        return DyadicInterval(min(a, b), max(a, b))

    def to_json(self) -> dict:
        return {"lo": rat_to_str(self.lo), "hi": rat_to_str(self.hi)}

    @classmethod
    def from_json(cls, d: dict) -> "DyadicInterval":
        return cls(rat_from_str(d["lo"]), rat_from_str(d["hi"]))


def _round_out(iv: DyadicInterval, bits: int) -> DyadicInterval:
    scale = 1 << bits
    lo = Fraction((iv.lo * scale).__floor__(), scale)
    hi = Fraction((iv.hi * scale).__ceil__(), scale)
    return DyadicInterval(lo, hi)


class IntervalReal:
    """A real number given by nested rational enclosures.

    ``raw(k)`` may return any enclosure of width ``<= 2**-(k+1)``; the public
    :meth:`approx` rounds it outward to a dyadic grid and intersects with the
    previous precision so that enclosures are nested.
    """

    def __init__(self, raw: Callable[[int], DyadicInterval], exact: Fraction | None = None):
        self._raw = raw
        self._exact = exact
        self._cache: Dict[int, DyadicInterval] = {}

    @classmethod
    def exact(cls, q: RationalLike) -> "IntervalReal":
        q = Fraction(q)
        return cls(lambda k: DyadicInterval.point(q), exact=q)

    @property
    def exact_value(self) -> Fraction | None:
        return self._exact

    def approx(self, k: int) -> DyadicInterval:
        if k < 0:
            raise ValueError("precision must be non-negative")
        if k in self._cache:
            return self._cache[k]
        start = max((j for j in self._cache if j < k), default=-1)
        prev = self._cache.get(start)
        for j in range(start + 1, k + 1):
            iv = self._raw(j)
            if iv.width > Fraction(1, 2 ** (j + 1)):
                raise ArithmeticError(f"raw enclosure too wide at precision {j}")
            if self._exact is None or iv.width:
                iv = _round_out(iv, j + 2)
            if prev is not None:
                iv = iv & prev
            self._cache[j] = iv
            prev = iv
        return self._cache[k]

    def __add__(self, other):
        return interval_arith("add", self, _lift(other))

    def __radd__(self, other):
        return interval_arith("add", _lift(other), self)

    def __sub__(self, other):
        return interval_arith("sub", self, _lift(other))

    def __rsub__(self, other):
        return interval_arith("sub", _lift(other), self)

    def __mul__(self, other):
        return interval_arith("mul", self, _lift(other))

    def __rmul__(self, other):
        return interval_arith("mul", _lift(other), self)

    def __neg__(self):
        return interval_arith("neg", self, self)

    def __repr__(self):
        iv = self.approx(10)
        return f"IntervalReal(~[{float(iv.lo):.6g}, {float(iv.hi):.6g}])"


def _lift(x) -> IntervalReal:
    return x if isinstance(x, IntervalReal) else IntervalReal.exact(x)


def _magnitude_bits(x: IntervalReal) -> int:
    iv = x.approx(0)
    m = max(abs(iv.lo), abs(iv.hi)) + 1
    return ceil_log2(m)


def interval_arith(op: str, a: IntervalReal, b: IntervalReal) -> IntervalReal:
    """Combine two computable reals; ``op`` is one of add, sub, mul, min, max, neg.

    ``neg`` ignores ``b``.
    """
    ex = None
    if a.exact_value is not None and b.exact_value is not None:
        u, v = a.exact_value, b.exact_value
        ex = {"add": lambda: u + v, "sub": lambda: u - v, "mul": lambda: u * v,
              "min": lambda: min(u, v), "max": lambda: max(u, v), "neg": lambda: -u}[op]()
        return IntervalReal.exact(ex)

    if op == "add":
        raw = lambda k: a.approx(k + 3) + b.approx(k + 3)
    elif op == "sub":
        raw = lambda k: a.approx(k + 3) - b.approx(k + 3)
    elif op == "neg":
        raw = lambda k: -a.approx(k + 2)
    elif op in ("min", "max"):
        pick = min if op == "min" else max

        def raw(k):
            x, y = a.approx(k + 2), b.approx(k + 2)
            return DyadicInterval(pick(x.lo, y.lo), pick(x.hi, y.hi))
    elif op == "mul":
        extra = max(_magnitude_bits(a), _magnitude_bits(b)) + 3

        def raw(k):
            return a.approx(k + extra) * b.approx(k + extra)
    else:
        raise ValueError(f"unknown interval op {op!r}")
    return IntervalReal(raw)


def log2_floor_scaled(a: RationalLike, k: int) -> int:
    """Exact ``floor(2**k * log2(a))`` for rational ``a > 0``.

    Fixed-point repeated squaring carried out on a lower and an upper
    enclosure at once; a step whose decision the two disagree on is retried
    at doubled working precision, so the result is never a guess.
    """
    a = Fraction(a)
    if a <= 0:
        raise ValueError("log2 of a nonpositive number")
    if k < 0:
        raise ValueError("precision must be non-negative")
    p, q = a.numerator, a.denominator
    e = p.bit_length() - q.bit_length()
    # normalise so that 2**e <= a < 2**(e+1)
    if (p << max(-e, 0)) < (q << max(e, 0)):
        e -= 1
    num, den = (p, q << e) if e >= 0 else (p << -e, q)
    if num == den:
        return e << k
    work = 2 * k + 64
    while True:
        one = 1 << work
        two = one << 1
        lo = (num << work) // den
        hi = -((-(num << work)) // den)
        bits = 0
        ok = True
        for _ in range(k):
            lo = (lo * lo) >> work
            hi = -((-(hi * hi)) >> work)
            if lo >= two:
                bits = (bits << 1) | 1
                lo >>= 1
                hi = -((-hi) >> 1)
            elif hi < two:
                bits <<= 1
            else:
                ok = False
                break
        if ok:
            return (e << k) + bits
        work *= 2


def log2_lower(a: RationalLike, k: int) -> Fraction:
    """``L`` with ``L <= log2(a) < L + 2**-k``."""
    return Fraction(log2_floor_scaled(a, k), 1 << k)


def log2_upper(a: RationalLike, k: int) -> Fraction:
    """``U`` with ``U - 2**-k < log2(a) <= U``."""
    return -log2_lower(1 / Fraction(a), k)


def log2_interval(a: RationalLike, k: int) -> DyadicInterval:
    return DyadicInterval(log2_lower(a, k), log2_upper(a, k))


def log2_real(a: RationalLike) -> IntervalReal:
    a = Fraction(a)
    return IntervalReal(lambda k: log2_interval(a, k + 1))
