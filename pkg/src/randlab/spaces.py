"""Computable metric spaces, the enumerated Lipschitz family and binary cells.

Each space enumerates a dense set through ``point(i)``, measures exact
rational distances between dense points, and round-trips points through a
short codec string used by the JSON formats.

Enumeration schedule of the Lipschitz family ``E`` (``enumerate_E``)::

    E(1)             = One
    E(n), m = n - 2, q = m // 4, by m % 4:
      0: Hat(point(i), rat(j), 1/(e+1))   where q = <<i, j>, e>
      1: Min(E(a+1), E(b+1))              where q = <a, b>
      2: Max(E(a+1), E(b+1))              where q = <a, b>
      3: s*E(a+1) + t*E(b+1)              where q = <<<a, b>, sc>, tc>,
                                          s = rat(sc), t = rat(tc)

with the Cantor pairing ``<i, j> = (i+j)(i+j+1)/2 + j`` and the rational code
``rat(j) = p/(q+1)`` for ``<p, q> = j``.  The hat with code ``q`` is therefore
``E(4q + 2)``.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import isqrt
from typing import Any, Iterator, List, Optional, Sequence, Tuple

from .numerics import DyadicInterval, IntervalReal, rat_from_str, rat_to_str

__all__ = [
    "cantor_pair",
    "cantor_unpair",
    "tuple_pair",
    "tuple_unpair",
    "rat_code",
    "Space",
    "DiscreteStrings",
    "Naturals",
    "UnitInterval",
    "BinarySequences",
    "NaturalSequences",
    "CompactifiedNaturals",
    "Product",
    "INF",
    "space_from_json",
    "LipschitzExpr",
    "One",
    "Hat",
    "Min",
    "Max",
    "LinComb",
    "enumerate_E",
    "hat_schedule",
    "lipschitz_eval",
    "to_sexpr",
    "from_sexpr",
    "BallSupremum",
    "monotone_approx",
    "SeparatingSequence",
    "CellBoundaryError",
    "cell_of",
    "separating_sequence",
]


# ---------------------------------------------------------------- pairing


def cantor_pair(i: int, j: int) -> int:
    return (i + j) * (i + j + 1) // 2 + j


def cantor_unpair(n: int) -> Tuple[int, int]:
    w = (isqrt(8 * n + 1) - 1) // 2
    j = n - w * (w + 1) // 2
    return w - j, j


def tuple_pair(*ns: int) -> int:
    """``<n1, ..., nk+1> = <<n1, ..., nk>, nk+1>``."""
    acc = ns[0]
    for n in ns[1:]:
        acc = cantor_pair(acc, n)
    return acc


def tuple_unpair(n: int, k: int) -> Tuple[int, ...]:
    out = []
    for _ in range(k - 1):
        n, last = cantor_unpair(n)
        out.append(last)
    out.append(n)
    return tuple(reversed(out))


def rat_code(j: int) -> Fraction:
    p, q = cantor_unpair(j)
    return Fraction(p, q + 1)


# ---------------------------------------------------------------- spaces


class Space:
    """Base class; subclasses are frozen dataclasses and therefore hashable."""

    kind: str = "?"

    def point(self, i: int):
        raise NotImplementedError

    def distance(self, x, y) -> Fraction:
        raise NotImplementedError

    def distance_real(self, x, y) -> IntervalReal:
        return IntervalReal.exact(self.distance(x, y))

    def encode(self, x) -> str:
        raise NotImplementedError

    def decode(self, s: str):
        raise NotImplementedError

    def contains(self, x) -> bool:
        raise NotImplementedError

    def sort_key(self, x):
        return self.encode(x)

    def points(self, n: int) -> List[Any]:
        return [self.point(i) for i in range(n)]

    def to_json(self) -> dict:
        return {"kind": self.kind}


def _bits_ok(s) -> bool:
    return isinstance(s, str) and all(c in "01" for c in s)


@dataclass(frozen=True)
class DiscreteStrings(Space):
    """All finite bit strings with the discrete metric."""

    kind = "DiscreteStrings"

    def point(self, i):
        return format(i + 1, "b")[1:]

    def distance(self, x, y):
        return Fraction(0 if x == y else 1)

    def encode(self, x):
        return x

    def decode(self, s):
        if not _bits_ok(s):
            raise ValueError(f"not a bit string: {s!r}")
        return s

    def contains(self, x):
        return _bits_ok(x)

    def sort_key(self, x):
        return (len(x), x)


@dataclass(frozen=True)
class Naturals(Space):
    """Natural numbers with the discrete metric."""

    kind = "Naturals"

    def point(self, i):
        return i

    def distance(self, x, y):
        return Fraction(0 if x == y else 1)

    def encode(self, x):
        return str(x)

    def decode(self, s):
        n = int(s)
        if n < 0:
            raise ValueError("negative natural")
        return n

    def contains(self, x):
        return isinstance(x, int) and x >= 0

    def sort_key(self, x):
        return x


def _farey_point(i: int) -> Fraction:
    if i < 2:
        return Fraction(i)
    i -= 2
    q = 2
    while True:
        nums = [p for p in range(1, q) if Fraction(p, q).denominator == q]
        if i < len(nums):
            return Fraction(nums[i], q)
        i -= len(nums)
        q += 1


@dataclass(frozen=True)
class UnitInterval(Space):
    """``[0, 1]`` with ``|x - y|``; dense set: rationals by denominator."""

    kind = "UnitInterval"

    def point(self, i):
        return _farey_point(i)

    def distance(self, x, y):
        return abs(Fraction(x) - Fraction(y))

    def encode(self, x):
        return rat_to_str(x)

    def decode(self, s):
        x = rat_from_str(s)
        if not 0 <= x <= 1:
            raise ValueError(f"{s} outside [0,1]")
        return x

    def contains(self, x):
        return isinstance(x, (int, Fraction)) and 0 <= x <= 1

    def sort_key(self, x):
        return Fraction(x)


@dataclass(frozen=True)
class BinarySequences(Space):
    """Infinite bit sequences; dense points are eventually-zero sequences
    written without trailing zeros.  ``d(x, y) = sum_i 2^-i |x_i - y_i|``."""

    kind = "BinarySequences"

    def point(self, i):
        return format(i, "b")[::-1] if i else ""

    @staticmethod
    def canon(x: str) -> str:
        return x.rstrip("0")

    def distance(self, x, y):
        n = max(len(x), len(y))
        x, y = x.ljust(n, "0"), y.ljust(n, "0")
        return sum((Fraction(1, 2 ** (i + 1)) for i in range(n) if x[i] != y[i]), Fraction(0))

    def encode(self, x):
        return self.canon(x)

    def decode(self, s):
        if not _bits_ok(s):
            raise ValueError(f"not a bit string: {s!r}")
        return self.canon(s)

    def contains(self, x):
        return _bits_ok(x)


@dataclass(frozen=True)
class NaturalSequences(Space):
    """Sequences of naturals; dense points are finite tuples without trailing
    zeros.  ``d(x, y) = sum_i 2^-i [x_i != y_i]``."""

    kind = "NaturalSequences"

    def point(self, i):
        if i == 0:
            return ()
        # gaps between the one-bits of i, last entry shifted up by one
        pos = [k for k in range(i.bit_length()) if i >> k & 1]
        gaps = [pos[0]] + [pos[t] - pos[t - 1] - 1 for t in range(1, len(pos))]
        gaps[-1] += 1
        return tuple(gaps)

    @staticmethod
    def canon(x) -> tuple:
        x = list(x)
        while x and x[-1] == 0:
            x.pop()
        return tuple(x)

    def distance(self, x, y):
        n = max(len(x), len(y))
        x = tuple(x) + (0,) * (n - len(x))
        y = tuple(y) + (0,) * (n - len(y))
        return sum((Fraction(1, 2 ** (i + 1)) for i in range(n) if x[i] != y[i]), Fraction(0))

    def encode(self, x):
        return ",".join(str(v) for v in self.canon(x))

    def decode(self, s):
        if not s:
            return ()
        v = tuple(int(t) for t in s.split(","))
        if any(t < 0 for t in v):
            raise ValueError("negative entry")
        return self.canon(v)

    def contains(self, x):
        return isinstance(x, tuple) and all(isinstance(v, int) and v >= 0 for v in x)


class _Inf:
    def __repr__(self):
        return "INF"

    def __reduce__(self):
        return (_inf, ())


INF = _Inf()


def _inf():
    return INF


@dataclass(frozen=True)
class CompactifiedNaturals(Space):
    """``N`` plus a point at infinity, ``d(m, n) = |1/(m+1) - 1/(n+1)|``."""

    kind = "CompactifiedNaturals"

    def point(self, i):
        return INF if i == 0 else i - 1

    @staticmethod
    def _coord(x) -> Fraction:
        return Fraction(0) if x is INF else Fraction(1, x + 1)

    def distance(self, x, y):
        return abs(self._coord(x) - self._coord(y))

    def encode(self, x):
        return "inf" if x is INF else str(x)

    def decode(self, s):
        if s == "inf":
            return INF
        n = int(s)
        if n < 0:
            raise ValueError("negative natural")
        return n

    def contains(self, x):
        return x is INF or (isinstance(x, int) and x >= 0)

    def sort_key(self, x):
        return (1, 0) if x is INF else (0, x)


def _split_top(s: str) -> List[str]:
    parts, depth, cur = [], 0, []
    for c in s:
        if c == "[":
            depth += 1
        elif c == "]":
            depth -= 1
        if c == ";" and depth == 0:
            parts.append("".join(cur))
            cur = []
        else:
            cur.append(c)
    parts.append("".join(cur))
    return parts


@dataclass(frozen=True)
class Product(Space):
    """Finite product with ``d = sum_i 2^-i d_i`` (``i`` from 1)."""

    factors: Tuple[Space, ...]
    kind = "Product"

    def __post_init__(self):
        object.__setattr__(self, "factors", tuple(self.factors))
        if not self.factors:
            raise ValueError("empty product")

    def point(self, i):
        k = len(self.factors)
        idx = tuple_unpair(i, k) if k > 1 else (i,)
        return tuple(f.point(j) for f, j in zip(self.factors, idx))

    def distance(self, x, y):
        return sum((f.distance(a, b) / 2 ** (i + 1)
                    for i, (f, a, b) in enumerate(zip(self.factors, x, y))), Fraction(0))

    def encode(self, x):
        return "[" + ";".join(f.encode(a) for f, a in zip(self.factors, x)) + "]"

    def decode(self, s):
        if not (s.startswith("[") and s.endswith("]")):
            raise ValueError(f"bad product point {s!r}")
        parts = _split_top(s[1:-1])
        if len(parts) != len(self.factors):
            raise ValueError(f"product point {s!r} has wrong arity")
        return tuple(f.decode(p) for f, p in zip(self.factors, parts))

    def contains(self, x):
        return (isinstance(x, tuple) and len(x) == len(self.factors)
                and all(f.contains(a) for f, a in zip(self.factors, x)))

    def sort_key(self, x):
        return tuple(f.sort_key(a) for f, a in zip(self.factors, x))

    def to_json(self):
        return {"kind": "Product", "factors": [f.to_json() for f in self.factors]}


_KINDS = {c.kind: c for c in (DiscreteStrings, Naturals, UnitInterval, BinarySequences,
                              NaturalSequences, CompactifiedNaturals)}


def space_from_json(d) -> Space:
    if isinstance(d, str):
        d = {"kind": d}
    kind = d.get("kind")
    if kind == "Product":
        return Product(tuple(space_from_json(f) for f in d["factors"]))
    if kind not in _KINDS:
        raise ValueError(f"unknown space kind {kind!r}")
    return _KINDS[kind]()


# ---------------------------------------------------------------- Lipschitz family


class LipschitzExpr:
    """Immutable expression over hats; values are exact rationals."""

    def value(self, x) -> Fraction:
        raise NotImplementedError

    def bounds(self) -> Tuple[Fraction, Fraction]:
        raise NotImplementedError

    def lipschitz(self) -> Fraction:
        raise NotImplementedError

    def __call__(self, x) -> Fraction:
        return self.value(x)


@dataclass(frozen=True)
class One(LipschitzExpr):
    def value(self, x):
        return Fraction(1)

    def bounds(self):
        return Fraction(1), Fraction(1)

    def lipschitz(self):
        return Fraction(0)


@dataclass(frozen=True)
class Hat(LipschitzExpr):
    """``g(x) = |1 - |d(x, u) - r|^+ / eps|^+``: 1 on ``B(u, r)``, 0 beyond ``r + eps``."""

    space: Space
    u: Any
    r: Fraction
    eps: Fraction

    def __post_init__(self):
        object.__setattr__(self, "r", Fraction(self.r))
        object.__setattr__(self, "eps", Fraction(self.eps))
        if self.eps <= 0:
            raise ValueError("hat width must be positive")

    def value(self, x):
        over = max(Fraction(0), self.space.distance(x, self.u) - self.r)
        return max(Fraction(0), 1 - over / self.eps)

    def bounds(self):
        return Fraction(0), Fraction(1)

    def lipschitz(self):
        return 1 / self.eps


@dataclass(frozen=True)
class Min(LipschitzExpr):
    children: Tuple[LipschitzExpr, ...]

    def value(self, x):
        return min(c.value(x) for c in self.children)

    def bounds(self):
        bs = [c.bounds() for c in self.children]
        return min(b[0] for b in bs), min(b[1] for b in bs)

    def lipschitz(self):
        return max(c.lipschitz() for c in self.children)


@dataclass(frozen=True)
class Max(LipschitzExpr):
    children: Tuple[LipschitzExpr, ...]

    def value(self, x):
        return max(c.value(x) for c in self.children)

    def bounds(self):
        bs = [c.bounds() for c in self.children]
        return max(b[0] for b in bs), max(b[1] for b in bs)

    def lipschitz(self):
        return max(c.lipschitz() for c in self.children)


@dataclass(frozen=True)
class LinComb(LipschitzExpr):
    terms: Tuple[Tuple[Fraction, LipschitzExpr], ...]

    def value(self, x):
        return sum((c * e.value(x) for c, e in self.terms), Fraction(0))

    def bounds(self):
        lo = hi = Fraction(0)
        for c, e in self.terms:
            a, b = e.bounds()
            lo += min(c * a, c * b)
            hi += max(c * a, c * b)
        return lo, hi

    def lipschitz(self):
        return sum((abs(c) * e.lipschitz() for c, e in self.terms), Fraction(0))


def lipschitz_eval(f: LipschitzExpr, x, k: int = 0) -> DyadicInterval:
    """Enclosure of ``f(x)``; exact (width 0) since distances on dense points are rational."""
    return DyadicInterval.point(f.value(x))


def hat_schedule(q: int) -> int:
    """Index ``n`` with ``enumerate_E(space, n)`` the hat of code ``q``."""
    return 4 * q + 2


def enumerate_E(space: Space, n: int) -> LipschitzExpr:
    if n < 1:
        raise ValueError("enumeration starts at 1")
    if n == 1:
        return One()
    m = n - 2
    c, q = m % 4, m // 4
    if c == 0:
        i, j, e = tuple_unpair(q, 3)
        return Hat(space, space.point(i), rat_code(j), Fraction(1, e + 1))
    if c in (1, 2):
        a, b = cantor_unpair(q)
        kids = (enumerate_E(space, a + 1), enumerate_E(space, b + 1))
        return Min(kids) if c == 1 else Max(kids)
    a, b, sc, tc = tuple_unpair(q, 4)
    return LinComb(((rat_code(sc), enumerate_E(space, a + 1)),
                    (rat_code(tc), enumerate_E(space, b + 1))))


# s-expression form:
#   expr := (one) | (hat "<u>" "<r>" "<eps>") | (min expr+) | (max expr+)
#         | (lin "<c>" expr "<c>" expr ...)
# "<u>" is the space codec of the hat center, other quoted atoms are p/q.


def to_sexpr(f: LipschitzExpr) -> str:
    if isinstance(f, One):
        return "(one)"
    if isinstance(f, Hat):
        return f'(hat "{f.space.encode(f.u)}" "{rat_to_str(f.r)}" "{rat_to_str(f.eps)}")'
    if isinstance(f, (Min, Max)):
        tag = "min" if isinstance(f, Min) else "max"
        return f"({tag} " + " ".join(to_sexpr(c) for c in f.children) + ")"
    if isinstance(f, LinComb):
        return "(lin " + " ".join(f'"{rat_to_str(c)}" {to_sexpr(e)}' for c, e in f.terms) + ")"
    raise TypeError(f"not a Lipschitz expression: {f!r}")


def _tokens(text: str) -> Iterator[str]:
    i, n = 0, len(text)
    while i < n:
        c = text[i]
        if c.isspace():
            i += 1
        elif c in "()":
            yield c
            i += 1
        elif c == '"':
            j = text.index('"', i + 1)
            yield text[i:j + 1]
            i = j + 1
        else:
            j = i
            while j < n and not text[j].isspace() and text[j] not in '()"':
                j += 1
            yield text[i:j]
            i = j


def from_sexpr(text: str, space: Space) -> LipschitzExpr:
    toks = list(_tokens(text))
    pos = 0

    def expr():
        nonlocal pos
        if toks[pos] != "(":
            raise ValueError(f"expected '(' at token {pos}")
        head = toks[pos + 1]
        pos += 2
        if head == "one":
            node = One()
        elif head == "hat":
            u, r, e = (toks[pos][1:-1], toks[pos + 1][1:-1], toks[pos + 2][1:-1])
            pos += 3
            node = Hat(space, space.decode(u), rat_from_str(r), rat_from_str(e))
        elif head in ("min", "max"):
            kids = []
            while toks[pos] != ")":
                kids.append(expr())
            node = (Min if head == "min" else Max)(tuple(kids))
        elif head == "lin":
            terms = []
            while toks[pos] != ")":
                c = rat_from_str(toks[pos][1:-1])
                pos += 1
                terms.append((c, expr()))
            node = LinComb(tuple(terms))
        else:
            raise ValueError(f"unknown head {head!r}")
        if toks[pos] != ")":
            raise ValueError(f"expected ')' at token {pos}")
        pos += 1
        return node

    try:
        f = expr()
    except IndexError as e:
        raise ValueError("truncated expression") from e
    if pos != len(toks):
        raise ValueError("trailing tokens after expression")
    return f


# ---------------------------------------------------------------- monotone approximation


@dataclass(frozen=True)
class BallSupremum:
    """``f = sup_i w_i 1_{B(u_i, r_i)}``; a term with ``radius=None`` is the whole space."""

    space: Space
    terms: Tuple[Tuple[Fraction, Any, Optional[Fraction]], ...]

    def value(self, x) -> Fraction:
        best = Fraction(0)
        for w, u, r in self.terms:
            if r is None or self.space.distance(x, u) < r:
                best = max(best, Fraction(w))
        return best


def monotone_approx(f: BallSupremum, n: int) -> LipschitzExpr:
    """Stage ``n`` of an increasing Lipschitz sequence with supremum ``f``.

    Term ``i <= n`` contributes ``w_i * Hat(u_i, r_i - 1/n, 1/n)``.
    """
    if n < 1:
        raise ValueError("stages start at 1")
    parts: List[LipschitzExpr] = []
    for w, u, r in f.terms[:n]:
        g = One() if r is None else Hat(f.space, u, Fraction(r) - Fraction(1, n), Fraction(1, n))
        parts.append(g if w == 1 else LinComb(((Fraction(w), g),)))
    if not parts:
        return LinComb(())
    return parts[0] if len(parts) == 1 else Max(tuple(parts))


# ---------------------------------------------------------------- cells


class CellBoundaryError(ValueError):
    """A separating function vanishes at the point, so it lies on a cell boundary."""


@dataclass(frozen=True)
class SeparatingSequence:
    """Sign functions ``b_1, b_2, ...``; ``sign(j, x)`` is exact.

    For the unit interval ``b_j(x) = -sin(2^j pi x)``, whose sign at rational
    ``x`` is read off ``2^j x mod 2``.  For bit sequences ``b_j(x) = x_j - 1/2``.
    """

    space: Space

    def sign(self, j: int, x) -> int:
        if j < 1:
            raise ValueError("separating functions are indexed from 1")
        if isinstance(self.space, UnitInterval):
            y = (Fraction(x) * 2 ** j) % 2
            if y == 0 or y == 1:
                return 0
            return -1 if y < 1 else 1
        if isinstance(self.space, BinarySequences):
            bit = x[j - 1] if j <= len(x) else "0"
            return 1 if bit == "1" else -1
        raise ValueError(f"no separating sequence shipped for {self.space.kind}")

    def cell_interval(self, s: str) -> Tuple[Fraction, Fraction]:
        """Unit interval only: the open interval ``(lo, hi)`` forming the cell."""
        if not isinstance(self.space, UnitInterval):
            raise ValueError("cell intervals exist for the unit interval only")
        k = int(s, 2) if s else 0
        return Fraction(k, 2 ** len(s)), Fraction(k + 1, 2 ** len(s))

    def cell_ball(self, s: str) -> Tuple[Fraction, Fraction]:
        """Unit interval only: ``(center, radius)`` of the open ball equal to the cell."""
        lo, hi = self.cell_interval(s)
        return (lo + hi) / 2, (hi - lo) / 2


def separating_sequence(space: Space) -> SeparatingSequence:
    return SeparatingSequence(space)


def cell_of(seq: SeparatingSequence, x, n: int) -> str:
    bits = []
    for j in range(1, n + 1):
        sg = seq.sign(j, x)
        if sg == 0:
            raise CellBoundaryError(f"b_{j} vanishes at {x!r}")
        bits.append("0" if sg < 0 else "1")
    return "".join(bits)
