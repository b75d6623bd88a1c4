"""Integration of bounded computable functions and cell measures.

A :class:`ComputableMeasure` answers ``integral(f, k)``: an interval of width
``<= 2**-k`` around ``mu f`` for a Lipschitz expression ``f``.  Shipped
measures: uniform on ``[a, b]`` (and finite mixtures of those), finite atoms,
Cauchy sequences of finite measures, and Bernoulli product measures on bit
sequences.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product as iproduct
from typing import Callable, Dict, List, Optional, Sequence, Tuple

from .measures import CauchyMeasure, FiniteRationalMeasure, integrate_discrete
from .numerics import DyadicInterval, ceil_log2, rat_to_str
from .spaces import (BinarySequences, CellBoundaryError, Hat, LinComb, LipschitzExpr, Max, Min,
                     One, SeparatingSequence, Space, UnitInterval, cell_of)

__all__ = [
    "ComputableMeasure",
    "UniformMeasure",
    "MixtureUniform",
    "AtomicMeasure",
    "CauchyComputable",
    "BernoulliSequenceMeasure",
    "IntegrationBudgetError",
    "NonRegularCutoff",
    "integrate",
    "integrate_expr",
    "RegularPartition",
    "regular_partition_measures",
    "cell_measure",
    "partition_csv",
    "clamp_expr",
]

MAX_STAGE = 2 ** 20


class IntegrationBudgetError(RuntimeError):
    def __init__(self, message: str, bracket: DyadicInterval):
        super().__init__(f"{message}; last bracket [{bracket.lo}, {bracket.hi}]")
        self.bracket = bracket


class NonRegularCutoff(IntegrationBudgetError):
    pass


class ComputableMeasure:
    space: Space

    def integral(self, f: LipschitzExpr, k: int) -> DyadicInterval:
        raise NotImplementedError

    def total(self) -> Fraction:
        return self.integral(One(), 0).lo

    def cell_mass(self, seq: SeparatingSequence, s: str) -> Optional[Fraction]:
        """Exact cell measure when a closed form is available, else ``None``."""
        return None

    def describe(self) -> str:
        return type(self).__name__


# ---------------------------------------------------------------- uniform on [a, b]


def _hat_kinks(h: Hat) -> Tuple[Fraction, ...]:
    u, r, e = Fraction(h.u), h.r, h.eps
    return (u, u - r, u + r, u - r - e, u + r + e)


def _affine_ends(f: LipschitzExpr, lo: Fraction, hi: Fraction):
    """``(f(lo), f(hi))`` if ``f`` is certified affine on ``[lo, hi]``, else ``None``."""
    if isinstance(f, One):
        return Fraction(1), Fraction(1)
    if isinstance(f, Hat):
        if any(lo < t < hi for t in _hat_kinks(f)):
            return None
        return f.value(lo), f.value(hi)
    if isinstance(f, LinComb):
        a = b = Fraction(0)
        for c, g in f.terms:
            ends = _affine_ends(g, lo, hi)
            if ends is None:
                return None
            a += c * ends[0]
            b += c * ends[1]
        return a, b
    if isinstance(f, (Min, Max)):
        pick = min if isinstance(f, Min) else max
        ends = []
        for g in f.children:
            e = _affine_ends(g, lo, hi)
            if e is None:
                return None
            ends.append(e)
        # the envelope is affine iff a single child is extremal at both ends
        best_lo = pick(e[0] for e in ends)
        best_hi = pick(e[1] for e in ends)
        for e in ends:
            if e[0] == best_lo and e[1] == best_hi:
                return best_lo, best_hi
        return None
    raise TypeError(f"cannot integrate {f!r} against a uniform measure")


def _uniform_integral(f: LipschitzExpr, a: Fraction, b: Fraction, k: int) -> DyadicInterval:
    """``int_a^b f`` (unnormalized) within ``2**-k * (b - a)``."""
    beta = f.lipschitz()
    flo, fhi = f.bounds()
    lo_sum = hi_sum = Fraction(0)
    tol = Fraction(1, 2 ** k)
    stack = [(a, b)]
    while stack:
        x0, x1 = stack.pop()
        w = x1 - x0
        ends = _affine_ends(f, x0, x1)
        if ends is not None:
            v = w * (ends[0] + ends[1]) / 2
            lo_sum += v
            hi_sum += v
            continue
        if beta * w / 2 <= tol:
            mid = (x0 + x1) / 2
            m = f.value(mid)
            spread = beta * w * w / 4
            lo_sum += max(m * w - spread, flo * w)
            hi_sum += min(m * w + spread, fhi * w)
            continue
        mid = (x0 + x1) / 2
        stack.append((mid, x1))
        stack.append((x0, mid))
    return DyadicInterval(lo_sum, hi_sum)


@dataclass(frozen=True)
class UniformMeasure(ComputableMeasure):
    """Uniform probability on ``[a, b]`` inside the unit interval."""

    a: Fraction = Fraction(0)
    b: Fraction = Fraction(1)
    space: Space = field(default=UnitInterval(), compare=False)

    def __post_init__(self):
        object.__setattr__(self, "a", Fraction(self.a))
        object.__setattr__(self, "b", Fraction(self.b))
        if not 0 <= self.a < self.b <= 1:
            raise ValueError("need 0 <= a < b <= 1")

    def integral(self, f, k):
        L = self.b - self.a
        iv = _uniform_integral(f, self.a, self.b, k)
        return DyadicInterval(iv.lo / L, iv.hi / L)

    def total(self):
        return Fraction(1)

    def interval_mass(self, lo: Fraction, hi: Fraction) -> Fraction:
        lo, hi = max(lo, self.a), min(hi, self.b)
        return max(Fraction(0), hi - lo) / (self.b - self.a)

    def cell_mass(self, seq, s):
        if not isinstance(seq.space, UnitInterval):
            return None
        return self.interval_mass(*seq.cell_interval(s))

    def describe(self):
        return f"uniform[{rat_to_str(self.a)},{rat_to_str(self.b)}]"


@dataclass(frozen=True)
class MixtureUniform(ComputableMeasure):
    """``sum_i w_i * uniform[a_i, b_i]`` (a piecewise-constant density)."""

    parts: Tuple[Tuple[Fraction, UniformMeasure], ...]
    space: Space = field(default=UnitInterval(), compare=False)

    def integral(self, f, k):
        W = sum((abs(w) for w, _ in self.parts), Fraction(0)) or Fraction(1)
        extra = ceil_log2(W + 1) + 1
        lo = hi = Fraction(0)
        for w, u in self.parts:
            iv = u.integral(f, k + extra)
            lo += w * iv.lo
            hi += w * iv.hi
        return DyadicInterval(lo, hi)

    def total(self):
        return sum((w for w, _ in self.parts), Fraction(0))

    def cell_mass(self, seq, s):
        vals = [u.cell_mass(seq, s) for _, u in self.parts]
        if any(v is None for v in vals):
            return None
        return sum((w * v for (w, _), v in zip(self.parts, vals)), Fraction(0))


@dataclass(frozen=True)
class AtomicMeasure(ComputableMeasure):
    measure: FiniteRationalMeasure

    @property
    def space(self):
        return self.measure.space

    def integral(self, f, k):
        return integrate_discrete(self.measure, f, k)

    def total(self):
        return self.measure.total

    def cell_mass(self, seq, s):
        tot = Fraction(0)
        for x, m in self.measure.atoms:
            try:
                if cell_of(seq, x, len(s)) == s:
                    tot += m
            except CellBoundaryError:
                pass
        return tot


@dataclass(frozen=True)
class CauchyComputable(ComputableMeasure):
    measure: CauchyMeasure

    @property
    def space(self):
        return self.measure.space

    def integral(self, f, k):
        return self.measure.integral(f, k)


@dataclass(frozen=True)
class BernoulliSequenceMeasure(ComputableMeasure):
    """Independent bits with ``P(x_i = 1) = p`` on the sequence space."""

    p: Fraction = Fraction(1, 2)
    max_depth: int = 14
    space: Space = field(default=BinarySequences(), compare=False)

    def __post_init__(self):
        object.__setattr__(self, "p", Fraction(self.p))
        if not 0 <= self.p <= 1:
            raise ValueError("bit probability outside [0, 1]")

    def cylinder(self, s: str) -> Fraction:
        ones = s.count("1")
        return self.p ** ones * (1 - self.p) ** (len(s) - ones)

    def cell_mass(self, seq, s):
        if not isinstance(seq.space, BinarySequences):
            return None
        return self.cylinder(s)

    def total(self):
        return Fraction(1)

    def integral(self, f, k):
        # on a depth-n cylinder f moves by at most beta * 2^-n
        beta = f.lipschitz()
        n = 0
        while beta * Fraction(2, 2 ** n) > Fraction(1, 2 ** k):
            n += 1
        if n > self.max_depth:
            raise IntegrationBudgetError(f"precision {k} needs cylinder depth {n}",
                                         DyadicInterval(*f.bounds()))
        spread = beta / 2 ** n
        lo = hi = Fraction(0)
        for v in range(1 << n):
            s = format(v, "0%db" % n) if n else ""
            w = self.cylinder(s)
            if w:
                m = f.value(s)
                lo += w * (m - spread)
                hi += w * (m + spread)
        return DyadicInterval(lo, hi)

    def condition_items(self, k: int):
        from .machine import text_bits
        return [text_bits("bernoulli"), format(self.p.numerator, "b"), format(self.p.denominator, "b")]

    def describe(self):
        return f"bernoulli({rat_to_str(self.p)})"


# ---------------------------------------------------------------- integrate


def integrate(mu: ComputableMeasure,
              lower: Callable[[int], LipschitzExpr],
              upper: Callable[[int], LipschitzExpr],
              eps) -> DyadicInterval:
    """Bracket ``mu f`` for ``f`` given by increasing minorants and decreasing majorants.

    Stage ``n`` runs through 1, 2, 4, ... and integrates both sequences to
    within ``1/n``; it stops once the bracket is narrower than ``eps``.
    """
    eps = Fraction(eps)
    n = 1
    last = None
    while n <= MAX_STAGE:
        k = ceil_log2(n)
        a_lo = mu.integral(lower(n), k).lo
        a_up = mu.integral(upper(n), k).hi
        last = DyadicInterval(min(a_lo, a_up), max(a_lo, a_up))
        if a_up - a_lo < eps:
            return last
        n *= 2
    raise IntegrationBudgetError("gap did not close below eps", last)


def integrate_expr(mu: ComputableMeasure, f: LipschitzExpr, eps) -> DyadicInterval:
    """``integrate`` with ``f`` itself as both constant sequences."""
    return integrate(mu, lambda n: f, lambda n: f, eps)


# ---------------------------------------------------------------- regular partitions


def clamp_expr(g: LipschitzExpr) -> LipschitzExpr:
    """``min(1, max(0, g))``."""
    return Min((One(), Max((LinComb(()), g))))


@dataclass(frozen=True)
class RegularPartition:
    """Cells ``{alpha_j < f < alpha_{j+1}}`` intersected over the generators.

    Cell ``(j_1, ..., j_m)`` picks interval ``j_i`` (0 .. len(cutoffs_i)) of
    generator ``i``; the extreme intervals are unbounded.
    """

    generators: Tuple[Tuple[LipschitzExpr, Tuple[Fraction, ...]], ...]

    def __post_init__(self):
        gens = []
        for f, cuts in self.generators:
            cuts = tuple(Fraction(c) for c in cuts)
            if any(cuts[i] >= cuts[i + 1] for i in range(len(cuts) - 1)):
                raise ValueError("cutoffs must be strictly increasing")
            gens.append((f, cuts))
        object.__setattr__(self, "generators", tuple(gens))

    def cells(self) -> List[Tuple[int, ...]]:
        return list(iproduct(*[range(len(c) + 1) for _, c in self.generators]))

    def minorant(self, cell: Tuple[int, ...], n: int) -> LipschitzExpr:
        parts = []
        for (f, cuts), j in zip(self.generators, cell):
            if j > 0:
                parts.append(clamp_expr(LinComb(((Fraction(n), f), (-n * cuts[j - 1], One())))))
            if j < len(cuts):
                parts.append(clamp_expr(LinComb(((-Fraction(n), f), (n * cuts[j], One())))))
        if not parts:
            return One()
        return parts[0] if len(parts) == 1 else Min(tuple(parts))


def regular_partition_measures(p: RegularPartition, mu: ComputableMeasure, eps
                               ) -> Dict[Tuple[int, ...], DyadicInterval]:
    """Bracket every cell measure within ``eps``.

    Lower brackets integrate clamp minorants of the cell indicator; upper
    brackets are the total mass minus the other cells' lower brackets.
    """
    eps = Fraction(eps)
    cells = p.cells()
    R = mu.total()
    extra = ceil_log2(len(cells) + 1) + 2
    n = 1
    result = None
    while n <= MAX_STAGE:
        k = ceil_log2(n) + extra
        lows = {c: max(Fraction(0), mu.integral(p.minorant(c, n), k).lo) for c in cells}
        tot = sum(lows.values(), Fraction(0))
        result = {c: DyadicInterval(lows[c], max(lows[c], R - (tot - lows[c]))) for c in cells}
        if all(iv.width <= eps for iv in result.values()):
            return result
        n *= 2
    worst = max(result.values(), key=lambda iv: iv.width)
    raise NonRegularCutoff("cell brackets did not close (cutoff not regular?)", worst)


def cell_measure(seq: SeparatingSequence, mu: ComputableMeasure, s: str, eps,
                 use_closed_form: bool = True, max_stage: int = 2 ** 12) -> DyadicInterval:
    """Bracket ``mu(Gamma_s)``.

    With a closed form the answer is exact.  Otherwise the lower end
    integrates hat minorants of the cell (an open ball on the unit interval)
    and the upper end is ``R - sum of lower ends of the sibling cells at the
    same depth``.
    """
    eps = Fraction(eps)
    if not s:
        R = mu.total()
        return DyadicInterval(R, R)
    if use_closed_form:
        v = mu.cell_mass(seq, s)
        if v is not None:
            return DyadicInterval(v, v)
    if not isinstance(seq.space, UnitInterval):
        raise ValueError("generic cell brackets need the unit interval")
    R = mu.total()
    depth = len(s)
    others = [format(v, "0%db" % depth) for v in range(1 << depth)]
    n = 2 ** (depth + 1)
    bracket = DyadicInterval(Fraction(0), R)
    while n <= max_stage:
        k = ceil_log2(n) + depth + 2

        def low(t):
            c, rad = seq.cell_ball(t)
            h = Hat(seq.space, c, rad - Fraction(1, n), Fraction(1, n))
            return max(Fraction(0), mu.integral(h, k).lo)

        lows = {t: low(t) for t in others}
        lo = lows[s]
        hi = R - sum((v for t, v in lows.items() if t != s), Fraction(0))
        bracket = DyadicInterval(lo, max(lo, hi))
        if bracket.width <= eps:
            break
        n *= 2
    return bracket


def partition_csv(brackets: Dict, label: Callable = None) -> str:
    label = label or (lambda c: ".".join(str(j) for j in c) if isinstance(c, tuple) else str(c))
    lines = ["cell,lower,upper"]
    for c in sorted(brackets):
        iv = brackets[c]
        lines.append(f"{label(c)},{rat_to_str(iv.lo)},{rat_to_str(iv.hi)}")
    return "\n".join(lines) + "\n"
