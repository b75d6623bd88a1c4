"""Relative entropy, budgeted mutual information and addition monitors.

``relative_entropy(mu, nu)`` is ``-sum_x mu(x) log2(mu(x)/nu(x))``: nonpositive
for probability pairs and equal to the Shannon entropy against the counting
measure.  Complexity quantities are budgeted upper bounds from the machine
module, so only inequalities that stay valid under over-estimation are
asserted.
"""
from __future__ import annotations

import hashlib
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from math import inf
from typing import Any, Dict, List, Optional, Sequence, Tuple

from .machine import (Budget, MACHINE_CONSTANTS, encode_measure_condition, enumerate_halting,
                      int_to_str, make_tape, pair)
from .measures import FiniteRationalMeasure, MeasureError
from .numerics import DyadicInterval, ceil_log2, log2_interval, log2_lower, log2_upper

__all__ = [
    "COUNTING",
    "EntropyReport",
    "relative_entropy",
    "divergence",
    "KullbackCheck",
    "kullback_bound_check",
    "EntropyComplexityReport",
    "entropy_vs_avg_complexity",
    "MutualInformation",
    "mutual_information_budgeted",
    "mutual_information_relative",
    "AdditionReport",
    "addition_monitor",
    "addition_sweep",
    "algorithmic_entropy_discrete",
    "phase_space_check",
]

DEFAULT_BUDGET = Budget(24, 100_000)


class _Counting:
    """Tag for the counting measure ``#``."""

    def __repr__(self):
        return "COUNTING"


COUNTING = _Counting()


def _digest(*ms) -> str:
    h = hashlib.sha256()
    for m in ms:
        h.update(b"#" if m is COUNTING else m.dumps().encode())
        h.update(b"|")
    return h.hexdigest()[:12]


@dataclass(frozen=True)
class EntropyReport:
    value: Optional[DyadicInterval]  # None encodes minus infinity
    inputs: str

    @property
    def is_neg_inf(self) -> bool:
        return self.value is None


def relative_entropy(mu: FiniteRationalMeasure, nu, k: int = 20) -> EntropyReport:
    """Interval of width ``<= 2**-k`` around ``-sum mu(x) log2(mu(x)/nu(x))``."""
    counting = nu is COUNTING
    if not counting and mu.space != nu.space:
        raise MeasureError("measures live on different spaces")
    ref = None if counting else nu.as_dict()
    extra = ceil_log2(len(mu.atoms) + 1) + ceil_log2(mu.total + 1) + 1
    lo = hi = Fraction(0)
    for x, m in mu.atoms:
        v = Fraction(1) if counting else ref.get(x, Fraction(0))
        if v == 0:
            return EntropyReport(None, _digest(mu, nu))
        iv = log2_interval(m / v, k + extra)
        lo -= m * iv.hi
        hi -= m * iv.lo
    return EntropyReport(DyadicInterval(lo, hi), _digest(mu, nu))


def divergence(mu: FiniteRationalMeasure, nu: FiniteRationalMeasure, k: int = 20) -> Optional[DyadicInterval]:
    """``D(mu || nu) = -relative_entropy(mu, nu)``; ``None`` means plus infinity."""
    r = relative_entropy(mu, nu, k)
    return None if r.value is None else -r.value


@dataclass(frozen=True)
class KullbackCheck:
    holds: bool
    margin: Any  # certified lower bound on rhs - lhs (inf when lhs is minus infinity)
    lhs: Optional[DyadicInterval]
    rhs: DyadicInterval


def kullback_bound_check(mu: FiniteRationalMeasure, nu: FiniteRationalMeasure, k: int = 20) -> KullbackCheck:
    """Check ``H_nu(mu) <= -mu(X) log2(mu(X)/nu(X))`` with interval error."""
    lhs = relative_entropy(mu, nu, k).value
    M, N = mu.total, nu.total
    if M == 0:
        rhs = DyadicInterval(Fraction(0), Fraction(0))
    else:
        iv = log2_interval(M / N, k + ceil_log2(M + 1))
        rhs = DyadicInterval(-M * iv.hi, -M * iv.lo)
    if lhs is None:
        return KullbackCheck(True, inf, None, rhs)
    margin = rhs.lo - lhs.hi
    return KullbackCheck(margin >= -2 * Fraction(1, 2 ** k), margin, lhs, rhs)


@dataclass(frozen=True)
class EntropyComplexityReport:
    entropy: DyadicInterval
    avg_complexity: Any  # Fraction or inf
    slack: Fraction
    holds: bool


def entropy_vs_avg_complexity(mu: FiniteRationalMeasure, budget: Budget = DEFAULT_BUDGET,
                              c: Fraction = Fraction(0), k: int = 20, cond_k: int = 16,
                              threads: int = 1) -> EntropyComplexityReport:
    """Check ``H(mu) <= sum_x mu(x) H_t(x | mu) + c`` using the certified upper end of ``H(mu)``."""
    if not mu.normalized:
        raise MeasureError("needs a probability measure")
    H = relative_entropy(mu, COUNTING, k).value
    table = enumerate_halting(budget, encode_measure_condition(mu, cond_k), threads)
    avg = Fraction(0)
    for x, m in mu.atoms:
        h = table.H(x)
        if h == inf:
            avg = inf
            break
        avg += m * h
    holds = avg == inf or H.hi <= avg + c
    return EntropyComplexityReport(H, avg, Fraction(c), holds)


@dataclass(frozen=True)
class MutualInformation:
    value: int  # 0 when undefined
    defined: bool
    H_x: Any
    H_y: Any
    H_xy: Any
    budget: Budget


def _mi(tx, x, y) -> MutualInformation:
    hx, hy, hxy = tx.H(x), tx.H(y), tx.H(pair(x, y))
    if inf in (hx, hy, hxy):
        return MutualInformation(0, False, hx, hy, hxy, tx.budget)
    return MutualInformation(hx + hy - hxy, True, hx, hy, hxy, tx.budget)


def mutual_information_budgeted(x: str, y: str, budget: Budget = DEFAULT_BUDGET) -> MutualInformation:
    """``H_t(x) + H_t(y) - H_t(x, y)``; may be negative at small budgets."""
    return _mi(enumerate_halting(budget), x, y)


def mutual_information_relative(x: str, y: str, mu, nu, budget: Budget = DEFAULT_BUDGET,
                                cond_k: int = 16) -> MutualInformation:
    """The same difference with every term conditioned on the pair of measures."""
    tape = encode_measure_condition(mu, cond_k) + encode_measure_condition(nu, cond_k)
    return _mi(enumerate_halting(budget, tape), x, y)


@dataclass(frozen=True)
class AdditionReport:
    x: str
    y: str
    H_xy: Any
    H_x: Any
    H_y_given: Any  # H_t(y | x, H_t(x))
    c: int
    holds: bool  # H_xy <= H_x + H_y_given + c
    needed_c: Any  # smallest constant that would make the bound hold
    reverse_gap: Any  # H_x + H_y_given - H_xy, reported only


def addition_monitor(x: str, y: str, budget: Budget = DEFAULT_BUDGET,
                     c: int = MACHINE_CONSTANTS["c_addition"], threads: int = 1) -> AdditionReport:
    free = enumerate_halting(budget)
    hx = free.H(x)
    hxy = free.H(pair(x, y))
    if hx == inf:
        return AdditionReport(x, y, hxy, hx, inf, c, True, -inf, None)
    cond = make_tape([x, format(hx, "b")])
    hy = enumerate_halting(budget, cond, threads).H(y)
    rhs = hx + hy
    needed = hxy - rhs if hxy != inf else inf
    if rhs == inf:
        needed = -inf
    holds = hxy <= rhs + c
    reverse = None if inf in (rhs, hxy) else rhs - hxy
    return AdditionReport(x, y, hxy, hx, hy, c, holds, needed, reverse)


def addition_sweep(nbits: int = 6, budget: Budget = DEFAULT_BUDGET,
                   c: int = MACHINE_CONSTANTS["c_addition"], threads: int = 1
                   ) -> Tuple[List[AdditionReport], Any]:
    """Run the monitor on every pair of ``nbits``-bit strings; also return the global constant needed."""
    xs = [format(v, "0%db" % nbits) if nbits else "" for v in range(1 << nbits)]
    enumerate_halting(budget)

    def row(x):
        return [addition_monitor(x, y, budget, c) for y in xs]

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            blocks = list(pool.map(row, xs))
    else:
        blocks = [row(x) for x in xs]
    reports = [r for b in blocks for r in b]
    needed = max(r.needed_c for r in reports)
    return reports, needed


def addition_csv(reports: Sequence[AdditionReport], budget: Budget) -> str:
    free = enumerate_halting(budget)
    lines = ["x,y,H_t(x),H_t(y),H_t(x;y),joint_bound_margin"]
    for r in reports:
        margin = (r.H_x + r.H_y_given + r.c - r.H_xy) if inf not in (r.H_x, r.H_y_given, r.H_xy) else "inf"
        lines.append(f"{r.x},{r.y},{r.H_x},{free.H(r.y)},{r.H_xy},{margin}")
    return "\n".join(lines) + "\n"


def algorithmic_entropy_discrete(x: str, mu, budget: Budget = DEFAULT_BUDGET, k: int = 20,
                                 cond_k: int = 16):
    """Upper estimate ``H_t(x | mu) + log2 mu(x)``; plain ``H_t(x)`` for the counting measure."""
    if mu is COUNTING:
        return enumerate_halting(budget).H(x)
    m = mu.mass(x)
    if m == 0:
        raise MeasureError(f"{x!r} is outside the support")
    h = enumerate_halting(budget, encode_measure_condition(mu, cond_k)).H(x)
    return inf if h == inf else h + log2_upper(m, k)


def _zigzag(n: int) -> int:
    return 2 * n if n >= 0 else -2 * n - 1


@dataclass(frozen=True)
class PhaseSpaceReport:
    max_entropy: Any  # max over the support of the upper estimate
    bound: Fraction  # log2 mu(X) (upper) + H_t(floor log2 mu(X))
    needed_c: Any  # smallest constant making the bound hold on the support


def phase_space_check(mu: FiniteRationalMeasure, budget: Budget = DEFAULT_BUDGET, k: int = 20,
                      cond_k: int = 16) -> PhaseSpaceReport:
    """Compare ``H_mu(x)`` estimates with ``log mu(X) + H(floor(log mu(X)))``."""
    M = mu.total
    fl = log2_lower(M, 0)  # floor(log2 M)
    hfl = enumerate_halting(budget).H(int_to_str(_zigzag(int(fl))))
    bound = log2_upper(M, k) + hfl
    best = max(algorithmic_entropy_discrete(x, mu, budget, k, cond_k) for x in mu.support)
    return PhaseSpaceReport(best, bound, best - bound)
