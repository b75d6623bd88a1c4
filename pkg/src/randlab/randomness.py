"""Uniform tests: trimming, deficiency estimators, conservation, counterexamples.

Trimming on a finite space decides ``sup_mu sum_x mu(x) h(mu, x) <= 1`` over
all probability vectors ``mu``.  Here ``h(mu, x) = max_i r_i 1_{U_i}(mu) 1_{V_i}(x)``
with each ``U_i`` either everything or an open Prokhorov ball, which on a
finite space is an intersection of strict linear inequalities in ``mu``.

Because ``h`` only grows with the set ``T`` of balls containing ``mu``, the
supremum equals the maximum over ``T`` of ``sup { G_T(mu) : mu in every U_i, i in T }``
where ``G_T(mu) = sum_x mu(x) max_{i in T} r_i 1_{V_i}(x)`` is linear.  For
each ``T`` one exact LP decides whether the open region is nonempty (maximise a
common slack) and a second one maximises ``G_T`` over its closure.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from math import inf
from typing import Any, Callable, Dict, FrozenSet, Iterable, List, Optional, Sequence, Tuple

from .lp import linprog_exact
from .machine import (Budget, ComplexityTable, encode_measure_condition, enumerate_halting,
                      int_to_str, pair)
from .measures import (DiscreteKernel, FiniteRationalMeasure, MeasureError, prokhorov_ball_contains,
                       pushforward)
from .numerics import log2_lower, log2_upper, rat_from_str, rat_to_str
from .spaces import DiscreteStrings, Naturals, Product, Space

__all__ = [
    "CapacityExceeded",
    "FiniteSpace",
    "Term",
    "TestApproximant",
    "TrimResult",
    "sup_functional",
    "test_trim",
    "WeightedTestSum",
    "universal_test_finite",
    "DeficiencyEstimate",
    "NEG_INF",
    "deficiency_discrete",
    "discrete_test_values",
    "deficiency_sequence",
    "sequence_test_value",
    "sequence_expectation",
    "no_neutral_test",
    "NotATestError",
    "ConservationCertificate",
    "conservation_pullback",
    "CounterexampleRow",
    "counterexample_measure",
    "NotInJ",
    "NeutralityProbe",
    "neutrality_probe",
    "neutrality_g",
]

MAX_FINITE_POINTS = 12
NEG_INF = -inf


class CapacityExceeded(RuntimeError):
    pass


# ---------------------------------------------------------------- finite spaces and approximants


@dataclass(frozen=True)
class FiniteSpace:
    space: Space
    points: Tuple[Any, ...]

    def __post_init__(self):
        pts = tuple(self.points)
        if len(set(pts)) != len(pts):
            raise ValueError("repeated points")
        if len(pts) > MAX_FINITE_POINTS:
            raise CapacityExceeded(f"{len(pts)} points exceed the cap of {MAX_FINITE_POINTS}")
        if not pts:
            raise ValueError("empty finite space")
        object.__setattr__(self, "points", pts)

    def index(self, x) -> int:
        return self.points.index(x)

    def measure(self, vec: Sequence[Fraction]) -> FiniteRationalMeasure:
        return FiniteRationalMeasure.from_pairs(self.space, zip(self.points, vec))


@dataclass(frozen=True)
class Term:
    """``r * 1_U(mu) * 1_V(x)``; ``center=None`` makes ``U`` every measure."""

    V: FrozenSet[Any]
    r: Fraction
    center: Optional[FiniteRationalMeasure] = None
    radius: Optional[Fraction] = None

    def __post_init__(self):
        object.__setattr__(self, "V", frozenset(self.V))
        object.__setattr__(self, "r", Fraction(self.r))
        if self.r <= 0:
            raise ValueError("term weights must be positive")
        if self.center is not None:
            if self.radius is None or Fraction(self.radius) <= 0:
                raise ValueError("a ball needs a positive radius")
            object.__setattr__(self, "radius", Fraction(self.radius))

    def in_U(self, mu: FiniteRationalMeasure) -> bool:
        return self.center is None or prokhorov_ball_contains(self.center, self.radius, mu)

    def to_json(self, space: Space) -> dict:
        return {
            "U": None if self.center is None else {"center": self.center.to_json(),
                                                    "radius": rat_to_str(self.radius)},
            "V": sorted(space.encode(x) for x in self.V),
            "r": rat_to_str(self.r),
        }

    @classmethod
    def from_json(cls, d: dict, space: Space) -> "Term":
        U = d.get("U")
        center = radius = None
        if U is not None:
            center = FiniteRationalMeasure.from_json(U["center"])
            radius = rat_from_str(U["radius"])
        return cls(frozenset(space.decode(v) for v in d["V"]), rat_from_str(d["r"]), center, radius)


@dataclass(frozen=True)
class TestApproximant:
    __test__ = False  # not a pytest class
    terms: Tuple[Term, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "terms", tuple(self.terms))

    def value(self, mu: FiniteRationalMeasure, x) -> Fraction:
        best = Fraction(0)
        for t in self.terms:
            if x in t.V and t.r > best and t.in_U(mu):
                best = t.r
        return best

    def expectation(self, mu: FiniteRationalMeasure) -> Fraction:
        return sum((m * self.value(mu, x) for x, m in mu.atoms), Fraction(0))

    def prefix(self, n: int) -> "TestApproximant":
        return TestApproximant(self.terms[:n])

    def to_json(self, space: Space) -> dict:
        return {"terms": [t.to_json(space) for t in self.terms]}

    @classmethod
    def from_json(cls, d: dict, space: Space) -> "TestApproximant":
        return cls(tuple(Term.from_json(t, space) for t in d["terms"]))


def _ball_rows(fs: FiniteSpace, t: Term) -> List[Tuple[Tuple[int, ...], Fraction]]:
    """Strict constraints ``mu(A^eps) > c`` defining the ball, as (index set, c)."""
    sigma, eps = t.center, t.radius
    if sigma.space != fs.space:
        raise MeasureError("ball center lives on another space")
    S = sigma.atoms
    d = fs.space.distance
    near = [frozenset(j for j, y in enumerate(fs.points) if d(x, y) < eps) for x, _ in S]
    rows: Dict[Tuple[int, ...], Fraction] = {}
    for mask in range(1, 1 << len(S)):
        c = -eps
        nb = set()
        for i in range(len(S)):
            if mask >> i & 1:
                c += S[i][1]
                nb |= near[i]
        if c < 0:
            continue  # automatically satisfied
        key = tuple(sorted(nb))
        if key not in rows or rows[key] < c:
            rows[key] = c
    return sorted(rows.items())


def _region_nonempty(n: int, rows) -> bool:
    if not rows:
        return True
    # variables mu_0..mu_{n-1}, t; maximise t subject to mu(A) - t >= c
    A_ub, b_ub = [], []
    for idx, c in rows:
        a = [Fraction(0)] * (n + 1)
        for j in idx:
            a[j] = Fraction(-1)
        a[n] = Fraction(1)
        A_ub.append(a)
        b_ub.append(-c)
    A_ub.append([Fraction(0)] * n + [Fraction(1)])
    b_ub.append(Fraction(1))
    res = linprog_exact([0] * n + [1], A_ub, b_ub, [[1] * n + [0]], [1])
    return res.status == "optimal" and res.value > 0


def _region_max(n: int, rows, coef: Sequence[Fraction]):
    A_ub, b_ub = [], []
    for idx, c in rows:
        a = [Fraction(0)] * n
        for j in idx:
            a[j] = Fraction(-1)
        A_ub.append(a)
        b_ub.append(-c)
    res = linprog_exact(list(coef), A_ub, b_ub, [[1] * n], [1])
    if res.status != "optimal":
        raise ArithmeticError("closure LP failed on a nonempty region")
    return res.value, res.x


@dataclass
class SupResult:
    value: Fraction
    witness: Optional[Tuple[Fraction, ...]]
    active: Tuple[int, ...]
    regions: int


def sup_functional(groups: Sequence[Tuple[Fraction, TestApproximant]], fs: FiniteSpace) -> SupResult:
    """``sup_mu sum_g w_g sum_x mu(x) h_g(mu, x)`` over probability vectors on ``fs``.

    The witness is a maximiser in the closure of the optimal region.
    """
    n = len(fs.points)
    flat: List[Tuple[int, Term]] = [(g, t) for g, (_, h) in enumerate(groups) for t in h.terms]
    for _, t in flat:
        if not t.V <= set(fs.points):
            raise ValueError("term point set leaves the finite space")
    always = [i for i, (_, t) in enumerate(flat) if t.center is None]
    balls = [i for i, (_, t) in enumerate(flat) if t.center is not None]
    rows_of = {i: _ball_rows(fs, flat[i][1]) for i in balls}

    def coef(active: Sequence[int]):
        c = [Fraction(0)] * n
        for g, (w, _) in enumerate(groups):
            best = [Fraction(0)] * n
            for i in active:
                gi, t = flat[i]
                if gi != g:
                    continue
                for x in t.V:
                    j = fs.index(x)
                    if t.r > best[j]:
                        best[j] = t.r
            for j in range(n):
                c[j] += Fraction(w) * best[j]
        return c

    best = SupResult(Fraction(0), None, (), 0)
    found = False
    # depth-first over subsets of balls; an empty region prunes all supersets
    stack: List[Tuple[int, Tuple[int, ...], list]] = [(0, (), [])]
    while stack:
        pos, chosen, rows = stack.pop()
        if pos == len(balls):
            active = tuple(sorted(always + list(chosen)))
            val, x = _region_max(n, rows, coef(active))
            best.regions += 1
            if not found or val > best.value:
                best.value, best.witness, best.active = val, x, active
                found = True
            continue
        i = balls[pos]
        stack.append((pos + 1, chosen, rows))
        new_rows = rows + rows_of[i]
        if _region_nonempty(n, new_rows):
            stack.append((pos + 1, chosen + (i,), new_rows))
    return best


@dataclass
class TrimResult:
    trimmed: TestApproximant
    accepted_prefix: int
    checks: List[dict]

    def certificate(self, fs: FiniteSpace) -> dict:
        return {"accepted_prefix": self.accepted_prefix, "checks": self.checks,
                "space": fs.space.to_json(), "points": [fs.space.encode(x) for x in fs.points]}

    def certificate_json(self, fs: FiniteSpace) -> str:
        return json.dumps(self.certificate(fs), sort_keys=True)


def test_trim(h: TestApproximant, fs: FiniteSpace, full: bool = False) -> TrimResult:
    """Longest prefix of ``h`` whose expectation is ``<= 1`` under every measure.

    Prefixes are examined in order; a rejected prefix keeps the previous
    accepted one.  Since a longer prefix only raises ``h``, later prefixes are
    rejected too and are skipped unless ``full`` asks to check them.
    """
    current = 0
    checks = []
    for n in range(1, len(h.terms) + 1):
        sr = sup_functional([(Fraction(1), h.prefix(n))], fs)
        ok = sr.value <= 1
        checks.append({
            "prefix": n,
            "sup": rat_to_str(sr.value),
            "accepted": ok,
            "witness": None if sr.witness is None else [rat_to_str(v) for v in sr.witness],
        })
        if ok and current == n - 1:
            current = n
        elif not full:
            break
    return TrimResult(h.prefix(current), current, checks)


test_trim.__test__ = False  # not a pytest test


@dataclass(frozen=True)
class WeightedTestSum:
    """``t(mu, x) = sum_u w_u h_u(mu, x)``."""

    parts: Tuple[Tuple[Fraction, TestApproximant], ...] = ()

    def value(self, mu: FiniteRationalMeasure, x) -> Fraction:
        return sum((w * h.value(mu, x) for w, h in self.parts), Fraction(0))

    def expectation(self, mu: FiniteRationalMeasure) -> Fraction:
        return sum((w * h.expectation(mu) for w, h in self.parts), Fraction(0))

    def sup(self, fs: FiniteSpace) -> SupResult:
        return sup_functional(list(self.parts), fs)


def universal_test_finite(candidates: Iterable[TestApproximant], fs: FiniteSpace,
                          budget: Optional[int] = None) -> WeightedTestSum:
    """``sum_u 2^(-u-1) trim(g_u)`` over the first ``budget`` candidates."""
    parts = []
    for u, g in enumerate(candidates):
        if budget is not None and u >= budget:
            break
        parts.append((Fraction(1, 2 ** (u + 1)), test_trim(g, fs).trimmed))
    return WeightedTestSum(tuple(parts))


# ---------------------------------------------------------------- deficiency estimators


@dataclass(frozen=True)
class DeficiencyEstimate:
    lower_bound: Any  # Fraction, or NEG_INF when no program was found
    budget: Budget
    witness: dict = field(compare=False, default_factory=dict)


DEFAULT_BUDGET = Budget(24, 100_000)
DEFAULT_COND_K = 16


def _cond_table(mu, budget: Budget, cond_k: int, threads: int = 1) -> ComplexityTable:
    return enumerate_halting(budget, encode_measure_condition(mu, cond_k), threads)


def deficiency_discrete(x: str, mu: FiniteRationalMeasure, budget: Budget = DEFAULT_BUDGET,
                        k: int = 20, cond_k: int = DEFAULT_COND_K) -> DeficiencyEstimate:
    """``-log2 mu(x) - H_t(x | mu)``, certified from below."""
    if not isinstance(mu.space, DiscreteStrings):
        raise MeasureError("discrete deficiency needs a measure on strings")
    m = mu.mass(x)
    if m == 0:
        raise MeasureError(f"{x!r} is outside the support")
    table = _cond_table(mu, budget, cond_k)
    H = table.H(x)
    neglog = -log2_upper(m, k)
    lb = NEG_INF if H == inf else neglog - H
    return DeficiencyEstimate(lb, budget, {"H_t": H, "neg_log_mu_lower": neglog, "cond": table.condition_id})


def discrete_test_values(mu: FiniteRationalMeasure, budget: Budget = DEFAULT_BUDGET,
                         cond_k: int = DEFAULT_COND_K) -> Dict[str, Fraction]:
    """The test ``t(x) = m_t(x | mu) / mu(x)`` on the support; its mean is ``<= 1``."""
    table = _cond_table(mu, budget, cond_k)
    return {x: table.m(x) / m for x, m in mu.atoms}


def _cylinder(mu, s: str) -> Fraction:
    if hasattr(mu, "cylinder"):
        return mu.cylinder(s)
    raise TypeError("sequence measures must provide cylinder masses")


def deficiency_sequence(prefix: str, mu, budget: Budget = DEFAULT_BUDGET, k: int = 20,
                        cond_k: int = DEFAULT_COND_K) -> DeficiencyEstimate:
    """``max_{n <= |prefix|} (-log2 mu(x^{<=n}) - H_t(x^{<=n} | mu))``."""
    table = _cond_table(mu, budget, cond_k)
    best, arg = NEG_INF, None
    for n in range(len(prefix) + 1):
        s = prefix[:n]
        w = _cylinder(mu, s)
        if w == 0:
            raise MeasureError(f"cylinder {s!r} has probability zero")
        H = table.H(s)
        if H == inf:
            continue
        v = -log2_upper(w, k) - H
        if v > best:
            best, arg = v, n
    return DeficiencyEstimate(best, budget, {"n": arg, "cond": table.condition_id})


def sequence_test_value(prefix: str, mu, budget: Budget = DEFAULT_BUDGET,
                        cond_k: int = DEFAULT_COND_K) -> Fraction:
    """``sum_{1 <= n <= |prefix|} m_t(x^{<=n} | mu) / mu(x^{<=n})``."""
    if budget.max_len == 0:
        return Fraction(0)
    table = _cond_table(mu, budget, cond_k)
    tot = Fraction(0)
    for n in range(1, len(prefix) + 1):
        s = prefix[:n]
        w = _cylinder(mu, s)
        if w == 0:
            raise MeasureError(f"cylinder {s!r} has probability zero")
        tot += table.m(s) / w
    return tot


def sequence_expectation(n: int, mu, budget: Budget = DEFAULT_BUDGET,
                         cond_k: int = DEFAULT_COND_K) -> Fraction:
    """Exact mean of :func:`sequence_test_value` over all length-``n`` prefixes."""
    tot = Fraction(0)
    for v in range(1 << n):
        s = format(v, "0%db" % n) if n else ""
        w = _cylinder(mu, s)
        if w:
            tot += w * sequence_test_value(s, mu, budget, cond_k)
    return tot


# ---------------------------------------------------------------- no neutral measure on N


def no_neutral_test(x: int, mu: FiniteRationalMeasure):
    """``sup {k : sum_{y<x} mu(y) > 1 - 2^-k}`` (0 for the empty set, ``inf`` at full mass)."""
    if not mu.normalized:
        raise MeasureError("needs a probability measure")
    S = mu.measure_of(lambda y: y < x)
    D = 1 - S
    if D == 0:
        return inf
    k = 0
    while Fraction(1, 2 ** (k + 1)) > D:
        k += 1
    return k if Fraction(1, 2 ** k) > D else 0


# ---------------------------------------------------------------- conservation


class NotATestError(ValueError):
    def __init__(self, excess: Fraction):
        super().__init__(f"not a test for the pushforward: expectation exceeds 1 by {excess}")
        self.excess = excess


@dataclass(frozen=True)
class ConservationCertificate:
    mu_u: Fraction  # mu^x u(x)
    pushed_f: Fraction  # (Lambda* mu) f
    verified: bool


def conservation_pullback(kernel: DiscreteKernel, f, mu: FiniteRationalMeasure):
    """Pull a test on the target back through the kernel: ``u(x) = sum_y lambda_x(y) f(y)``.

    ``f`` is a callable or a dict (missing points count as 0).  Returns ``u``
    on the kernel domain and the certificate ``mu u == (Lambda* mu) f <= 1``.
    """
    g = (lambda y: Fraction(f.get(y, 0))) if isinstance(f, dict) else (lambda y: Fraction(f(y)))
    nu = pushforward(kernel, mu)
    nf = sum((m * g(y) for y, m in nu.atoms), Fraction(0))
    if nf > 1:
        raise NotATestError(nf - 1)
    pull = kernel.apply(g)
    u = {x: pull(x) for x in kernel.domain}
    mu_u = sum((m * u[x] for x, m in mu.atoms), Fraction(0))
    return u, ConservationCertificate(mu_u, nf, mu_u == nf and mu_u <= 1)


# ---------------------------------------------------------------- counterexample


@dataclass(frozen=True)
class CounterexampleRow:
    n: int
    x: str
    y: str
    neg_log_mu: int
    H_t: Any  # int or inf, always > n
    m_t_n: Fraction
    test_value: Fraction  # 2^n m_t(n)

    @property
    def margin(self):
        """``-log mu(x_n, y_n) - H_t(x_n, y_n)``: never positive by construction."""
        return self.neg_log_mu - self.H_t


def counterexample_measure(n_max: int, budget: Budget = DEFAULT_BUDGET):
    """Measure on pairs whose atoms look random to complexity but fail a dedicated test.

    ``x_n = 0^n`` and ``y_n`` is the first length-``n`` string such that no
    program of length ``<= n`` prints the pair within the budget (a
    budget-relative certificate of ``H_t(x_n, y_n) > n``).  The atom masses
    are ``2^-n`` and a sink atom carries the remaining ``2^-n_max``.  The test
    ``t(x_n, y) = m_t(n) / sum_z mu(x_n, z) = 2^n m_t(n)`` has mean ``sum m_t(n) < 1``.
    """
    if not 1 <= n_max <= 16:
        raise ValueError("n_max must lie in 1..16")
    if budget.max_len < n_max:
        raise ValueError("budget must cover programs of length n_max")
    table = enumerate_halting(budget)
    rows = []
    atoms = []
    for n in range(1, n_max + 1):
        x = "0" * n
        y = None
        for v in range(1 << n):
            cand = format(v, "0%db" % n)
            if table.H(pair(x, cand)) > n:
                y = cand
                break
        if y is None:
            raise RuntimeError(f"no y of length {n} escapes all programs of length <= {n}")
        mt = table.m(int_to_str(n))
        rows.append(CounterexampleRow(n, x, y, n, table.H(pair(x, y)), mt, mt * 2 ** n))
        atoms.append(((x, y), Fraction(1, 2 ** n)))
    atoms.append((("1", ""), Fraction(1, 2 ** n_max)))
    mu = FiniteRationalMeasure(Product((DiscreteStrings(), DiscreteStrings())), tuple(atoms))
    return mu, rows


def counterexample_test(rows: Sequence[CounterexampleRow]) -> Callable:
    by_x = {r.x: r.test_value for r in rows}
    return lambda point: by_x.get(point[0], Fraction(0))


# ---------------------------------------------------------------- no neutral measure on compactified N


class NotInJ(ValueError):
    pass


@dataclass(frozen=True)
class NeutralityProbe:
    n: int
    k: int
    j: int
    x: int
    f_values: Tuple[Fraction, ...]  # f_mu(x_{n,k}, n, k) per supplied mu
    normalizations: Tuple[Fraction, ...]  # sum_y mu(y) f_mu(y, n, k), each < 1


def _block_mass(nu: Dict[int, Fraction], n: int) -> Fraction:
    return sum((v for y, v in nu.items() if y < 2 ** n), Fraction(0))


def neutrality_probe(nu_stages: Callable[[int], Dict[int, Fraction]], n: int, k: int,
                     max_stage: int = 64, mus: Sequence[Dict[int, Fraction]] = ()) -> NeutralityProbe:
    """Evaluate ``j(n,k)``, ``x_{n,k}`` and ``f_mu(x, n, k)`` for the supplied measures.

    ``nu_stages(i)`` is the ``i``-th stage of an increasing sequence of
    rational semimeasures on the naturals, as a dict.  ``f_mu(x, n, k)`` is
    ``2^(n-2)`` when ``k 2^-n < mu({0..2^n-1}) < (k+2) 2^-n``,
    ``mu(x) < 2^(-n+2)`` and ``x = x_{n,k}``; otherwise 0.
    """
    if n < 1 or not 0 <= k <= 2 ** n - 2:
        raise ValueError("need n >= 1 and 0 <= k <= 2^n - 2")
    thr = Fraction(k, 2 ** n)
    j = None
    for i in range(max_stage + 1):
        if _block_mass(nu_stages(i), n) > thr:
            j = i
            break
    if j is None:
        raise NotInJ(f"({n},{k}) not confirmed in J within {max_stage} stages")
    nuj = nu_stages(j)
    x = next(y for y in range(2 ** n) if nuj.get(y, Fraction(0)) < Fraction(2, 2 ** n))
    fv, norms = [], []
    for mu in mus:
        f = _f_value(mu, x, n, k, x)
        fv.append(f)
        norms.append(sum((m * _f_value(mu, y, n, k, x) for y, m in mu.items()), Fraction(0)))
    return NeutralityProbe(n, k, j, x, tuple(fv), tuple(norms))


def _f_value(mu: Dict[int, Fraction], y, n, k, x_nk) -> Fraction:
    block = _block_mass(mu, n)
    if not Fraction(k, 2 ** n) < block < Fraction(k + 2, 2 ** n):
        return Fraction(0)
    if not mu.get(y, Fraction(0)) < Fraction(4, 2 ** n):
        return Fraction(0)
    if y != x_nk:
        return Fraction(0)
    return Fraction(2 ** n, 4)


def neutrality_g(nu_stages: Callable[[int], Dict[int, Fraction]], mu: Dict[int, Fraction],
                 n_max: int, max_stage: int = 64) -> Tuple[Dict[int, Fraction], Fraction]:
    """``g_mu(y) = sum_{2 <= n <= n_max} 1/(n(n+1)) sum_k f_mu(y, n, k)`` and ``sum_y mu(y) g_mu(y)``.

    Pairs ``(n, k)`` not confirmed in ``J`` within ``max_stage`` stages contribute 0.
    """
    g: Dict[int, Fraction] = {y: Fraction(0) for y in mu}
    for n in range(2, n_max + 1):
        for k in range(0, 2 ** n - 1):
            try:
                probe = neutrality_probe(nu_stages, n, k, max_stage)
            except NotInJ:
                continue
            x = probe.x
            if x in mu:
                g[x] += _f_value(mu, x, n, k, x) / (n * (n + 1))
    total = sum((m * g[y] for y, m in mu.items()), Fraction(0))
    return g, total
