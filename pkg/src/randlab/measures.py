"""Finitely supported rational measures, Prokhorov distance and couplings.

Prokhorov distance uses the open neighbourhood ``A^eps = {x : d(x, A) < eps}``
in its definition.  For finitely supported measures the same infimum is
obtained from the closed neighbourhood ``{d <= eps}``, whose feasibility
predicate is a max-flow question (Strassen): a coupling with
``P{d > eps} <= eps`` exists iff the flow over pairs at distance ``<= eps``
reaches ``1 - eps``.  The set of feasible ``eps`` is ``[p, inf)``, so
bisection on that exact predicate brackets ``p``.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from itertools import product as iproduct
from typing import Any, Callable, Dict, Iterable, List, Optional, Sequence, Tuple

from .flow import max_flow
from .numerics import DyadicInterval, rat_from_str, rat_to_str
from .spaces import LipschitzExpr, Product, Space, space_from_json

__all__ = [
    "FiniteRationalMeasure",
    "MeasureError",
    "dirac",
    "uniform",
    "prokhorov_distance",
    "prokhorov_feasible",
    "prokhorov_ball_contains",
    "Coupling",
    "Infeasible",
    "strassen_couple",
    "total_variation",
    "DiscreteKernel",
    "pushforward",
    "integrate_discrete",
    "product_measure",
    "CauchyMeasure",
]


class MeasureError(ValueError):
    pass


@dataclass(frozen=True)
class FiniteRationalMeasure:
    """``sum_i m_i delta_{x_i}`` with distinct points and positive rational masses.

    Atoms are kept in the space's canonical point order, so equal measures
    compare equal and serialize identically.
    """

    space: Space
    atoms: Tuple[Tuple[Any, Fraction], ...]

    def __post_init__(self):
        atoms = []
        seen = set()
        for x, m in self.atoms:
            m = Fraction(m)
            if m <= 0:
                raise MeasureError(f"atom mass must be positive, got {m}")
            if not self.space.contains(x):
                raise MeasureError(f"point {x!r} not in {self.space.kind}")
            if x in seen:
                raise MeasureError(f"repeated atom {x!r}")
            seen.add(x)
            atoms.append((x, m))
        atoms.sort(key=lambda a: self.space.sort_key(a[0]))
        object.__setattr__(self, "atoms", tuple(atoms))

    @classmethod
    def from_pairs(cls, space: Space, pairs: Iterable[Tuple[Any, Any]]) -> "FiniteRationalMeasure":
        """Merge repeated points and drop zero masses."""
        acc: Dict[Any, Fraction] = {}
        for x, m in pairs:
            acc[x] = acc.get(x, Fraction(0)) + Fraction(m)
        return cls(space, tuple((x, m) for x, m in acc.items() if m != 0))

    @property
    def total(self) -> Fraction:
        return sum((m for _, m in self.atoms), Fraction(0))

    @property
    def normalized(self) -> bool:
        return self.total == 1

    @property
    def support(self) -> Tuple[Any, ...]:
        return tuple(x for x, _ in self.atoms)

    def mass(self, x) -> Fraction:
        for y, m in self.atoms:
            if y == x:
                return m
        return Fraction(0)

    def as_dict(self) -> Dict[Any, Fraction]:
        return dict(self.atoms)

    def measure_of(self, pred: Callable[[Any], bool]) -> Fraction:
        return sum((m for x, m in self.atoms if pred(x)), Fraction(0))

    def scale(self, c) -> "FiniteRationalMeasure":
        return FiniteRationalMeasure.from_pairs(self.space, ((x, m * c) for x, m in self.atoms))

    def __add__(self, other: "FiniteRationalMeasure") -> "FiniteRationalMeasure":
        _same_space(self, other)
        return FiniteRationalMeasure.from_pairs(self.space, list(self.atoms) + list(other.atoms))

    def to_json(self) -> dict:
        return {
            "space": self.space.to_json(),
            "atoms": [{"point": self.space.encode(x), "mass": rat_to_str(m)} for x, m in self.atoms],
            "normalized": self.normalized,
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json())

    @classmethod
    def from_json(cls, d: dict) -> "FiniteRationalMeasure":
        try:
            space = space_from_json(d["space"])
            atoms = tuple((space.decode(a["point"]), rat_from_str(a["mass"])) for a in d["atoms"])
        except (KeyError, TypeError) as e:
            raise MeasureError(f"malformed measure JSON: {e}") from e
        mu = cls(space, atoms)
        if "normalized" in d and bool(d["normalized"]) != mu.normalized:
            raise MeasureError("'normalized' flag disagrees with total mass")
        return mu

    @classmethod
    def loads(cls, text: str) -> "FiniteRationalMeasure":
        return cls.from_json(json.loads(text))


def dirac(space: Space, x) -> FiniteRationalMeasure:
    return FiniteRationalMeasure(space, ((x, Fraction(1)),))


def uniform(space: Space, points: Sequence) -> FiniteRationalMeasure:
    w = Fraction(1, len(points))
    return FiniteRationalMeasure(space, tuple((x, w) for x in points))


def _same_space(mu, nu):
    if mu.space != nu.space:
        raise MeasureError(f"measures live on different spaces: {mu.space} vs {nu.space}")


def _need_normalized(*ms):
    for m in ms:
        if not m.normalized:
            raise MeasureError("operation requires probability measures")


# ---------------------------------------------------------------- Prokhorov


def _transport_flow(mu, nu, eps):
    """Max flow from mu to nu through pairs at distance <= eps."""
    xs, ys = mu.atoms, nu.atoms
    nx, ny = len(xs), len(ys)
    s, t = nx + ny, nx + ny + 1
    big = mu.total + nu.total
    edges = [(s, i, m) for i, (_, m) in enumerate(xs)]
    edges += [(nx + j, t, m) for j, (_, m) in enumerate(ys)]
    d = mu.space.distance
    for i, (x, _) in enumerate(xs):
        for j, (y, _) in enumerate(ys):
            if d(x, y) <= eps:
                edges.append((i, nx + j, big))
    value, F = max_flow(nx + ny + 2, edges, s, t)
    return value, F


def prokhorov_feasible(mu: FiniteRationalMeasure, nu: FiniteRationalMeasure, eps) -> bool:
    """Exact test of ``p(mu, nu) <= eps``."""
    eps = Fraction(eps)
    if eps >= 1:
        return True
    if eps < 0:
        return False
    value, _ = _transport_flow(mu, nu, eps)
    return value >= 1 - eps


def prokhorov_distance(mu: FiniteRationalMeasure, nu: FiniteRationalMeasure, k: int) -> DyadicInterval:
    """Interval of width ``<= 2**-k`` containing the Prokhorov distance."""
    _same_space(mu, nu)
    _need_normalized(mu, nu)
    if mu == nu:
        return DyadicInterval(Fraction(0), Fraction(0))
    lo, hi = Fraction(0), Fraction(1)
    target = Fraction(1, 2 ** k)
    while hi - lo > target:
        mid = (lo + hi) / 2
        if prokhorov_feasible(mu, nu, mid):
            hi = mid
        else:
            lo = mid
    return DyadicInterval(lo, hi)


def prokhorov_ball_contains(sigma: FiniteRationalMeasure, eps, mu: FiniteRationalMeasure) -> bool:
    """``mu(A^eps) > sigma(A) - eps`` for every ``A`` inside the support of ``sigma``."""
    _same_space(sigma, mu)
    eps = Fraction(eps)
    S = sigma.atoms
    d = sigma.space.distance
    # near[i]: mu-atoms within open distance eps of support point i
    near = [frozenset(j for j, (y, _) in enumerate(mu.atoms) if d(x, y) < eps) for x, _ in S]
    masses = [m for _, m in mu.atoms]
    for mask in range(1 << len(S)):
        sA = Fraction(0)
        nb = set()
        for i in range(len(S)):
            if mask >> i & 1:
                sA += S[i][1]
                nb |= near[i]
        if not sum((masses[j] for j in nb), Fraction(0)) > sA - eps:
            return False
    return True


@dataclass(frozen=True)
class Coupling:
    joint: FiniteRationalMeasure  # on Product((space, space))
    mismatch: Fraction  # P{d(xi, eta) > eps}
    eps: Fraction

    def marginals(self) -> Tuple[FiniteRationalMeasure, FiniteRationalMeasure]:
        base = self.joint.space.factors[0]
        first = FiniteRationalMeasure.from_pairs(base, ((x, m) for (x, _), m in self.joint.atoms))
        second = FiniteRationalMeasure.from_pairs(base, ((y, m) for (_, y), m in self.joint.atoms))
        return first, second


@dataclass(frozen=True)
class Infeasible:
    flow: Fraction
    required: Fraction

    def __bool__(self):
        return False


def strassen_couple(mu: FiniteRationalMeasure, nu: FiniteRationalMeasure, eps):
    """A coupling of ``mu`` and ``nu`` with ``P{d > eps} <= eps``, or ``Infeasible``."""
    _same_space(mu, nu)
    _need_normalized(mu, nu)
    eps = Fraction(eps)
    space = mu.space
    pspace = Product((space, space))
    d = space.distance
    if mu == nu:
        joint = FiniteRationalMeasure(pspace, tuple(((x, x), m) for x, m in mu.atoms))
        return Coupling(joint, Fraction(0), eps)
    value, F = _transport_flow(mu, nu, eps)
    if value < 1 - eps:
        return Infeasible(value, 1 - eps)
    nx = len(mu.atoms)
    mass: Dict[Tuple[Any, Any], Fraction] = {}
    rx = [m for _, m in mu.atoms]
    ry = [m for _, m in nu.atoms]
    for i, (x, _) in enumerate(mu.atoms):
        for j, (y, _) in enumerate(nu.atoms):
            f = F[i][nx + j]
            if f > 0:
                mass[(x, y)] = mass.get((x, y), Fraction(0)) + f
                rx[i] -= f
                ry[j] -= f
    # leftover mass is paired greedily in canonical order (north-west corner)
    i = j = 0
    while i < len(rx) and j < len(ry):
        if rx[i] == 0:
            i += 1
            continue
        if ry[j] == 0:
            j += 1
            continue
        f = min(rx[i], ry[j])
        key = (mu.atoms[i][0], nu.atoms[j][0])
        mass[key] = mass.get(key, Fraction(0)) + f
        rx[i] -= f
        ry[j] -= f
    joint = FiniteRationalMeasure.from_pairs(pspace, mass.items())
    mismatch = sum((m for (x, y), m in joint.atoms if d(x, y) > eps), Fraction(0))
    return Coupling(joint, mismatch, eps)


def total_variation(mu: FiniteRationalMeasure, nu: FiniteRationalMeasure) -> Fraction:
    """``sum_x |mu(x) - nu(x)|`` over the union of supports."""
    _same_space(mu, nu)
    a, b = mu.as_dict(), nu.as_dict()
    return sum((abs(a.get(x, 0) - b.get(x, 0)) for x in set(a) | set(b)), Fraction(0))


# ---------------------------------------------------------------- kernels, products


@dataclass(frozen=True)
class DiscreteKernel:
    """``x -> lambda_x``: a probability measure on the target for each source point."""

    source: Space
    target: Space
    rows: Tuple[Tuple[Any, FiniteRationalMeasure], ...]

    def __post_init__(self):
        rows = tuple(self.rows.items()) if isinstance(self.rows, dict) else tuple(self.rows)
        for x, lam in rows:
            if lam.space != self.target:
                raise MeasureError("kernel row lives on the wrong space")
            if not lam.normalized:
                raise MeasureError(f"kernel row at {x!r} is not a probability measure")
        object.__setattr__(self, "rows", rows)

    def __call__(self, x) -> FiniteRationalMeasure:
        for y, lam in self.rows:
            if y == x:
                return lam
        raise MeasureError(f"point {x!r} outside the kernel domain")

    @property
    def domain(self) -> Tuple[Any, ...]:
        return tuple(x for x, _ in self.rows)

    @classmethod
    def deterministic(cls, source: Space, target: Space, points, h: Callable) -> "DiscreteKernel":
        return cls(source, target, tuple((x, FiniteRationalMeasure(target, ((h(x), Fraction(1)),)))
                                         for x in points))

    @classmethod
    def identity(cls, space: Space, points) -> "DiscreteKernel":
        return cls.deterministic(space, space, points, lambda x: x)

    def apply(self, g: Callable[[Any], Fraction]) -> Callable[[Any], Fraction]:
        """Pullback ``(Lambda g)(x) = sum_y lambda_x(y) g(y)``."""
        def u(x):
            return sum((m * Fraction(g(y)) for y, m in self(x).atoms), Fraction(0))
        return u


def pushforward(kernel: DiscreteKernel, mu: FiniteRationalMeasure) -> FiniteRationalMeasure:
    pairs = []
    for x, m in mu.atoms:
        for y, w in kernel(x).atoms:
            pairs.append((y, m * w))
    return FiniteRationalMeasure.from_pairs(kernel.target, pairs)


def integrate_discrete(mu: FiniteRationalMeasure, f: LipschitzExpr, k: int = 0) -> DyadicInterval:
    """``sum_x mu(x) f(x)``; exact because hats take rational values at dense points."""
    return DyadicInterval.point(sum((m * f.value(x) for x, m in mu.atoms), Fraction(0)))


def product_measure(mu: FiniteRationalMeasure, nu: FiniteRationalMeasure) -> FiniteRationalMeasure:
    sp = Product((mu.space, nu.space))
    return FiniteRationalMeasure(sp, tuple(((x, y), a * b) for (x, a), (y, b) in iproduct(mu.atoms, nu.atoms)))


# ---------------------------------------------------------------- Cauchy sequences


class CauchyMeasure:
    """A measure given by finite stages with ``p(mu_i, mu_{i+1}) < 2^-i``.

    Each consecutive pair carries a certificate ``c_i``: a rational upper
    bound on the Prokhorov distance, checked at construction.
    """

    def __init__(self, stages: Sequence[FiniteRationalMeasure], max_precision: int = 40):
        self.stages = tuple(stages)
        if not self.stages:
            raise MeasureError("need at least one stage")
        self.certificates: List[Fraction] = []
        for i in range(len(self.stages) - 1):
            bound = Fraction(1, 2 ** i)
            c = None
            for k in range(i + 2, max_precision + 1):
                hi = prokhorov_distance(self.stages[i], self.stages[i + 1], k).hi
                if hi < bound:
                    c = hi
                    break
            if c is None:
                raise MeasureError(f"stages {i} and {i + 1} are not 2^-{i} close")
            self.certificates.append(c)

    @property
    def space(self) -> Space:
        return self.stages[0].space

    def distance_bound(self, i: int, j: int) -> Fraction:
        """Certified upper bound on ``p(mu_i, mu_j)`` for ``i <= j``."""
        return sum(self.certificates[i:j], Fraction(0))

    def integral(self, f: LipschitzExpr, k: int) -> DyadicInterval:
        """``mu f`` within ``2**-k``, using ``|mu f - mu_i f| <= (beta + 2B) 2^(-i+1)``."""
        beta = f.lipschitz()
        lo, hi = f.bounds()
        B = max(abs(lo), abs(hi))
        slack_per = beta + 2 * B
        for i, st in enumerate(self.stages):
            err = slack_per * Fraction(2, 2 ** i)
            if 2 * err <= Fraction(1, 2 ** k):
                v = integrate_discrete(st, f).lo
                return DyadicInterval(v - err, v + err)
        raise MeasureError(f"not enough stages for precision {k}")
