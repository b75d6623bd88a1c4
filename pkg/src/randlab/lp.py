"""Exact rational linear programming: two-phase tableau simplex with Bland's rule.

Solves ``maximize c.x  s.t.  A_ub x <= b_ub,  A_eq x = b_eq,  x >= 0``.
Bland's rule guarantees termination; every quantity is a Fraction so the
optimum and the certifying point are exact.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import List, Optional, Sequence

__all__ = ["LPResult", "linprog_exact"]


@dataclass(frozen=True)
class LPResult:
    status: str  # "optimal", "infeasible" or "unbounded"
    x: Optional[tuple] = None
    value: Optional[Fraction] = None


def _pivot(T: List[List[Fraction]], basis: List[int], r: int, c: int):
    row = T[r]
    p = row[c]
    if p != 1:
        T[r] = row = [v / p for v in row]
    for i, other in enumerate(T):
        if i != r:
            f = other[c]
            if f:
                T[i] = [a - f * b for a, b in zip(other, row)]
    basis[r] = c


def _optimize(T, basis, cost, allowed) -> str:
    m = len(T)
    while True:
        enter = -1
        for j in allowed:
            if j in basis:
                continue
            rc = cost[j] - sum(cost[basis[i]] * T[i][j] for i in range(m))
            if rc > 0:
                enter = j
                break
        if enter < 0:
            return "optimal"
        best = None
        leave = -1
        for i in range(m):
            a = T[i][enter]
            if a > 0:
                ratio = T[i][-1] / a
                if best is None or ratio < best or (ratio == best and basis[i] < basis[leave]):
                    best, leave = ratio, i
        if leave < 0:
            return "unbounded"
        _pivot(T, basis, leave, enter)


def linprog_exact(c: Sequence, A_ub: Sequence[Sequence] = (), b_ub: Sequence = (),
                  A_eq: Sequence[Sequence] = (), b_eq: Sequence = ()) -> LPResult:
    n = len(c)
    rows = [([Fraction(v) for v in a], Fraction(b), True) for a, b in zip(A_ub, b_ub)]
    rows += [([Fraction(v) for v in a], Fraction(b), False) for a, b in zip(A_eq, b_eq)]
    n_slack = sum(1 for r in rows if r[2])
    m = len(rows)
    width = n + n_slack + m
    T: List[List[Fraction]] = []
    basis: List[int] = []
    k = 0
    for i, (a, b, is_ub) in enumerate(rows):
        row = a + [Fraction(0)] * (n_slack + m) + [b]
        if is_ub:
            row[n + k] = Fraction(1)
            k += 1
        if b < 0:
            row = [-v for v in row]
        row[n + n_slack + i] = Fraction(1)
        T.append(row)
        basis.append(n + n_slack + i)

    art = set(range(n + n_slack, width))
    cost1 = [Fraction(0)] * (n + n_slack) + [Fraction(-1)] * m
    _optimize(T, basis, cost1, list(range(width)))
    if any(T[i][-1] != 0 for i in range(m) if basis[i] in art):
        return LPResult("infeasible")

    # drive artificial variables out of the basis, dropping redundant rows
    i = 0
    while i < len(T):
        if basis[i] in art:
            col = next((j for j in range(n + n_slack) if T[i][j] != 0), None)
            if col is None:
                del T[i]
                del basis[i]
                continue
            _pivot(T, basis, i, col)
        i += 1

    cost2 = [Fraction(v) for v in c] + [Fraction(0)] * (n_slack + m)
    status = _optimize(T, basis, cost2, list(range(n + n_slack)))
    if status == "unbounded":
        return LPResult("unbounded")
    x = [Fraction(0)] * width
    for i, b in enumerate(basis):
        x[b] = T[i][-1]
    xs = tuple(x[:n])
    return LPResult("optimal", xs, sum((Fraction(ci) * xi for ci, xi in zip(c, xs)), Fraction(0)))
