"""Exact rational maximum flow (Edmonds-Karp on a dense capacity matrix)."""
from __future__ import annotations

from collections import deque
from fractions import Fraction
from typing import List, Sequence, Tuple


def max_flow(n: int, edges: Sequence[Tuple[int, int, Fraction]], s: int, t: int
             ) -> Tuple[Fraction, List[List[Fraction]]]:
    """Return the flow value and the net flow matrix ``F[u][v]``.

    Capacities are rationals; parallel edges add up.  Shortest augmenting
    paths keep the number of rounds polynomial regardless of the capacities.
    """
    zero = Fraction(0)
    cap = [[zero] * n for _ in range(n)]
    for u, v, c in edges:
        cap[u][v] += Fraction(c)
    flow = [[zero] * n for _ in range(n)]
    total = zero
    while True:
        parent = [-1] * n
        parent[s] = s
        q = deque([s])
        while q and parent[t] < 0:
            u = q.popleft()
            for v in range(n):
                if parent[v] < 0 and cap[u][v] - flow[u][v] > 0:
                    parent[v] = u
                    q.append(v)
        if parent[t] < 0:
            return total, flow
        push = None
        v = t
        while v != s:
            u = parent[v]
            r = cap[u][v] - flow[u][v]
            push = r if push is None or r < push else push
            v = u
        v = t
        while v != s:
            u = parent[v]
            flow[u][v] += push
            flow[v][u] -= push
            v = u
        total += push
