from fractions import Fraction

import pytest
from hypothesis import assume, given, strategies as st

from randlab.spaces import (INF, BallSupremum, BinarySequences, CellBoundaryError,
                            CompactifiedNaturals, DiscreteStrings, Hat, LinComb, Max, Min,
                            NaturalSequences, Naturals, One, Product, UnitInterval, cantor_pair,
                            cantor_unpair, cell_of, enumerate_E, from_sexpr, hat_schedule,
                            lipschitz_eval, monotone_approx, rat_code, separating_sequence,
                            space_from_json, to_sexpr, tuple_pair, tuple_unpair)

SPACES = [DiscreteStrings(), Naturals(), UnitInterval(), BinarySequences(), NaturalSequences(),
          CompactifiedNaturals(), Product((UnitInterval(), BinarySequences()))]
U = UnitInterval()


def direct_hat(x, u, r, eps, d):
    """Oracle: 1 inside the ball, 0 beyond r + eps, linear in between."""
    t = d(x, u)
    if t <= r:
        return Fraction(1)
    if t >= r + eps:
        return Fraction(0)
    return 1 - (t - r) / eps


def test_cantor_pairing_values():
    # <i,j> = (i+j)(i+j+1)/2 + j, the standard diagonal order
    assert [cantor_pair(i, j) for i, j in [(0, 0), (1, 0), (0, 1), (2, 0), (1, 1), (0, 2)]] == list(range(6))


@given(st.integers(0, 10 ** 6))
def test_cantor_unpair_inverts(n):
    assert cantor_pair(*cantor_unpair(n)) == n


@given(st.lists(st.integers(0, 500), min_size=1, max_size=4))
def test_tuple_pairing_round_trip(ns):
    assert tuple_unpair(tuple_pair(*ns), len(ns)) == tuple(ns)


def test_rat_code_covers_small_rationals():
    seen = {rat_code(j) for j in range(2000)}
    assert all(Fraction(p, q) in seen for q in range(1, 8) for p in range(0, 8))


@pytest.mark.parametrize("space", SPACES, ids=lambda s: s.kind)
def test_codec_round_trip_and_json(space):
    for i in range(60):
        x = space.point(i)
        assert space.decode(space.encode(x)) == x
    assert space_from_json(space.to_json()) == space


@pytest.mark.parametrize("space", SPACES, ids=lambda s: s.kind)
def test_metric_axioms_on_dense_samples(space):
    pts = [space.point(i) for i in range(14)]
    d = space.distance
    for x in pts:
        assert d(x, x) == 0
        for y in pts:
            assert d(x, y) == d(y, x) >= 0
            for z in pts:
                assert d(x, z) <= d(x, y) + d(y, z)


def test_dense_points_distinct():
    for space in SPACES:
        pts = [space.encode(space.point(i)) for i in range(200)]
        assert len(set(pts)) == len(pts)


def test_enumeration_seed_and_first_hat():
    assert enumerate_E(U, 1) == One()
    # index 2 is the hat of code 0: first dense point, first rational radius, width 1
    assert enumerate_E(U, 2) == Hat(U, U.point(0), Fraction(0), Fraction(1))


def test_hat_values():
    h = Hat(U, Fraction(0), Fraction(1, 2), Fraction(1, 4))
    assert h(Fraction(1, 4)) == 1 and h(Fraction(1, 2)) == 1
    assert h(Fraction(3, 4)) == 0 and h(Fraction(1)) == 0
    assert h(Fraction(5, 8)) == Fraction(1, 2)


@given(st.integers(1, 400), st.integers(0, 60))
def test_enumerated_expressions_match_direct_evaluation(n, i):
    f = enumerate_E(U, n)
    x = U.point(i)

    def ev(g):
        if isinstance(g, One):
            return Fraction(1)
        if isinstance(g, Hat):
            return direct_hat(x, g.u, g.r, g.eps, U.distance)
        if isinstance(g, Min):
            return min(ev(c) for c in g.children)
        if isinstance(g, Max):
            return max(ev(c) for c in g.children)
        return sum((c * ev(e) for c, e in g.terms), Fraction(0))

    assert lipschitz_eval(f, x).contains(ev(f))


@given(st.integers(1, 400), st.integers(0, 40), st.integers(0, 40))
def test_bounds_and_lipschitz_constant(n, i, j):
    f = enumerate_E(U, n)
    x, y = U.point(i), U.point(j)
    lo, hi = f.bounds()
    assert lo <= f(x) <= hi
    assert abs(f(x) - f(y)) <= f.lipschitz() * U.distance(x, y)


@given(st.integers(0, 300))
def test_hat_schedule_surjective(q):
    i, j, e = tuple_unpair(q, 3)
    assert enumerate_E(U, hat_schedule(q)) == Hat(U, U.point(i), rat_code(j), Fraction(1, e + 1))


@given(st.integers(1, 300))
def test_sexpr_round_trip(n):
    for space in (U, BinarySequences()):
        f = enumerate_E(space, n)
        assert from_sexpr(to_sexpr(f), space) == f


def test_monotone_approx_of_ball_indicator():
    f = BallSupremum(U, ((Fraction(1), Fraction(1, 2), Fraction(1, 4)),))
    grid = [Fraction(k, 2 ** 8) for k in range(2 ** 8 + 1)]
    prev = None
    for n in range(1, 30):
        g = monotone_approx(f, n)
        vals = [g(x) for x in grid]
        assert all(v <= f.value(x) for v, x in zip(vals, grid))
        if prev:
            assert all(a <= b for a, b in zip(prev, vals))
        prev = vals
    # deep stages reach the indicator at interior grid points
    g = monotone_approx(f, 1024)
    assert g(Fraction(1, 2)) == 1 and g(Fraction(3, 8)) == 1


def test_monotone_approx_constant_one():
    f = BallSupremum(U, ((Fraction(1), Fraction(0), None),))
    assert all(monotone_approx(f, n) == One() for n in range(1, 5))


def test_monotone_approx_two_balls_is_pointwise_max():
    f = BallSupremum(U, ((Fraction(1), Fraction(1, 4), Fraction(1, 8)),
                         (Fraction(1, 2), Fraction(3, 4), Fraction(1, 4))))
    n = 16
    g = monotone_approx(f, n)
    h1 = Hat(U, Fraction(1, 4), Fraction(1, 8) - Fraction(1, n), Fraction(1, n))
    h2 = Hat(U, Fraction(3, 4), Fraction(1, 4) - Fraction(1, n), Fraction(1, n))
    for k in range(2 ** 12 + 1):
        x = Fraction(k, 2 ** 12)
        assert g(x) == max(h1(x), Fraction(1, 2) * h2(x))


def test_cells_examples():
    seq = separating_sequence(U)
    assert cell_of(seq, Fraction(5, 16), 2) == "01"
    with pytest.raises(CellBoundaryError):
        cell_of(seq, Fraction(1, 2), 1)
    bs = separating_sequence(BinarySequences())
    assert cell_of(bs, "0110", 4) == "0110"


def test_unit_interval_cells_are_dyadic_intervals():
    seq = separating_sequence(U)
    for k in range(1, 2 ** 8, 2):
        x = Fraction(k, 2 ** 8)
        s = cell_of(seq, x, 7)
        lo, hi = seq.cell_interval(s)
        assert lo < x < hi and hi - lo == Fraction(1, 2 ** 7)


@given(st.integers(1, 2 ** 12 - 1), st.integers(1, 10), st.integers(1, 10))
def test_cells_nest(k, m, n):
    x = Fraction(2 * k + 1, 2 ** 14)
    seq = separating_sequence(U)
    m, n = sorted((m, n))
    assert cell_of(seq, x, n).startswith(cell_of(seq, x, m))


@given(st.integers(0, 2 ** 12), st.integers(0, 2 ** 12), st.integers(1, 8))
def test_cells_disjoint(a, b, n):
    seq = separating_sequence(U)
    x, y = Fraction(2 * a + 1, 2 ** 14), Fraction(2 * b + 1, 2 ** 14)
    sx, sy = cell_of(seq, x, n), cell_of(seq, y, n)
    lo, hi = seq.cell_interval(sx)
    assert (sx == sy) == (lo < y < hi)


@given(st.integers(1, 500), st.integers(1, 500))
def test_separation(i, j):
    x, y = U.point(i), U.point(j)
    assume(x != y and 0 < x < 1 and 0 < y < 1)
    seq = separating_sequence(U)
    found = False
    for n in range(1, 40):
        try:
            if seq.sign(n, x) * seq.sign(n, y) < 0:
                found = True
                break
        except CellBoundaryError:
            break
    # two distinct rationals are separated before either hits a dyadic boundary,
    # unless one of them is dyadic and lands on a boundary first
    if not found:
        assert any(seq.sign(n, x) == 0 or seq.sign(n, y) == 0 for n in range(1, 40))


def test_compactified_naturals_has_infinity():
    c = CompactifiedNaturals()
    assert c.decode(c.encode(INF)) == INF
    assert c.distance(INF, c.point(5)) > 0
