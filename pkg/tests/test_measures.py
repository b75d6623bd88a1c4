from fractions import Fraction as F

import pytest
from hypothesis import given, strategies as st

from randlab.measures import (CauchyMeasure, Coupling, DiscreteKernel, FiniteRationalMeasure,
                              Infeasible, MeasureError, dirac, integrate_discrete, product_measure,
                              prokhorov_ball_contains, prokhorov_distance, pushforward,
                              strassen_couple, total_variation, uniform)
from randlab.spaces import DiscreteStrings, Hat, Naturals, One, Product, UnitInterval
from oracles import prokhorov_bruteforce, strassen_condition
from strategies import prob_measures

U = UnitInterval()
N = Naturals()
K = 20
TOL = F(1, 2 ** K)


def half(a, b):
    return FiniteRationalMeasure.from_pairs(U, [(a, F(1, 2)), (b, F(1, 2))])


def test_canonical_form_and_validation():
    mu = FiniteRationalMeasure.from_pairs(U, [(F(1), F(1, 4)), (F(0), F(1, 2)), (F(1), F(1, 4)), (F(1, 2), 0)])
    assert mu.atoms == ((F(0), F(1, 2)), (F(1), F(1, 2)))
    assert mu.normalized
    with pytest.raises(MeasureError):
        FiniteRationalMeasure(U, ((F(0), F(-1, 2)),))
    with pytest.raises(MeasureError):
        FiniteRationalMeasure(U, ((F(0), F(1, 2)), (F(0), F(1, 2))))


@given(prob_measures())
def test_json_round_trip(mu):
    assert FiniteRationalMeasure.loads(mu.dumps()) == mu
    assert FiniteRationalMeasure.loads(mu.dumps()).dumps() == mu.dumps()


def test_json_rejects_wrong_flag():
    d = dirac(U, F(0)).to_json()
    d["normalized"] = False
    with pytest.raises(MeasureError):
        FiniteRationalMeasure.from_json(d)


def test_prokhorov_examples():
    d0, d1 = dirac(U, F(0)), dirac(U, F(1))
    assert prokhorov_distance(d0, d0, K) == prokhorov_distance(d1, d1, K)
    assert prokhorov_distance(d0, d0, K).hi == 0
    iv = prokhorov_distance(d0, d1, K)
    assert iv.lo <= 1 <= iv.hi and iv.width <= TOL
    iv = prokhorov_distance(d0, half(F(0), F(1)), K)
    assert iv.contains(F(1, 2)) and iv.width <= TOL


def test_ball_membership_examples():
    d0, d1 = dirac(U, F(0)), dirac(U, F(1))
    assert prokhorov_ball_contains(d0, F(1, 100), d0)
    assert not prokhorov_ball_contains(d0, F(1, 4), d1)
    # the worst set A={1} gives mu(A^eps) = 0, not strictly above 1/2 - 1/2
    assert not prokhorov_ball_contains(half(F(0), F(1)), F(1, 2), d0)


@given(prob_measures(), prob_measures())
def test_prokhorov_matches_subset_oracle(mu, nu):
    iv = prokhorov_distance(mu, nu, K)
    o = prokhorov_bruteforce(mu.as_dict(), nu.as_dict(), U.distance)
    assert iv.lo - TOL <= o <= iv.hi + TOL
    assert iv.width <= TOL


@given(prob_measures(), prob_measures(), prob_measures())
def test_prokhorov_symmetry_and_triangle(a, b, c):
    ab, ba = prokhorov_distance(a, b, 16), prokhorov_distance(b, a, 16)
    bc, ac = prokhorov_distance(b, c, 16), prokhorov_distance(a, c, 16)
    slack = 2 * F(1, 2 ** 16)
    assert abs(ab.lo - ba.lo) <= slack
    assert ac.lo <= ab.hi + bc.hi + slack


def test_coupling_examples():
    d0 = dirac(U, F(0))
    c = strassen_couple(d0, d0, F(1, 8))
    assert isinstance(c, Coupling) and c.mismatch == 0
    assert c.joint.atoms == (((F(0), F(0)), F(1)),)
    c = strassen_couple(d0, half(F(0), F(1)), F(1, 2))
    assert isinstance(c, Coupling)
    assert c.joint.as_dict() == {(F(0), F(0)): F(1, 2), (F(0), F(1)): F(1, 2)}
    assert c.mismatch == F(1, 2)
    r = strassen_couple(d0, dirac(U, F(1)), F(1, 4))
    assert isinstance(r, Infeasible) and not r


@given(prob_measures(), prob_measures(), st.integers(0, 8))
def test_strassen_duality(mu, nu, e):
    eps = F(e, 8)
    res = strassen_couple(mu, nu, eps)
    assert isinstance(res, Coupling) == strassen_condition(mu.as_dict(), nu.as_dict(), U.distance, eps)
    if isinstance(res, Coupling):
        m1, m2 = res.marginals()
        assert m1 == mu and m2 == nu
        assert res.mismatch <= eps


def test_total_variation():
    a = half(F(0), F(1))
    b = FiniteRationalMeasure.from_pairs(U, [(F(0), F(1, 4)), (F(1), F(3, 4))])
    assert total_variation(a, b) == F(1, 2)
    assert total_variation(a, a) == 0
    assert total_variation(dirac(U, F(0)), dirac(U, F(1))) == 2


def test_kernels():
    mu = FiniteRationalMeasure.from_pairs(N, [(0, F(1, 2)), (1, F(1, 2))])
    lam = DiscreteKernel(N, N, {0: dirac(N, 2), 1: uniform(N, [2, 3])})
    assert pushforward(lam, mu).as_dict() == {2: F(3, 4), 3: F(1, 4)}
    ident = DiscreteKernel.identity(N, [0, 1])
    assert pushforward(ident, mu) == mu
    det = DiscreteKernel.deterministic(N, N, [0, 1], lambda x: 5)
    assert pushforward(det, mu) == dirac(N, 5)


@given(prob_measures(points=tuple(range(4)), space=N), prob_measures(points=tuple(range(4)), space=N),
       st.integers(0, 4))
def test_pushforward_commutes_with_mixtures(mu, nu, a):
    alpha = F(a, 4)
    lam = DiscreteKernel(N, N, {x: uniform(N, [x, x + 1]) for x in range(4)})
    mix = FiniteRationalMeasure.from_pairs(N, [(x, alpha * m) for x, m in mu.atoms]
                                           + [(x, (1 - alpha) * m) for x, m in nu.atoms])
    lhs = pushforward(lam, mix)
    p, q = pushforward(lam, mu), pushforward(lam, nu)
    rhs = FiniteRationalMeasure.from_pairs(N, [(x, alpha * m) for x, m in p.atoms]
                                           + [(x, (1 - alpha) * m) for x, m in q.atoms])
    assert lhs == rhs and lhs.total == mix.total


def test_discrete_integrals():
    mu = uniform(U, [F(0), F(1, 2), F(1)])
    iv = integrate_discrete(mu, Hat(U, F(0), F(1, 2), F(1, 4)))
    assert iv.lo == iv.hi == F(2, 3)
    assert integrate_discrete(mu, One()).lo == mu.total
    iv = integrate_discrete(dirac(U, F(5, 8)), Hat(U, F(0), F(1, 2), F(1, 4)))
    assert iv.contains(F(1, 2))


def test_products():
    D = DiscreteStrings()
    p = product_measure(dirac(D, "0"), dirac(D, "1"))
    assert p.atoms == ((("0", "1"), F(1)),)
    p = product_measure(uniform(D, ["0", "1"]), uniform(D, ["0", "1"]))
    assert sorted(m for _, m in p.atoms) == [F(1, 4)] * 4
    a = FiniteRationalMeasure.from_pairs(D, [("0", F(1, 3)), ("1", F(2, 3))])
    p = product_measure(a, uniform(D, ["0", "1"]))
    assert sorted(m for _, m in p.atoms) == [F(1, 6), F(1, 6), F(1, 3), F(1, 3)]
    assert isinstance(p.space, Product)
    assert FiniteRationalMeasure.loads(p.dumps()) == p


def test_cauchy_measure_certificates():
    # stages move a half-mass toward 1/2 by 2^-(i+2)
    stages = [half(F(0), F(1, 2) - F(1, 2 ** (i + 2))) for i in range(8)]
    cm = CauchyMeasure(stages)
    for i in range(7):
        for j in range(i + 1, 8):
            assert prokhorov_distance(stages[i], stages[j], 24).hi <= cm.distance_bound(i, j) < F(2, 2 ** i)
    iv = cm.integral(One(), 3)
    assert iv.contains(1)
    with pytest.raises(MeasureError):
        CauchyMeasure([dirac(U, F(0)), dirac(U, F(1))])
