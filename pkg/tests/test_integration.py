from fractions import Fraction as F

import pytest
from hypothesis import given, strategies as st

from randlab.integration import (AtomicMeasure, BernoulliSequenceMeasure, IntegrationBudgetError,
                                 MixtureUniform, RegularPartition, UniformMeasure, cell_measure,
                                 integrate, integrate_expr, partition_csv,
                                 regular_partition_measures)
from randlab.measures import dirac, uniform
from randlab.spaces import (BinarySequences, Hat, LinComb, Max, Min, One, UnitInterval,
                            enumerate_E, separating_sequence)
from oracles import to_pl

U = UnitInterval()
EPS = F(1, 1024)
SEQ = separating_sequence(U)
IDENT = Hat(U, F(1), F(0), F(1))  # f(x) = x on [0, 1]


def test_uniform_constant_one():
    iv = integrate_expr(UniformMeasure(), One(), EPS)
    assert iv.lo == iv.hi == 1


def test_uniform_hat_closed_form():
    iv = integrate_expr(UniformMeasure(), Hat(U, F(0), F(1, 2), F(1, 4)), EPS)
    assert iv.lo <= F(5, 8) <= iv.hi


@given(st.integers(1, 3000))
def test_enumerated_integrals_contain_piecewise_linear_value(n):
    f = enumerate_E(U, n)
    iv = integrate_expr(UniformMeasure(), f, EPS)
    assert iv.contains(to_pl(f).integral())
    assert iv.width <= EPS


@given(st.integers(1, 600), st.integers(0, 8), st.integers(1, 8))
def test_subinterval_uniform(n, a, w):
    lo, hi = F(a, 16), F(min(16, a + w), 16)
    if lo == hi:
        return
    f = enumerate_E(U, n)
    # oracle: restrict the piecewise-linear form to [lo, hi]
    pl = to_pl(f)
    pts = sorted({lo, hi} | {x for x in pl.xs if lo < x < hi})
    exact = sum(((b - a2) * (pl(a2) + pl(b)) / 2 for a2, b in zip(pts, pts[1:])), F(0)) / (hi - lo)
    assert integrate_expr(UniformMeasure(lo, hi), f, EPS).contains(exact)


def test_monotone_sequences_close():
    f = Hat(U, F(1, 2), F(1, 8), F(1, 8))
    lower = lambda n: LinComb(((1 - F(1, n), f),))
    upper = lambda n: Min((One(), LinComb(((F(1), f), (F(1, n), One())))))
    iv = integrate(UniformMeasure(), lower, upper, EPS)
    assert iv.contains(to_pl(f).integral())


def test_budget_error_when_gap_never_closes():
    with pytest.raises(IntegrationBudgetError):
        integrate(UniformMeasure(), lambda n: LinComb(()), lambda n: One(), EPS)


@given(st.integers(1, 200), st.integers(1, 200))
def test_integration_monotone(i, j):
    f, g = enumerate_E(U, i), enumerate_E(U, j)
    lo_f = Min((f, g))
    a = integrate_expr(UniformMeasure(), lo_f, EPS)
    b = integrate_expr(UniformMeasure(), g, EPS)
    assert a.hi <= b.hi + EPS


def test_atomic_and_mixture():
    mu = AtomicMeasure(uniform(U, [F(0), F(1, 2), F(1)]))
    iv = integrate_expr(mu, Hat(U, F(0), F(1, 2), F(1, 4)), EPS)
    assert iv.contains(F(2, 3))
    mix = MixtureUniform(((F(1, 2), UniformMeasure(F(0), F(1, 2))), (F(1, 2), UniformMeasure(F(1, 2), F(1)))))
    assert integrate_expr(mix, IDENT, EPS).contains(F(1, 2))


def test_regular_partition_examples():
    p = RegularPartition(((IDENT, (F(1, 2),)),))
    br = regular_partition_measures(p, UniformMeasure(), F(1, 64))
    for iv in br.values():
        assert iv.lo <= F(1, 2) <= iv.hi and iv.width <= F(1, 64)
    p = RegularPartition(((IDENT, (F(3),)),))
    br = regular_partition_measures(p, UniformMeasure(), F(1, 64))
    assert br[(0,)].lo <= 1 <= br[(0,)].hi and br[(1,)].hi <= F(1, 64)


def test_dyadic_cells_depth_three():
    for v in range(8):
        s = format(v, "03b")
        iv = cell_measure(SEQ, UniformMeasure(), s, F(1, 64))
        assert iv.lo == iv.hi == F(1, 8)


def test_cell_examples():
    iv = cell_measure(SEQ, UniformMeasure(), "01", F(1, 64))
    assert iv.lo == iv.hi == F(1, 4)
    mu = AtomicMeasure(dirac(U, F(5, 16)))
    assert cell_measure(SEQ, mu, "", F(1, 64)).lo == 1
    assert cell_measure(SEQ, mu, "01", F(1, 64)).lo == 1
    assert cell_measure(SEQ, mu, "00", F(1, 64)).hi == 0


def test_generic_cell_brackets():
    iv = cell_measure(SEQ, UniformMeasure(), "01", F(1, 64), use_closed_form=False)
    assert iv.lo <= F(1, 4) <= iv.hi and iv.width <= F(1, 64)


@pytest.mark.parametrize("s", ["0", "1", "01", "110", "0110"])
def test_cell_additivity_generic(s):
    e = F(1, 256)
    m = cell_measure(SEQ, UniformMeasure(), s, e, use_closed_form=False)
    a = cell_measure(SEQ, UniformMeasure(), s + "0", e, use_closed_form=False)
    b = cell_measure(SEQ, UniformMeasure(), s + "1", e, use_closed_form=False)
    assert a.lo + b.lo - 3 * e <= m.hi and m.lo <= a.hi + b.hi + 3 * e


def test_bernoulli_cells():
    mu = BernoulliSequenceMeasure(F(1, 3))
    seq = separating_sequence(BinarySequences())
    assert cell_measure(seq, mu, "01", F(1, 64)).lo == F(2, 3) * F(1, 3)
    assert mu.cylinder("") == 1


def test_partition_csv_format():
    br = {"0": cell_measure(SEQ, UniformMeasure(), "0", F(1, 8)),
          "1": cell_measure(SEQ, UniformMeasure(), "1", F(1, 8))}
    assert partition_csv(br) == "cell,lower,upper\n0,1/2,1/2\n1,1/2,1/2\n"
