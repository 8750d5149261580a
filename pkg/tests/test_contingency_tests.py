import math
import random
from fractions import Fraction

import pytest
from hypothesis import assume, given
from hypothesis import strategies as st
from scipy import stats

from qbelief_core.contingency import (
    TestMethod,
    TestResult,
    chi_squared,
    fisher_exact,
    hypergeometric_weights,
    pool,
    rate,
)
from qbelief_core.errors import DegenerateTable, InvalidProbability
from conftest import two_arm


def _point(x, n_a, n_b, k):
    # hypergeometric P(X = x) written out with factorials
    f = math.factorial
    n = n_a + n_b
    num = f(n_a) * f(n_b) * f(k) * f(n - k)
    den = f(x) * f(n_a - x) * f(k - x) * f(n_b - k + x) * f(n)
    return Fraction(num, den)


def _enumerate_fisher(sa, na, sb, nb, alternative="two-sided"):
    k = sa + sb
    support = range(max(0, k - nb), min(k, na) + 1)
    probs = {x: _point(x, na, nb, k) for x in support}
    if alternative == "greater":
        return sum(p for x, p in probs.items() if x >= sa)
    if alternative == "less":
        return sum(p for x, p in probs.items() if x <= sa)
    return sum(p for p in probs.values() if p <= probs[sa])


def _hand_chi2(sa, na, sb, nb):
    obs = [[sa, na - sa], [sb, nb - sb]]
    n = na + nb
    cols = [sa + sb, n - sa - sb]
    rows = [na, nb]
    return sum(
        Fraction((obs[i][j] * n - rows[i] * cols[j]) ** 2, n * rows[i] * cols[j])
        for i in range(2)
        for j in range(2)
    )


# --- chi-squared ------------------------------------------------------------


def test_chi_squared_table1_pooled(table1):
    result = chi_squared(pool(table1))
    assert result.method is TestMethod.PEARSON_CHI_SQUARED
    # E = 281, 69 per row; |O - E| = 8 everywhere
    assert result.statistic == pytest.approx(44800 / 19389, rel=1e-12)
    assert result.p_value == pytest.approx(math.erfc(math.sqrt(result.statistic / 2)), rel=1e-9)


def test_chi_squared_table2_pooled(table2):
    result = chi_squared(pool(table2))
    assert result.statistic == pytest.approx(80 / 99, rel=1e-12)
    assert 0.3 < result.p_value < 0.4


def test_chi_squared_yates_table2_pooled(table2):
    result = chi_squared(pool(table2), yates=True)
    assert result.method is TestMethod.PEARSON_CHI_SQUARED_YATES
    assert result.statistic == pytest.approx(5 / 11, rel=1e-12)
    assert result.p_value > chi_squared(pool(table2)).p_value


@pytest.mark.parametrize(
    "cells",
    [
        (81, 87, 234, 270),
        (192, 263, 55, 80),
        (18, 30, 7, 10),
        (2, 10, 9, 30),
        (36, 45, 3, 15),
        (1, 10, 9, 30),
    ],
)
def test_chi_squared_matches_hand_formula_on_subtables(cells):
    result = chi_squared(two_arm(cells[:2], cells[2:]))
    assert result.statistic == pytest.approx(float(_hand_chi2(*cells)), rel=1e-12)
    ref = stats.chi2_contingency(
        [[cells[0], cells[1] - cells[0]], [cells[2], cells[3] - cells[2]]], correction=False
    )
    assert result.p_value == pytest.approx(ref[1], rel=1e-9)


def test_chi_squared_identical_arms_has_p_one():
    result = chi_squared(two_arm((5, 10), (10, 20)))
    assert result.statistic == 0.0
    assert result.p_value == 1.0


@pytest.mark.parametrize("cells", [((10, 10), (5, 5)), ((0, 10), (0, 5))])
def test_degenerate_margin_rejected(cells):
    t = two_arm(*cells)
    with pytest.raises(DegenerateTable):
        chi_squared(t)
    with pytest.raises(DegenerateTable):
        fisher_exact(t)


# --- Fisher -------------------------------------------------------------------


def test_fisher_table2_males_matches_enumeration():
    result = fisher_exact(two_arm((18, 30), (7, 10)))
    assert result.method is TestMethod.FISHER_EXACT_TWO_SIDED
    assert result.statistic is None
    assert result.p_value == pytest.approx(float(_enumerate_fisher(18, 30, 7, 10)), abs=1e-12)


def test_fisher_table3_row_a1_matches_enumeration():
    result = fisher_exact(two_arm((36, 45), (3, 15)))
    assert result.p_value == pytest.approx(float(_enumerate_fisher(36, 45, 3, 15)), abs=1e-12)
    assert result.p_value < 1e-3


@pytest.mark.parametrize("alternative", ["greater", "less"])
def test_fisher_one_sided_matches_reference(alternative):
    cells = [[18, 12], [7, 3]]
    result = fisher_exact(two_arm((18, 30), (7, 10)), alternative=alternative)
    assert result.method.value == f"fisher_exact_{alternative}"
    _, ref = stats.fisher_exact(cells, alternative=alternative)
    assert result.p_value == pytest.approx(ref, rel=1e-9)


def test_fisher_one_sided_tails_overlap_at_observed():
    t = two_arm((6, 12), (2, 9))
    w = hypergeometric_weights(t)
    total = sum(w.values())
    greater = fisher_exact(t, alternative="greater").p_value
    less = fisher_exact(t, alternative="less").p_value
    assert greater + less == pytest.approx(1 + w[6] / total, rel=1e-12)


def test_fisher_rejects_unknown_alternative():
    with pytest.raises(ValueError):
        fisher_exact(two_arm((1, 2), (1, 2)), alternative="sideways")


def test_hypergeometric_weights_sum_to_binomial():
    t = two_arm((18, 30), (7, 10))
    w = hypergeometric_weights(t)
    assert min(w) == 15 and max(w) == 25
    assert sum(w.values()) == math.comb(40, 25)


@pytest.mark.slow
def test_fisher_matches_enumeration_on_random_tables():
    rng = random.Random(20240117)
    for _ in range(10_000):
        na = rng.randint(1, 100)
        nb = rng.randint(1, 100)
        sa = rng.randint(0, na)
        sb = rng.randint(0, nb)
        k = sa + sb
        if k == 0 or k == na + nb:
            continue
        got = fisher_exact(two_arm((sa, na), (sb, nb))).p_value
        want = min(1.0, float(_enumerate_fisher(sa, na, sb, nb)))
        assert got == pytest.approx(want, abs=1e-12), (sa, na, sb, nb)


# --- TestResult -----------------------------------------------------------------


def test_test_result_validates_ranges():
    with pytest.raises(InvalidProbability):
        TestResult(p_value=1.5, method=TestMethod.FISHER_EXACT_TWO_SIDED)
    with pytest.raises(InvalidProbability):
        TestResult(p_value=0.5, method=TestMethod.PEARSON_CHI_SQUARED, statistic=-1.0)


def test_test_result_to_dict():
    result = TestResult(p_value=0.123456789, method=TestMethod.PEARSON_CHI_SQUARED, statistic=2.5)
    d = result.to_dict(digits=3)
    assert d == {"method": "pearson_chi_squared", "statistic": 2.5, "p_value": 0.123}


arm_counts = st.integers(1, 60).flatmap(lambda n: st.tuples(st.integers(0, n), st.just(n)))


@given(arm_counts, arm_counts)
def test_chi_squared_vanishes_exactly_on_equal_proportions(a, b):
    assume(0 < a[0] + b[0] < a[1] + b[1])
    t = two_arm(a, b)
    statistic = chi_squared(t).statistic
    assert statistic >= 0
    assert (statistic == 0) == (rate(t.arm_a) == rate(t.arm_b))
