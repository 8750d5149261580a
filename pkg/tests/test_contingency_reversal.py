from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from qbelief_core.contingency import (
    StratifiedTable,
    TwoArmTable,
    detect_reversal,
    reversal_condition,
    stratified_from_rows,
)
from qbelief_core.errors import InvalidCounts, LabelMismatch
from conftest import two_arm


def test_table1_reverses(table1):
    report = detect_reversal(table1)
    assert report.per_stratum_direction == (1, 1)
    assert report.pooled_direction == -1
    assert report.reversal is True
    assert report.pooled_rates == (Fraction(273, 350), Fraction(289, 350))
    assert report.note is None


def test_table2_reverses(table2):
    report = detect_reversal(table2)
    assert report.per_stratum_direction == (-1, -1)
    assert report.pooled_direction == 1
    assert report.reversal is True
    assert report.pooled_rates == (Fraction(1, 2), Fraction(2, 5))


def test_consistent_strata_do_not_reverse():
    table = StratifiedTable(
        (("x", two_arm((8, 10), (5, 10))), ("y", two_arm((6, 10), (3, 10))))
    )
    report = detect_reversal(table)
    assert report.per_stratum_direction == (1, 1)
    assert report.pooled_direction == 1
    assert report.reversal is False


def test_tie_in_a_stratum_is_not_a_reversal():
    table = StratifiedTable(
        (("x", two_arm((5, 10), (5, 10))), ("y", two_arm((1, 10), (90, 100))))
    )
    report = detect_reversal(table)
    assert report.per_stratum_direction[0] == 0
    assert report.reversal is False


def test_pooled_tie_is_not_a_reversal():
    # both strata favour a, pooled rates equal
    table = StratifiedTable(
        (("x", two_arm((1, 1), (9, 10))), ("y", two_arm((1, 9), (0, 35))))
    )
    report = detect_reversal(table)
    assert report.per_stratum_direction == (1, 1)
    assert report.pooled_direction == 0
    assert report.reversal is False


def test_single_stratum_reports_note():
    table = StratifiedTable((("only", two_arm((9, 10), (1, 10))),))
    report = detect_reversal(table)
    assert report.reversal is False
    assert report.note and "single stratum" in report.note


def test_report_to_dict_shape(table1):
    d = detect_reversal(table1).to_dict(digits=3)
    assert d["arms"] == ["Treatment 1", "Treatment 2"]
    assert [s["stratum"] for s in d["strata"]] == ["Study 1", "Study 2"]
    assert d["strata"][0]["rates"]["Treatment 1"] == {"exact": "27/29", "decimal": 0.931}
    assert d["pooled"]["rates"]["Treatment 2"]["exact"] == "289/350"
    assert d["reversal"] is True


# --- reversal_condition -----------------------------------------------------


def test_reversal_condition_table1():
    assert reversal_condition(81, 87, 234, 270, 192, 263, 55, 80) is True


def test_reversal_condition_table2_with_arms_swapped():
    assert reversal_condition(18, 30, 7, 10, 2, 10, 9, 30) is False
    assert reversal_condition(7, 10, 18, 30, 9, 30, 2, 10) is True


@pytest.mark.parametrize("args", [(5, 4, 1, 2, 1, 2, 1, 2), (1, 0, 1, 2, 1, 2, 1, 2)])
def test_reversal_condition_validates(args):
    with pytest.raises(InvalidCounts):
        reversal_condition(*args)


def _fractions_reverse(a1, b1, c1, d1, a2, b2, c2, d2):
    f = Fraction
    return f(a1, b1) > f(c1, d1) and f(a2, b2) > f(c2, d2) and f(c1 + c2, d1 + d2) > f(
        a1 + a2, b1 + b2
    )


def test_reversal_condition_exhaustive_small_denominators():
    dens = range(1, 5)
    pairs = [(a, b) for b in dens for a in range(b + 1)]
    for a1, b1 in pairs:
        for c1, d1 in pairs:
            for a2, b2 in pairs:
                for c2, d2 in pairs:
                    args = (a1, b1, c1, d1, a2, b2, c2, d2)
                    assert reversal_condition(*args) == _fractions_reverse(*args)


frac12 = st.integers(1, 12).flatmap(lambda b: st.tuples(st.integers(0, b), st.just(b)))


@given(frac12, frac12, frac12, frac12)
def test_reversal_condition_matches_fraction_comparison(p1, q1, p2, q2):
    args = (*p1, *q1, *p2, *q2)
    assert reversal_condition(*args) == _fractions_reverse(*args)


arm = st.integers(1, 50).flatmap(lambda n: st.tuples(st.integers(0, n), st.just(n)))


@given(arm, arm, arm, arm)
def test_detect_reversal_agrees_with_condition_for_two_strata(a1, c1, a2, c2):
    table = StratifiedTable((("x", two_arm(a1, c1)), ("y", two_arm(a2, c2))))
    forward = reversal_condition(*a1, *c1, *a2, *c2)
    backward = reversal_condition(*c1, *a1, *c2, *a2)
    assert detect_reversal(table).reversal == (forward or backward)


# --- stratified_from_rows -----------------------------------------------------


def test_stratified_from_rows_keeps_first_appearance_order():
    rows = [
        ("Study 2", "T2", 55, 80),
        ("Study 2", "T1", 192, 263),
        ("Study 1", "T1", 81, 87),
        ("Study 1", "T2", 234, 270),
    ]
    table = stratified_from_rows(rows)
    assert table.stratum_labels == ("Study 2", "Study 1")
    assert table.labels == ("T2", "T1")
    pinned = stratified_from_rows(rows, labels=("T1", "T2"))
    assert pinned.labels == ("T1", "T2")
    assert pinned.strata[1][1].arm_a.successes == 81


def test_stratified_from_rows_rejects_missing_arm():
    with pytest.raises(LabelMismatch):
        stratified_from_rows([("x", "a", 1, 2), ("x", "b", 1, 2), ("y", "a", 1, 2)])


def test_stratified_from_rows_rejects_third_arm():
    with pytest.raises(LabelMismatch):
        stratified_from_rows([("x", "a", 1, 2), ("x", "b", 1, 2), ("x", "c", 1, 2)])


def test_stratified_from_rows_rejects_duplicate_cell():
    with pytest.raises(LabelMismatch):
        stratified_from_rows([("x", "a", 1, 2), ("x", "a", 1, 3), ("x", "b", 1, 2)])


@st.composite
def stratified(draw):
    n = draw(st.integers(1, 4))
    return StratifiedTable(tuple((f"z{i}", two_arm(draw(arm), draw(arm))) for i in range(n)))


@given(stratified(), st.data())
def test_reversal_ignores_stratum_order(table, data):
    order = data.draw(st.permutations(table.strata))
    before, after = detect_reversal(table), detect_reversal(StratifiedTable(tuple(order)))
    assert after.reversal == before.reversal
    assert after.pooled_direction == before.pooled_direction
    by_label = dict(zip(before.stratum_labels, before.per_stratum_direction))
    assert after.per_stratum_direction == tuple(by_label[z] for z, _ in order)


@given(stratified())
def test_swapping_arms_flips_signs_only(table):
    swapped = StratifiedTable(tuple((z, t.swapped()) for z, t in table.strata))
    before, after = detect_reversal(table), detect_reversal(swapped)
    assert after.reversal == before.reversal
    assert after.pooled_direction == -before.pooled_direction
    assert after.per_stratum_direction == tuple(-d for d in before.per_stratum_direction)
    assert after.labels == (table.labels[1], table.labels[0])


def test_swapped_table():
    t = two_arm((18, 30), (7, 10), ("Treatment", "Control"))
    s = t.swapped()
    assert isinstance(s, TwoArmTable)
    assert s.arm("Treatment") == t.arm("Treatment")
    assert s.labels == ("Control", "Treatment")
    assert s.swapped() == t
