from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Any, Dict, Iterable, List, Optional, Sequence, Tuple

from scipy import stats

from .errors import DegenerateTable, InvalidCounts, InvalidProbability, LabelMismatch
from .render import exact, render_decimal, sig
from .types import Direction, Label

# Relative slack when deciding whether a table is "as extreme" as the observed one.
FISHER_RELATIVE_TOLERANCE = Fraction(1, 10**12)


@dataclass(frozen=True)
class ArmCounts:
    successes: int
    trials: int

    def __post_init__(self) -> None:
        for name in ("successes", "trials"):
            v = getattr(self, name)
            if isinstance(v, bool) or not isinstance(v, int):
                raise InvalidCounts(f"{name} must be an integer, got {v!r}")
        if self.trials < 1:
            raise InvalidCounts(f"trials must be >= 1, got {self.trials}")
        if not 0 <= self.successes <= self.trials:
            raise InvalidCounts(f"successes must lie in [0, {self.trials}], got {self.successes}")

    @property
    def failures(self) -> int:
        return self.trials - self.successes


@dataclass(frozen=True)
class TwoArmTable:
    arm_a: ArmCounts
    arm_b: ArmCounts
    labels: Tuple[Label, Label] = ("a", "b")

    def __post_init__(self) -> None:
        if len(self.labels) != 2 or self.labels[0] == self.labels[1]:
            raise LabelMismatch(f"a two-arm table needs two distinct labels, got {self.labels!r}")

    def arm(self, label: Label) -> ArmCounts:
        if label == self.labels[0]:
            return self.arm_a
        if label == self.labels[1]:
            return self.arm_b
        raise LabelMismatch(f"unknown arm {label!r}; arms are {self.labels!r}")

    def swapped(self) -> "TwoArmTable":
        return TwoArmTable(self.arm_b, self.arm_a, (self.labels[1], self.labels[0]))


@dataclass(frozen=True)
class StratifiedTable:
    strata: Tuple[Tuple[Label, TwoArmTable], ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "strata", tuple((str(z), t) for z, t in self.strata))
        if not self.strata:
            raise InvalidCounts("a stratified table needs at least one stratum")
        names = [z for z, _ in self.strata]
        if len(set(names)) != len(names):
            raise LabelMismatch(f"stratum labels must be distinct, got {names!r}")
        arms = {t.labels for _, t in self.strata}
        if len(arms) != 1:
            raise LabelMismatch(f"all strata must share the same arm labels, got {sorted(arms)!r}")

    @property
    def labels(self) -> Tuple[Label, Label]:
        return self.strata[0][1].labels

    @property
    def stratum_labels(self) -> Tuple[Label, ...]:
        return tuple(z for z, _ in self.strata)

    def tables(self) -> Tuple[TwoArmTable, ...]:
        return tuple(t for _, t in self.strata)


class TestMethod(str, Enum):
    __test__ = False

    PEARSON_CHI_SQUARED = "pearson_chi_squared"
    PEARSON_CHI_SQUARED_YATES = "pearson_chi_squared_yates"
    FISHER_EXACT_TWO_SIDED = "fisher_exact_two_sided"
    FISHER_EXACT_GREATER = "fisher_exact_greater"
    FISHER_EXACT_LESS = "fisher_exact_less"


@dataclass(frozen=True)
class TestResult:
    __test__ = False

    p_value: float
    method: TestMethod
    statistic: Optional[float] = None

    def __post_init__(self) -> None:
        if not 0.0 <= self.p_value <= 1.0:
            raise InvalidProbability(f"p-value outside [0, 1]: {self.p_value!r}")
        if self.statistic is not None and self.statistic < 0:
            raise InvalidProbability(f"chi-squared statistic must be >= 0: {self.statistic!r}")

    def to_dict(self, digits: int = 12) -> Dict[str, Any]:
        return {
            "method": self.method.value,
            "statistic": None if self.statistic is None else sig(self.statistic, digits),
            "p_value": sig(self.p_value, digits),
        }


@dataclass(frozen=True)
class ReversalReport:
    labels: Tuple[Label, Label]
    stratum_labels: Tuple[Label, ...]
    per_stratum_rates: Tuple[Tuple[Fraction, Fraction], ...]
    per_stratum_direction: Tuple[Direction, ...]
    pooled_rates: Tuple[Fraction, Fraction]
    pooled_direction: Direction
    reversal: bool
    note: Optional[str] = None

    def to_dict(self, digits: int = 12) -> Dict[str, Any]:
        def pair(rates: Tuple[Fraction, Fraction]) -> Dict[str, Any]:
            return {
                label: {"exact": exact(r), "decimal": sig(r, digits)}
                for label, r in zip(self.labels, rates)
            }

        return {
            "arms": list(self.labels),
            "strata": [
                {"stratum": z, "rates": pair(r), "direction": d}
                for z, r, d in zip(
                    self.stratum_labels, self.per_stratum_rates, self.per_stratum_direction
                )
            ],
            "pooled": {"rates": pair(self.pooled_rates), "direction": self.pooled_direction},
            "reversal": self.reversal,
            "note": self.note,
        }


# ---------------------------------------------------------------------------
# Rates and pooling
# ---------------------------------------------------------------------------


def rate(c: ArmCounts) -> Fraction:
    return Fraction(c.successes, c.trials)


def rate_decimal(c: ArmCounts, places: int = 3) -> str:
    """``rate(c)`` rendered half-to-even, e.g. 81/87 -> '0.931'."""
    return render_decimal(rate(c), places)


def pool(strata: StratifiedTable) -> TwoArmTable:
    def total(arms: Iterable[ArmCounts]) -> ArmCounts:
        arms = list(arms)
        return ArmCounts(sum(a.successes for a in arms), sum(a.trials for a in arms))

    tables = strata.tables()
    return TwoArmTable(
        total(t.arm_a for t in tables), total(t.arm_b for t in tables), strata.labels
    )


def _direction(x: Fraction, y: Fraction) -> Direction:
    if x > y:
        return 1
    if x < y:
        return -1
    return 0


# ---------------------------------------------------------------------------
# Reversal
# ---------------------------------------------------------------------------


def detect_reversal(strata: StratifiedTable) -> ReversalReport:
    per_rates = tuple((rate(t.arm_a), rate(t.arm_b)) for t in strata.tables())
    per_dir = tuple(_direction(a, b) for a, b in per_rates)
    pooled = pool(strata)
    pooled_rates = (rate(pooled.arm_a), rate(pooled.arm_b))
    pooled_dir = _direction(*pooled_rates)

    note = None
    if len(per_dir) < 2:
        reversal = False
        note = "single stratum: pooling cannot reverse a direction"
    else:
        first = per_dir[0]
        reversal = first != 0 and all(d == first for d in per_dir) and pooled_dir == -first

    return ReversalReport(
        labels=strata.labels,
        stratum_labels=strata.stratum_labels,
        per_stratum_rates=per_rates,
        per_stratum_direction=per_dir,
        pooled_rates=pooled_rates,
        pooled_direction=pooled_dir,
        reversal=reversal,
        note=note,
    )


def reversal_condition(
    a1: int, b1: int, c1: int, d1: int, a2: int, b2: int, c2: int, d2: int
) -> bool:
    """
    True iff a1/b1 > c1/d1 and a2/b2 > c2/d2 while (c1+c2)/(d1+d2) > (a1+a2)/(b1+b2).

    All comparisons are integer cross-multiplications.
    """
    for num, den in ((a1, b1), (c1, d1), (a2, b2), (c2, d2)):
        if den < 1 or not 0 <= num <= den:
            raise InvalidCounts(f"need 0 <= numerator <= denominator >= 1, got {num}/{den}")
    return (
        a1 * d1 > c1 * b1
        and a2 * d2 > c2 * b2
        and (c1 + c2) * (b1 + b2) > (a1 + a2) * (d1 + d2)
    )


# ---------------------------------------------------------------------------
# Significance tests
# ---------------------------------------------------------------------------


def _cells(t: TwoArmTable) -> List[List[int]]:
    return [[t.arm_a.successes, t.arm_a.failures], [t.arm_b.successes, t.arm_b.failures]]


def _check_margins(t: TwoArmTable) -> None:
    successes = t.arm_a.successes + t.arm_b.successes
    failures = t.arm_a.failures + t.arm_b.failures
    if successes == 0 or failures == 0:
        raise DegenerateTable(
            f"column margin is zero (successes={successes}, failures={failures}); "
            "expected counts vanish"
        )


def chi_squared(t: TwoArmTable, *, yates: bool = False) -> TestResult:
    """Pearson chi-squared on the 2x2 success/failure table, 1 degree of freedom."""
    _check_margins(t)
    obs = _cells(t)
    rows = [sum(r) for r in obs]
    cols = [obs[0][j] + obs[1][j] for j in range(2)]
    n = sum(rows)

    statistic = Fraction(0)
    for i in range(2):
        for j in range(2):
            e = Fraction(rows[i] * cols[j], n)
            dev = abs(obs[i][j] - e)
            if yates:
                dev = max(Fraction(0), dev - Fraction(1, 2))
            statistic += dev * dev / e

    stat = float(statistic)
    p = 1.0 if statistic == 0 else float(stats.chi2.sf(stat, 1))
    method = TestMethod.PEARSON_CHI_SQUARED_YATES if yates else TestMethod.PEARSON_CHI_SQUARED
    return TestResult(p_value=min(1.0, max(0.0, p)), method=method, statistic=stat)


def hypergeometric_weights(t: TwoArmTable) -> Dict[int, int]:
    """
    Integer weight C(n_a, x) * C(n_b, K - x) for every feasible arm-A success count x.

    Dividing by C(N, K) gives the hypergeometric point probability of that table.
    """
    n_a, n_b = t.arm_a.trials, t.arm_b.trials
    k = t.arm_a.successes + t.arm_b.successes
    lo, hi = max(0, k - n_b), min(k, n_a)
    return {x: math.comb(n_a, x) * math.comb(n_b, k - x) for x in range(lo, hi + 1)}


def fisher_exact(t: TwoArmTable, *, alternative: str = "two-sided") -> TestResult:
    """
    Fisher's exact test on the 2x2 success/failure table.

    two-sided: sum over tables whose point probability is <= the observed one
    (relative slack 1e-12). greater/less: P(X >= x_obs) / P(X <= x_obs) where X
    counts arm-A successes.
    """
    _check_margins(t)
    weights = hypergeometric_weights(t)
    n = t.arm_a.trials + t.arm_b.trials
    total = math.comb(n, t.arm_a.successes + t.arm_b.successes)
    x_obs = t.arm_a.successes

    if alternative == "two-sided":
        cutoff = weights[x_obs] * (1 + FISHER_RELATIVE_TOLERANCE)
        mass = sum(w for w in weights.values() if w <= cutoff)
        method = TestMethod.FISHER_EXACT_TWO_SIDED
    elif alternative == "greater":
        mass = sum(w for x, w in weights.items() if x >= x_obs)
        method = TestMethod.FISHER_EXACT_GREATER
    elif alternative == "less":
        mass = sum(w for x, w in weights.items() if x <= x_obs)
        method = TestMethod.FISHER_EXACT_LESS
    else:
        raise ValueError("alternative must be 'two-sided', 'greater' or 'less'")

    return TestResult(p_value=min(1.0, float(Fraction(mass, total))), method=method)


# ---------------------------------------------------------------------------
# Back-door adjustment
# ---------------------------------------------------------------------------


def backdoor_adjust(strata: StratifiedTable, arm: Label) -> Fraction:
    """
    Interventional success rate of ``arm`` with the stratum variable as back-door set:
    sum_z rate(arm, z) * (subjects in z) / (all subjects).
    """
    if arm not in strata.labels:
        raise LabelMismatch(f"unknown arm {arm!r}; arms are {strata.labels!r}")
    tables = strata.tables()
    grand = sum(t.arm_a.trials + t.arm_b.trials for t in tables)
    return sum(
        (rate(t.arm(arm)) * Fraction(t.arm_a.trials + t.arm_b.trials, grand) for t in tables),
        Fraction(0),
    )


def stratified_from_rows(
    rows: Sequence[Tuple[Label, Label, int, int]], labels: Optional[Tuple[Label, Label]] = None
) -> StratifiedTable:
    """
    Build a StratifiedTable from ``(stratum, arm, successes, trials)`` rows.

    Strata keep first-appearance order; arm order follows ``labels`` or first appearance.
    """
    arms: List[Label] = list(labels) if labels else []
    by_stratum: Dict[Label, Dict[Label, ArmCounts]] = {}
    for z, arm, s, n in rows:
        if arm not in arms:
            arms.append(arm)
        cell = by_stratum.setdefault(z, {})
        if arm in cell:
            raise LabelMismatch(f"duplicate arm {arm!r} in stratum {z!r}")
        cell[arm] = ArmCounts(s, n)
    if len(arms) != 2:
        raise LabelMismatch(f"expected exactly two arms, got {arms!r}")
    strata = []
    for z, cell in by_stratum.items():
        missing = [a for a in arms if a not in cell]
        if missing:
            raise LabelMismatch(f"stratum {z!r} lacks arm(s) {missing!r}")
        strata.append((z, TwoArmTable(cell[arms[0]], cell[arms[1]], (arms[0], arms[1]))))
    return StratifiedTable(tuple(strata))


__all__ = [
    "ArmCounts",
    "TwoArmTable",
    "StratifiedTable",
    "TestMethod",
    "TestResult",
    "ReversalReport",
    "rate",
    "rate_decimal",
    "pool",
    "detect_reversal",
    "reversal_condition",
    "chi_squared",
    "hypergeometric_weights",
    "fisher_exact",
    "backdoor_adjust",
    "stratified_from_rows",
]
