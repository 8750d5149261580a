from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Dict, Optional, Sequence, Tuple

import numpy as np

from .contingency import ArmCounts, TwoArmTable, rate
from .errors import AllZero, DimensionError, InvalidProbability, LabelMismatch, ZeroMarginal
from .render import as_fraction, exact, sig
from .types import Label, RationalLike

NORM_TOLERANCE = 1e-12

Grid = Tuple[Tuple[Fraction, ...], ...]


def _grid(values: Sequence[Sequence[RationalLike]], rows: int, cols: int) -> Grid:
    if len(values) != rows or any(len(r) != cols for r in values):
        raise DimensionError(f"expected a {rows}x{cols} grid")
    return tuple(tuple(as_fraction(v) for v in r) for r in values)


def _labels(labels: Sequence[Label], kind: str) -> Tuple[Label, ...]:
    out = tuple(str(x) for x in labels)
    if not out:
        raise LabelMismatch(f"at least one {kind} label is required")
    if len(set(out)) != len(out):
        raise LabelMismatch(f"{kind} labels must be distinct, got {out!r}")
    return out


def joint_outcome_labels(rows: Sequence[Label], cols: Sequence[Label]) -> Tuple[Label, ...]:
    """Row-major outcome labels: ``row + col``, or ``row|col`` when those clash."""
    plain = tuple(r + c for r in rows for c in cols)
    if len(set(plain)) == len(plain):
        return plain
    return tuple(f"{r}|{c}" for r in rows for c in cols)


@dataclass(frozen=True)
class RawFractionGrid:
    rows: Tuple[Label, ...]
    cols: Tuple[Label, ...]
    fractions: Grid
    counts: Optional[Tuple[Tuple[Tuple[int, int], ...], ...]] = None

    def __post_init__(self) -> None:
        rows, cols = _labels(self.rows, "row"), _labels(self.cols, "column")
        object.__setattr__(self, "rows", rows)
        object.__setattr__(self, "cols", cols)
        object.__setattr__(self, "fractions", _grid(self.fractions, len(rows), len(cols)))
        for r in self.fractions:
            for v in r:
                if not 0 <= v <= 1:
                    raise InvalidProbability(f"improvement fraction outside [0, 1]: {v}")
        if self.counts is not None:
            counts = tuple(tuple((int(s), int(t)) for s, t in r) for r in self.counts)
            if len(counts) != len(rows) or any(len(r) != len(cols) for r in counts):
                raise DimensionError("counts must have the same shape as fractions")
            for r in counts:
                for s, t in r:
                    ArmCounts(s, t)
            object.__setattr__(self, "counts", counts)

    @classmethod
    def from_counts(
        cls,
        rows: Sequence[Label],
        cols: Sequence[Label],
        counts: Sequence[Sequence[Tuple[int, int]]],
    ) -> "RawFractionGrid":
        cells = [[ArmCounts(int(s), int(t)) for s, t in r] for r in counts]
        fractions = [[rate(c) for c in r] for r in cells]
        return cls(tuple(rows), tuple(cols), fractions, counts)


@dataclass(frozen=True)
class JointOutcomeTable:
    rows: Tuple[Label, ...]
    cols: Tuple[Label, ...]
    probabilities: Grid

    def __post_init__(self) -> None:
        rows, cols = _labels(self.rows, "row"), _labels(self.cols, "column")
        object.__setattr__(self, "rows", rows)
        object.__setattr__(self, "cols", cols)
        probs = _grid(self.probabilities, len(rows), len(cols))
        object.__setattr__(self, "probabilities", probs)
        if any(p < 0 for r in probs for p in r):
            raise InvalidProbability("joint probabilities must be >= 0")
        total = sum((p for r in probs for p in r), Fraction(0))
        if abs(float(total - 1)) > NORM_TOLERANCE:
            raise InvalidProbability(f"joint probabilities must sum to 1, got {float(total)!r}")

    def p(self, row: Label, col: Label) -> Fraction:
        try:
            return self.probabilities[self.rows.index(row)][self.cols.index(col)]
        except ValueError:
            raise LabelMismatch(f"no cell ({row!r}, {col!r})") from None

    def row_marginal(self, row: Label) -> Fraction:
        if row not in self.rows:
            raise LabelMismatch(f"unknown row {row!r}")
        return sum(self.probabilities[self.rows.index(row)], Fraction(0))

    def col_marginal(self, col: Label) -> Fraction:
        if col not in self.cols:
            raise LabelMismatch(f"unknown column {col!r}")
        j = self.cols.index(col)
        return sum((r[j] for r in self.probabilities), Fraction(0))

    @property
    def is_square(self) -> bool:
        return self.rows == self.cols

    def outcome_labels(self) -> Tuple[Label, ...]:
        return joint_outcome_labels(self.rows, self.cols)

    def to_dict(self, digits: int = 12) -> Dict[str, Any]:
        return {
            "rows": list(self.rows),
            "cols": list(self.cols),
            "probabilities": [[sig(p, digits) for p in r] for r in self.probabilities],
            "exact": [[exact(p) for p in r] for r in self.probabilities],
        }


@dataclass(frozen=True)
class BeliefState:
    labels: Tuple[Label, ...]
    amplitudes: Tuple[float, ...]

    def __post_init__(self) -> None:
        labels = _labels(self.labels, "outcome")
        amps = tuple(float(a) for a in self.amplitudes)
        if len(amps) != len(labels):
            raise DimensionError(f"{len(labels)} labels but {len(amps)} amplitudes")
        norm2 = math.fsum(a * a for a in amps)
        if abs(norm2 - 1.0) > NORM_TOLERANCE:
            raise InvalidProbability(f"amplitudes must have unit norm, got squared norm {norm2!r}")
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "amplitudes", amps)

    def amplitude(self, label: Label) -> float:
        try:
            return self.amplitudes[self.labels.index(label)]
        except ValueError:
            raise LabelMismatch(
                f"unknown outcome {label!r}; outcomes are {self.labels!r}"
            ) from None

    def as_array(self) -> np.ndarray:
        return np.asarray(self.amplitudes, dtype=float)

    def to_dict(self, digits: int = 12) -> Dict[str, Any]:
        return {
            "labels": list(self.labels),
            "amplitudes": [sig(a, digits) for a in self.amplitudes],
            "probabilities": [sig(a * a, digits) for a in self.amplitudes],
        }


@dataclass(frozen=True)
class QuantumTree:
    rows: Tuple[Label, ...]
    cols: Tuple[Label, ...]
    marginals: Tuple[Fraction, ...]
    conditionals: Grid

    def __post_init__(self) -> None:
        if abs(float(sum(self.marginals, Fraction(0)) - 1)) > NORM_TOLERANCE:
            raise InvalidProbability("stage-1 marginals must sum to 1")
        for row, cond in zip(self.rows, self.conditionals):
            if abs(float(sum(cond, Fraction(0)) - 1)) > NORM_TOLERANCE:
                raise InvalidProbability(f"conditionals of row {row!r} must sum to 1")

    def marginal(self, row: Label) -> Fraction:
        if row not in self.rows:
            raise LabelMismatch(f"unknown row {row!r}")
        return self.marginals[self.rows.index(row)]

    def conditional(self, col: Label, row: Label) -> Fraction:
        """P(stage-2 = col | stage-1 = row)."""
        if row not in self.rows or col not in self.cols:
            raise LabelMismatch(f"no branch ({row!r} -> {col!r})")
        return self.conditionals[self.rows.index(row)][self.cols.index(col)]

    def to_dict(self, digits: int = 12) -> Dict[str, Any]:
        return {
            "stage1": [
                {
                    "outcome": row,
                    "probability": sig(m, digits),
                    "exact": exact(m),
                    "stage2": [
                        {"outcome": col, "probability": sig(c, digits), "exact": exact(c)}
                        for col, c in zip(self.cols, cond)
                    ],
                }
                for row, m, cond in zip(self.rows, self.marginals, self.conditionals)
            ]
        }


@dataclass(frozen=True)
class SurveyOrderData:
    """Response rate of each item when asked first and when asked second."""

    items: Tuple[Label, Label]
    rate_first: Tuple[Fraction, Fraction]
    rate_second: Tuple[Fraction, Fraction]

    def __post_init__(self) -> None:
        items = _labels(self.items, "item")
        if len(items) != 2:
            raise DimensionError("survey order data covers exactly two items")
        first = tuple(as_fraction(x) for x in self.rate_first)
        second = tuple(as_fraction(x) for x in self.rate_second)
        if len(first) != 2 or len(second) != 2:
            raise DimensionError("one rate per item and order is required")
        if any(not 0 <= x <= 1 for x in first + second):
            raise InvalidProbability("response rates must lie in [0, 1]")
        object.__setattr__(self, "items", items)
        object.__setattr__(self, "rate_first", first)
        object.__setattr__(self, "rate_second", second)


# ---------------------------------------------------------------------------
# Construction
# ---------------------------------------------------------------------------


def normalize_fractions(raw: RawFractionGrid) -> JointOutcomeTable:
    """Divide every improvement fraction by the grid total (not by patient counts)."""
    total = sum((v for r in raw.fractions for v in r), Fraction(0))
    if total == 0:
        raise AllZero("every improvement fraction is zero; nothing to normalize")
    return JointOutcomeTable(raw.rows, raw.cols, [[v / total for v in r] for r in raw.fractions])


def product_joint(
    rows: Sequence[Label],
    cols: Sequence[Label],
    row_marginals: Sequence[RationalLike],
    col_marginals: Sequence[RationalLike],
) -> JointOutcomeTable:
    """The classical two-stage experiment: stages independent, joint = p(row) * q(col)."""
    p = [as_fraction(x) for x in row_marginals]
    q = [as_fraction(x) for x in col_marginals]
    return JointOutcomeTable(tuple(rows), tuple(cols), [[pi * qj for qj in q] for pi in p])


def state_from_joint(joint: JointOutcomeTable) -> BeliefState:
    amps = [math.sqrt(p) for r in joint.probabilities for p in r]
    return BeliefState(joint.outcome_labels(), tuple(amps))


def build_tree(joint: JointOutcomeTable) -> QuantumTree:
    marginals = []
    conditionals = []
    for row, cells in zip(joint.rows, joint.probabilities):
        m = sum(cells, Fraction(0))
        if m == 0:
            raise ZeroMarginal(row)
        marginals.append(m)
        conditionals.append(tuple(c / m for c in cells))
    return QuantumTree(joint.rows, joint.cols, tuple(marginals), tuple(conditionals))


def row_table(raw: RawFractionGrid, row: Label) -> TwoArmTable:
    """Improvement counts of one stage-1 row as a two-arm table (columns become arms)."""
    if raw.counts is None:
        raise LabelMismatch("grid carries no source counts")
    if len(raw.cols) != 2:
        raise DimensionError("a row table needs exactly two stage-2 columns")
    if row not in raw.rows:
        raise LabelMismatch(f"unknown row {row!r}")
    (s1, t1), (s2, t2) = raw.counts[raw.rows.index(row)]
    return TwoArmTable(ArmCounts(s1, t1), ArmCounts(s2, t2), (raw.cols[0], raw.cols[1]))


# ---------------------------------------------------------------------------
# Order and dependence metrics
# ---------------------------------------------------------------------------


def _require_square(joint: JointOutcomeTable, *labels: Label) -> None:
    if not joint.is_square:
        raise LabelMismatch(
            f"stage-1 labels {joint.rows!r} differ from stage-2 labels {joint.cols!r}"
        )
    for x in labels:
        if x not in joint.rows:
            raise LabelMismatch(f"unknown label {x!r}")


def order_effect(joint: JointOutcomeTable, first: Label, second: Label) -> Fraction:
    """P(first, second) - P(second, first); nonzero means the order matters."""
    _require_square(joint, first, second)
    return joint.p(first, second) - joint.p(second, first)


def independence_defect(joint: JointOutcomeTable, label: Label) -> Fraction:
    """P(label, label) - P(label)^2 with P(label) the stage-1 marginal."""
    _require_square(joint, label)
    m = joint.row_marginal(label)
    return joint.p(label, label) - m * m


# ---------------------------------------------------------------------------
# States
# ---------------------------------------------------------------------------


def measure(state: BeliefState, outcome: Label) -> float:
    a = state.amplitude(outcome)
    return a * a


def rotation_matrix(theta: float) -> np.ndarray:
    """Positive theta moves amplitude toward the first basis vector."""
    c, s = math.cos(theta), math.sin(theta)
    return np.array([[c, s], [-s, c]])


def rotate2(state: BeliefState, theta: float) -> BeliefState:
    if len(state.amplitudes) != 2:
        raise DimensionError(f"rotate2 needs a 2-outcome state, got {len(state.amplitudes)}")
    a = rotation_matrix(theta) @ state.as_array()
    return BeliefState(state.labels, (float(a[0]), float(a[1])))


def survey_order_shift(data: SurveyOrderData) -> Dict[Label, Fraction]:
    """Per item: rate when asked second minus rate when asked first."""
    return {
        item: second - first
        for item, first, second in zip(data.items, data.rate_first, data.rate_second)
    }


__all__ = [
    "RawFractionGrid",
    "JointOutcomeTable",
    "BeliefState",
    "QuantumTree",
    "SurveyOrderData",
    "joint_outcome_labels",
    "normalize_fractions",
    "product_joint",
    "state_from_joint",
    "build_tree",
    "row_table",
    "order_effect",
    "independence_defect",
    "measure",
    "rotation_matrix",
    "rotate2",
    "survey_order_shift",
]
