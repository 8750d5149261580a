"""
Quantum prospect model of the disjunction effect.

The prospect of a two-outcome gamble is a unit vector over the ordered basis
|loss>, |win>. Its reference position is the superposition with zero expected
utility. Learning the outcome of a previous play resets the vector to that
reference; playing on without learning it rotates the vector toward |loss>.

Acceptance of the next gamble is the quadratic form <s|E|s> of a 2x2 effect
operator E (0 <= E <= I). The diagonal of E holds the acceptance rates with a
known outcome; the off-diagonal entry is the interference term, and only a
nonzero interference term can push acceptance below both known-outcome rates.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Any, Dict, List, Optional, Tuple

import numpy as np
from scipy.optimize import brentq

from .errors import InfeasibleCalibration, InputError, InvalidEffect, InvalidProbability
from .quantum_belief import NORM_TOLERANCE, BeliefState, rotate2
from .render import as_fraction, exact, sig

BASIS = ("loss", "win")

# Positive angles increase the loss amplitude (the reference arrow turns clockwise).
ROTATION_CONVENTION = "positive theta rotates toward |loss>"

EFFECT_TOLERANCE = 1e-12


class ObservationMode(str, Enum):
    RESET = "reset"
    FREEZE = "freeze"


@dataclass(frozen=True)
class Gamble:
    win_payoff: Fraction
    loss_payoff: Fraction
    stated_win_chance: float = 0.5

    def __post_init__(self) -> None:
        win, loss = as_fraction(self.win_payoff), as_fraction(self.loss_payoff)
        if not win > 0 > loss:
            raise InputError(f"need win_payoff > 0 > loss_payoff, got {win} and {loss}")
        if not 0.0 <= float(self.stated_win_chance) <= 1.0:
            raise InvalidProbability("stated_win_chance must lie in [0, 1]")
        object.__setattr__(self, "win_payoff", win)
        object.__setattr__(self, "loss_payoff", loss)
        object.__setattr__(self, "stated_win_chance", float(self.stated_win_chance))


@dataclass(frozen=True)
class ProspectState:
    amplitude_loss: float
    amplitude_win: float

    def __post_init__(self) -> None:
        a_l, a_w = float(self.amplitude_loss), float(self.amplitude_win)
        if abs(a_l * a_l + a_w * a_w - 1.0) > NORM_TOLERANCE:
            raise InvalidProbability(f"prospect state must have unit norm, got ({a_l}, {a_w})")
        object.__setattr__(self, "amplitude_loss", a_l)
        object.__setattr__(self, "amplitude_win", a_w)

    def as_belief(self) -> BeliefState:
        return BeliefState(BASIS, (self.amplitude_loss, self.amplitude_win))

    @classmethod
    def from_belief(cls, state: BeliefState) -> "ProspectState":
        return cls(state.amplitude("loss"), state.amplitude("win"))

    def to_dict(self, digits: int = 12) -> Dict[str, Any]:
        return {
            "amplitude_loss": sig(self.amplitude_loss, digits),
            "amplitude_win": sig(self.amplitude_win, digits),
            "p_loss": sig(self.amplitude_loss**2, digits),
            "p_win": sig(self.amplitude_win**2, digits),
        }


@dataclass(frozen=True)
class AcceptanceData:
    accept_given_win: float
    accept_given_loss: float
    accept_unknown: float

    def __post_init__(self) -> None:
        for name in ("accept_given_win", "accept_given_loss", "accept_unknown"):
            v = float(getattr(self, name))
            if not 0.0 <= v <= 1.0:
                raise InvalidProbability(f"{name} must lie in [0, 1], got {v!r}")
            object.__setattr__(self, name, v)


def effect_eigenvalues(diag_loss: float, diag_win: float, off_diag: float) -> Tuple[float, float]:
    lo, hi = np.linalg.eigvalsh(np.array([[diag_loss, off_diag], [off_diag, diag_win]]))
    return float(lo), float(hi)


def _is_effect(diag_loss: float, diag_win: float, off_diag: float) -> bool:
    # E >= 0 and I - E >= 0, each via trace and determinant of a symmetric 2x2
    det = diag_loss * diag_win - off_diag * off_diag
    c_loss, c_win = 1.0 - diag_loss, 1.0 - diag_win
    det_c = c_loss * c_win - off_diag * off_diag
    return (
        diag_loss + diag_win >= -EFFECT_TOLERANCE
        and det >= -EFFECT_TOLERANCE
        and c_loss + c_win >= -EFFECT_TOLERANCE
        and det_c >= -EFFECT_TOLERANCE
        and min(diag_loss, diag_win) >= -EFFECT_TOLERANCE
        and max(diag_loss, diag_win) <= 1.0 + EFFECT_TOLERANCE
    )


@dataclass(frozen=True)
class EffectOperator:
    diag_loss: float
    diag_win: float
    off_diag: float = 0.0

    def __post_init__(self) -> None:
        dl, dw, o = float(self.diag_loss), float(self.diag_win), float(self.off_diag)
        if not _is_effect(dl, dw, o):
            lo, hi = effect_eigenvalues(dl, dw, o)
            raise InvalidEffect(f"eigenvalues [{lo:.6g}, {hi:.6g}] must lie in [0, 1]")
        object.__setattr__(self, "diag_loss", dl)
        object.__setattr__(self, "diag_win", dw)
        object.__setattr__(self, "off_diag", o)

    def matrix(self) -> np.ndarray:
        return np.array([[self.diag_loss, self.off_diag], [self.off_diag, self.diag_win]])

    def eigenvalues(self) -> Tuple[float, float]:
        return effect_eigenvalues(self.diag_loss, self.diag_win, self.off_diag)

    def to_dict(self, digits: int = 12) -> Dict[str, Any]:
        lo, hi = self.eigenvalues()
        return {
            "diag_loss": sig(self.diag_loss, digits),
            "diag_win": sig(self.diag_win, digits),
            "off_diag": sig(self.off_diag, digits),
            "eigenvalues": [sig(lo, digits), sig(hi, digits)],
        }


# ---------------------------------------------------------------------------
# Reference state and utility
# ---------------------------------------------------------------------------


def reference_probabilities(g: Gamble) -> Tuple[Fraction, Fraction]:
    """(p_loss, p_win) with p_loss * loss + p_win * win == 0 exactly."""
    span = g.win_payoff - g.loss_payoff
    return g.win_payoff / span, -g.loss_payoff / span


def reference_state(g: Gamble) -> ProspectState:
    p_loss, p_win = reference_probabilities(g)
    return ProspectState(math.sqrt(p_loss), math.sqrt(p_win))


def expected_utility(s: ProspectState, g: Gamble) -> float:
    return s.amplitude_loss**2 * float(g.loss_payoff) + s.amplitude_win**2 * float(g.win_payoff)


def observe_reset(s: ProspectState, g: Gamble) -> ProspectState:
    return reference_state(g)


def observe(
    s: ProspectState, g: Gamble, mode: ObservationMode = ObservationMode.RESET
) -> ProspectState:
    """State after the outcome of a play is revealed; ``freeze`` keeps the state in place."""
    if ObservationMode(mode) is ObservationMode.FREEZE:
        return s
    return observe_reset(s, g)


# ---------------------------------------------------------------------------
# Unrevealed evolution
# ---------------------------------------------------------------------------


def angle_to_loss_axis(s: ProspectState) -> float:
    return math.atan2(s.amplitude_win, s.amplitude_loss)


def evolve_unrevealed(s: ProspectState, theta_per_round: float, rounds: int) -> ProspectState:
    if theta_per_round < 0:
        raise InputError(f"theta_per_round must be >= 0, got {theta_per_round!r}")
    if isinstance(rounds, bool) or not isinstance(rounds, int) or rounds < 0:
        raise InputError(f"rounds must be a nonnegative integer, got {rounds!r}")
    # Rotations compose additively: one turn by the total angle.
    if rounds == 0:
        return s
    return ProspectState.from_belief(rotate2(s.as_belief(), theta_per_round * rounds))


@dataclass(frozen=True)
class TrajectoryPoint:
    round: int
    state: ProspectState
    utility: float
    acceptance: Optional[float] = None

    def to_dict(self, digits: int = 12) -> Dict[str, Any]:
        return {
            "round": self.round,
            "state": self.state.to_dict(digits),
            "utility": sig(self.utility, digits),
            "acceptance": None if self.acceptance is None else sig(self.acceptance, digits),
        }


def trajectory(
    s: ProspectState,
    g: Gamble,
    theta_per_round: float,
    rounds: int,
    effect: Optional[EffectOperator] = None,
) -> List[TrajectoryPoint]:
    """States after 0..rounds unrevealed plays, with utility and optional acceptance."""
    points = []
    for k in range(rounds + 1):
        state = evolve_unrevealed(s, theta_per_round, k)
        acc = acceptance_probability(state, effect) if effect is not None else None
        points.append(TrajectoryPoint(k, state, expected_utility(state, g), acc))
    return points


# ---------------------------------------------------------------------------
# Acceptance and calibration
# ---------------------------------------------------------------------------


def acceptance_probability(s: ProspectState, e: EffectOperator) -> float:
    """<s|E|s>."""
    if not isinstance(e, EffectOperator):
        raise InvalidEffect(f"expected an EffectOperator, got {type(e).__name__}")
    a_l, a_w = s.amplitude_loss, s.amplitude_win
    return e.diag_loss * a_l * a_l + e.diag_win * a_w * a_w + 2.0 * e.off_diag * a_l * a_w


def interference_free_acceptance(d: AcceptanceData, s: ProspectState) -> float:
    return d.accept_given_loss * s.amplitude_loss**2 + d.accept_given_win * s.amplitude_win**2


def calibrate_effect(d: AcceptanceData, s_ref: ProspectState) -> EffectOperator:
    """
    Effect whose diagonal reproduces the known-outcome rates and whose off-diagonal
    makes <s_ref|E|s_ref> equal ``accept_unknown``.

    Raises InfeasibleCalibration when that matrix is not an effect.
    """
    a_l, a_w = s_ref.amplitude_loss, s_ref.amplitude_win
    if a_l <= 0 or a_w <= 0:
        raise InputError("calibration needs a reference state with both amplitudes > 0")
    dl, dw = d.accept_given_loss, d.accept_given_win
    off = (d.accept_unknown - interference_free_acceptance(d, s_ref)) / (2.0 * a_l * a_w)
    if not _is_effect(dl, dw, off):
        raise InfeasibleCalibration(effect_eigenvalues(dl, dw, off), off)
    return EffectOperator(dl, dw, off)


def matching_angle(g: Gamble, d: AcceptanceData) -> Optional[float]:
    """
    Smallest rotation from the reference, up to the loss axis, at which the
    interference-free effect accepts with probability ``accept_unknown``.

    None when no such angle exists (always the case for a genuine disjunction effect).
    """
    ref = reference_state(g)
    e0 = EffectOperator(d.accept_given_loss, d.accept_given_win, 0.0)
    limit = angle_to_loss_axis(ref)

    def gap(theta: float) -> float:
        return acceptance_probability(evolve_unrevealed(ref, theta, 1), e0) - d.accept_unknown

    g0, g1 = gap(0.0), gap(limit)
    if abs(g0) <= EFFECT_TOLERANCE:
        return 0.0
    if abs(g1) <= EFFECT_TOLERANCE:
        return limit
    if g0 * g1 > 0:
        return None
    return float(brentq(gap, 0.0, limit, xtol=1e-14))


@dataclass(frozen=True)
class DisjunctionReport:
    gamble: Gamble
    data: AcceptanceData
    reference: ProspectState
    reference_probabilities: Tuple[Fraction, Fraction]
    classical_bound: Tuple[float, float]
    interference_free_acceptance: float
    effect_present: bool
    eigenvalues: Tuple[float, float]
    off_diag: float
    effect: Optional[EffectOperator] = None
    infeasibility: Optional[str] = None

    @property
    def feasible(self) -> bool:
        return self.effect is not None

    def to_dict(self, digits: int = 12) -> Dict[str, Any]:
        p_loss, p_win = self.reference_probabilities
        return {
            "gamble": {
                "win": sig(self.gamble.win_payoff, digits),
                "loss": sig(self.gamble.loss_payoff, digits),
                "stated_win_chance": sig(self.gamble.stated_win_chance, digits),
            },
            "reference": {
                **self.reference.to_dict(digits),
                "p_loss_exact": exact(p_loss),
                "p_win_exact": exact(p_win),
                "utility": sig(expected_utility(self.reference, self.gamble), digits),
            },
            "classical_bound": [sig(x, digits) for x in self.classical_bound],
            "accept_unknown": sig(self.data.accept_unknown, digits),
            "interference_free_acceptance": sig(self.interference_free_acceptance, digits),
            "effect_present": self.effect_present,
            "feasible": self.feasible,
            "off_diag": sig(self.off_diag, digits),
            "eigenvalues": [sig(x, digits) for x in self.eigenvalues],
            "effect": None if self.effect is None else self.effect.to_dict(digits),
            "infeasibility": self.infeasibility,
            "rotation_convention": ROTATION_CONVENTION,
        }


def disjunction_report(g: Gamble, d: AcceptanceData) -> DisjunctionReport:
    ref = reference_state(g)
    lo = min(d.accept_given_win, d.accept_given_loss)
    hi = max(d.accept_given_win, d.accept_given_loss)
    mixture = interference_free_acceptance(d, ref)
    effect: Optional[EffectOperator] = None
    reason: Optional[str] = None
    try:
        effect = calibrate_effect(d, ref)
        off = effect.off_diag
        eigs = effect.eigenvalues()
    except InfeasibleCalibration as exc:
        reason = str(exc)
        off = exc.off_diag
        eigs = exc.eigenvalues
    return DisjunctionReport(
        gamble=g,
        data=d,
        reference=ref,
        reference_probabilities=reference_probabilities(g),
        classical_bound=(lo, hi),
        interference_free_acceptance=mixture,
        effect_present=d.accept_unknown < lo,
        eigenvalues=eigs,
        off_diag=off,
        effect=effect,
        infeasibility=reason,
    )



__all__ = [
    "BASIS",
    "ROTATION_CONVENTION",
    "ObservationMode",
    "Gamble",
    "ProspectState",
    "AcceptanceData",
    "EffectOperator",
    "TrajectoryPoint",
    "DisjunctionReport",
    "effect_eigenvalues",
    "reference_probabilities",
    "reference_state",
    "expected_utility",
    "observe_reset",
    "observe",
    "angle_to_loss_axis",
    "evolve_unrevealed",
    "trajectory",
    "acceptance_probability",
    "interference_free_acceptance",
    "calibrate_effect",
    "matching_angle",
    "disjunction_report",
]
