from .contingency import (
    ArmCounts,
    StratifiedTable,
    TwoArmTable,
    backdoor_adjust,
    chi_squared,
    detect_reversal,
    fisher_exact,
    pool,
    rate,
    reversal_condition,
)
from .prospect import (
    AcceptanceData,
    EffectOperator,
    Gamble,
    ProspectState,
    acceptance_probability,
    calibrate_effect,
    disjunction_report,
    evolve_unrevealed,
    expected_utility,
    observe_reset,
    reference_state,
)
from .quantum_belief import (
    BeliefState,
    JointOutcomeTable,
    QuantumTree,
    RawFractionGrid,
    SurveyOrderData,
    build_tree,
    independence_defect,
    measure,
    normalize_fractions,
    order_effect,
    rotate2,
    state_from_joint,
    survey_order_shift,
)
from .stpetersburg import (
    StPetersburgSpec,
    bankroll_capped_ev,
    log_utility_fair_price,
    truncated_ev,
)

__all__ = [
    "ArmCounts",
    "TwoArmTable",
    "StratifiedTable",
    "rate",
    "pool",
    "detect_reversal",
    "reversal_condition",
    "chi_squared",
    "fisher_exact",
    "backdoor_adjust",
    "RawFractionGrid",
    "JointOutcomeTable",
    "BeliefState",
    "QuantumTree",
    "SurveyOrderData",
    "normalize_fractions",
    "state_from_joint",
    "build_tree",
    "order_effect",
    "independence_defect",
    "measure",
    "rotate2",
    "survey_order_shift",
    "Gamble",
    "ProspectState",
    "AcceptanceData",
    "EffectOperator",
    "reference_state",
    "expected_utility",
    "observe_reset",
    "evolve_unrevealed",
    "acceptance_probability",
    "calibrate_effect",
    "disjunction_report",
    "StPetersburgSpec",
    "truncated_ev",
    "bankroll_capped_ev",
    "log_utility_fair_price",
]

# Optional: expose the OTEL-traced runner if its imports resolve.
try:
    from .otel_runtime import run_traced_optional  # noqa: F401

    __all__.append("run_traced_optional")
except Exception:  # pragma: no cover - defensive fallback if OTEL deps are missing/broken
    pass

__version__ = "0.1.0"
