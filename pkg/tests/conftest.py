import os
from pathlib import Path

import pytest
from hypothesis import HealthCheck, settings

from qbelief_core.contingency import ArmCounts, StratifiedTable, TwoArmTable

settings.register_profile(
    "default", max_examples=1_000, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
# 10^4 randomized trials per property
settings.register_profile(
    "thorough", max_examples=10_000, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile(os.getenv("HYPOTHESIS_PROFILE", "default"))

FIXTURES = Path(__file__).parent / "fixtures"


def two_arm(a, b, labels=("a", "b")):
    return TwoArmTable(ArmCounts(*a), ArmCounts(*b), labels)


@pytest.fixture
def fixtures() -> Path:
    return FIXTURES


@pytest.fixture
def table1() -> StratifiedTable:
    labels = ("Treatment 1", "Treatment 2")
    return StratifiedTable(
        (
            ("Study 1", two_arm((81, 87), (234, 270), labels)),
            ("Study 2", two_arm((192, 263), (55, 80), labels)),
        )
    )


@pytest.fixture
def table2() -> StratifiedTable:
    labels = ("Treatment", "Control")
    return StratifiedTable(
        (
            ("Males", two_arm((18, 30), (7, 10), labels)),
            ("Females", two_arm((2, 10), (9, 30), labels)),
        )
    )
