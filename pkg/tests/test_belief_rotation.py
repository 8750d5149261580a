import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from qbelief_core.errors import DimensionError
from qbelief_core.quantum_belief import BeliefState, rotate2, rotation_matrix

LABELS = ("loss", "win")


def _state(phi):
    return BeliefState(LABELS, (math.cos(phi), math.sin(phi)))


def test_zero_rotation_is_identity():
    s = _state(0.7)
    assert rotate2(s, 0.0) == s


def test_quarter_turn_moves_weight_to_first_outcome():
    s = rotate2(BeliefState(LABELS, (0.0, 1.0)), math.pi / 2)
    assert s.amplitudes[0] == pytest.approx(1.0, abs=1e-12)
    assert abs(s.amplitudes[1]) < 1e-12


def test_small_positive_rotation_increases_first_weight():
    s = _state(math.atan2(math.sqrt(1 / 3), math.sqrt(2 / 3)))
    turned = rotate2(s, 0.1)
    assert turned.amplitudes[0] ** 2 > s.amplitudes[0] ** 2


def test_rotation_matrix_is_orthogonal():
    r = rotation_matrix(1.234)
    np.testing.assert_allclose(r @ r.T, np.eye(2), atol=1e-15)
    assert np.linalg.det(r) == pytest.approx(1.0)


def test_rotate2_needs_two_outcomes():
    s = BeliefState(("a", "b", "c"), (1.0, 0.0, 0.0))
    with pytest.raises(DimensionError):
        rotate2(s, 0.1)


angles = st.floats(-10.0, 10.0, allow_nan=False)
phases = st.floats(0.0, 2 * math.pi, allow_nan=False)


@given(phases, angles)
def test_rotation_preserves_norm(phi, theta):
    s = rotate2(_state(phi), theta)
    assert abs(sum(a * a for a in s.amplitudes) - 1.0) <= 1e-12


@given(phases, angles, angles)
def test_rotations_compose_additively(phi, a, b):
    s = _state(phi)
    lhs = rotate2(rotate2(s, a), b).amplitudes
    rhs = rotate2(s, a + b).amplitudes
    assert lhs == pytest.approx(rhs, abs=1e-10)
