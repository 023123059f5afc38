import math

import numpy as np
import pytest

from src.data.models import PenaltyKind
from src.errors import ArgumentError
from src.path.penalties import (
    PenaltySpec,
    firm_threshold,
    penalty_derivative,
    penalty_value,
    soft_threshold,
)
from src.path.solver import _coordinate_minimizer


def test_defaults_and_gamma_checks():
    assert PenaltySpec.lasso().gamma == math.inf
    assert PenaltySpec(PenaltyKind.SCAD).gamma == 3.0
    assert PenaltySpec.build("mcp").gamma == 3.0
    with pytest.raises(ArgumentError):
        PenaltySpec.scad(2.0)
    with pytest.raises(ArgumentError):
        PenaltySpec.mcp(1.0)
    assert str(PenaltySpec.mcp(2.5)) == "mcp(gamma=2.5)"


@pytest.mark.parametrize("spec", [PenaltySpec.scad(3.7), PenaltySpec.mcp(3.0)])
def test_penalty_is_continuous_at_region_boundaries(spec):
    lam = 0.7
    for t in (lam, spec.gamma * lam):
        below = penalty_value(np.array([t - 1e-9]), lam, spec)[0]
        above = penalty_value(np.array([t + 1e-9]), lam, spec)[0]
        assert below == pytest.approx(above, abs=1e-8)


@pytest.mark.parametrize("spec", [PenaltySpec.lasso(), PenaltySpec.scad(3.0), PenaltySpec.mcp(3.0)])
@pytest.mark.parametrize("t", [0.5, 2.0, 4.0])
def test_derivative_matches_finite_difference(spec, t):
    lam, h = 1.0, 1e-6
    numeric = (penalty_value(np.array([t + h]), lam, spec) - penalty_value(np.array([t - h]), lam, spec)) / (2 * h)
    assert penalty_derivative(np.array([t]), lam, spec)[0] == pytest.approx(numeric[0], abs=1e-6)


def test_thresholds():
    np.testing.assert_allclose(soft_threshold(np.array([-2.0, 0.5, 3.0]), 1.0), [-1.0, 0.0, 2.0])
    np.testing.assert_allclose(firm_threshold(np.array([0.5, 2.0, -2.0, 5.0]), 1.0, 3.0), [0.0, 1.5, -1.5, 5.0])


@pytest.mark.parametrize("spec", [PenaltySpec.lasso(), PenaltySpec.scad(3.0), PenaltySpec.mcp(3.0), PenaltySpec.mcp(1.5)])
@pytest.mark.parametrize("v", [1.0, 0.25, 0.6])
@pytest.mark.parametrize("z", [-3.1, -0.4, 0.9, 1.7, 2.6, 6.0])
def test_coordinate_minimizer_matches_grid_search(spec, v, z):
    lam = 0.8
    grid = np.linspace(-30.0, 30.0, 600_001)
    objective = 0.5 * v * grid ** 2 - z * grid + penalty_value(grid, lam, spec)
    b = _coordinate_minimizer(z, v, lam, spec.code, spec.kernel_gamma)
    at_b = 0.5 * v * b ** 2 - z * b + penalty_value(np.array([b]), lam, spec)[0]
    assert at_b <= objective.min() + 1e-9


def test_coordinate_minimizer_is_firm_threshold_with_unit_curvature():
    for z in (-4.0, -1.2, 0.3, 1.9, 2.4, 3.5):
        expected = firm_threshold(np.array([z]), 0.8, 3.0)[0]
        assert _coordinate_minimizer(z, 1.0, 0.8, 2, 3.0) == pytest.approx(expected, abs=1e-12)
