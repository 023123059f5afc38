import numpy as np
import pytest

from src.errors import DegenerateGridError, SolverDivergenceError
from src.glm.dataset import ActiveSet, Dataset
from src.glm.families import BINOMIAL, GAUSSIAN
from src.path import solver
from src.path.penalties import PenaltySpec, firm_threshold, soft_threshold
from src.path.solver import (
    KKT_TOL,
    LambdaGrid,
    SolutionPath,
    active_set_sequence,
    default_min_ratio,
    fit_path,
    kkt_residual,
    lambda_grid,
    path_kkt_residuals,
    solve_at,
)
from src.simulation.generators import gen_linear, gen_logistic, orthonormal_design

PENALTIES = [PenaltySpec.lasso(), PenaltySpec.scad(3.0), PenaltySpec.mcp(3.0)]


def test_lambda_max_single_column():
    x = np.array([1.0, -1.0, 1.0, -1.0])
    data = Dataset(X=x[:, None], y=0.8 * x, family=GAUSSIAN)
    assert lambda_grid(data, 10, 0.1).lambda_max == pytest.approx(0.8, abs=1e-12)


def test_grid_is_log_equispaced():
    grid = LambdaGrid.from_bounds(1.0, 3, 0.01)
    np.testing.assert_allclose(grid.values, [1.0, 0.1, 0.01], rtol=1e-12)
    wide = LambdaGrid.from_bounds(2.5, 100, 0.001)
    assert wide.values[0] == 2.5
    assert wide.values[-1] == pytest.approx(2.5e-3, rel=1e-12)
    steps = np.diff(np.log(wide.values))
    np.testing.assert_allclose(steps, steps[0], atol=1e-10)


def test_default_min_ratio():
    assert default_min_ratio(500, 100) == 1e-3
    assert default_min_ratio(100, 500) == 0.05


def test_degenerate_grid():
    data = Dataset(X=np.random.default_rng(0).normal(size=(20, 3)), y=np.zeros(20), family=GAUSSIAN)
    with pytest.raises(DegenerateGridError):
        lambda_grid(data, 10, 0.1)


def test_binomial_lambda_max_matches_null_gradient():
    X = orthonormal_design(80, 6, seed=2)
    y = (np.random.default_rng(9).random(80) < 0.4).astype(float)
    data = Dataset(X=X, y=y, family=BINOMIAL)
    grid = lambda_grid(data, 20, 0.05)
    assert grid.lambda_max == pytest.approx(np.max(np.abs(X.T @ (y - 0.5))) / 80, rel=1e-12)
    assert kkt_residual(data, PenaltySpec.lasso(), grid.lambda_max, np.zeros(6)) <= 1e-12
    # just below lambda_max the zero vector is no longer stationary
    assert kkt_residual(data, PenaltySpec.lasso(), 0.99 * grid.lambda_max, np.zeros(6)) > 0


def test_orthonormal_lasso_matches_soft_threshold(orthonormal_data):
    data = orthonormal_data
    grid = lambda_grid(data, 30, 0.01)
    path = fit_path(data, PenaltySpec.lasso(), grid)
    beta_ols = data.X.T @ data.y / data.n
    for k, lam in enumerate(grid.values):
        np.testing.assert_allclose(path.beta(k), soft_threshold(beta_ols, lam), atol=1e-8)
        assert kkt_residual(data, PenaltySpec.lasso(), lam, soft_threshold(beta_ols, lam)) <= 1e-10


def test_orthonormal_mcp_matches_firm_threshold(orthonormal_data):
    data = orthonormal_data
    grid = lambda_grid(data, 30, 0.01)
    path = fit_path(data, PenaltySpec.mcp(3.0), grid)
    beta_ols = data.X.T @ data.y / data.n
    for k, lam in enumerate(grid.values):
        np.testing.assert_allclose(path.beta(k), firm_threshold(beta_ols, lam, 3.0), atol=1e-8)


@pytest.mark.parametrize("penalty", PENALTIES, ids=str)
@pytest.mark.parametrize("family", ["gaussian", "binomial"])
def test_path_starts_at_zero_and_satisfies_kkt(penalty, family):
    for seed in range(3):
        if family == "gaussian":
            data, _ = gen_linear(60, 80, 0.0, [2.0, 1.6, 1.2, 0.8, 0.4], 1.0, seed, test_size=10)
        else:
            data, _ = gen_logistic(60, 80, 0.0, [3.0, 1.5, 0.0, 0.0, 2.0], seed, test_size=10)
        grid = lambda_grid(data, 30, default_min_ratio(data.n, data.p))
        path = fit_path(data, penalty, grid)
        assert path.active_sets[0].d == 0
        residuals = path_kkt_residuals(data, path)
        assert np.all(residuals[path.converged] <= KKT_TOL)
        for k in range(path.n_points):
            assert path.active_sets[k] == ActiveSet.from_beta(path.beta(k))


@pytest.mark.parametrize("family", ["gaussian", "binomial"])
def test_objective_does_not_increase_across_outer_iterations(family):
    if family == "gaussian":
        data, _ = gen_linear(50, 20, 0.5, [1.0, -1.0], 1.0, 4, test_size=5)
    else:
        data, _ = gen_logistic(80, 20, 0.5, [1.0, -1.0], 4, test_size=5)
    grid = lambda_grid(data, 15, 0.05)
    cd = solver.CoordinateDescentSolver(data, PenaltySpec.mcp(3.0))
    b = np.zeros(data.p)
    for lam in grid.values:
        start = cd.objective(lam, b, 0.0)
        point = cd.solve(lam, b, 0.0)
        assert point.objective <= start + 1e-10
        b = point.beta


def test_cold_start_matches_warm_start_objective(sparse_linear):
    data, _ = sparse_linear
    grid = lambda_grid(data, 40, 0.01)
    path = fit_path(data, PenaltySpec.lasso(), grid)
    for k in (5, 20, 39):
        _, _, objective, converged = solve_at(data, PenaltySpec.lasso(), grid.values[k])
        assert converged
        assert objective == pytest.approx(path.objective[k], abs=1e-8)


def test_intercept_is_unpenalized_and_on_original_scale():
    rng = np.random.default_rng(6)
    X = rng.normal(2.0, 3.0, size=(120, 5))
    y = 4.0 + X[:, 0] + rng.normal(size=120)
    data = Dataset(X=X, y=y, family=GAUSSIAN)
    grid = lambda_grid(data, 30, 1e-4, intercept=True)
    path = fit_path(data, PenaltySpec.lasso(), grid, intercept=True)
    assert path.intercept(0) == pytest.approx(y.mean())
    last = path.n_points - 1
    assert path.beta(last)[0] == pytest.approx(1.0, abs=0.1)
    assert path.intercept(last) == pytest.approx(4.0, abs=0.6)
    assert kkt_residual(data, PenaltySpec.lasso(), grid.values[last], path.beta(last),
                        intercept=path.intercept(last)) <= KKT_TOL


def test_iteration_cap_flags_points(sparse_linear):
    data, _ = sparse_linear
    grid = lambda_grid(data, 20, 0.01)
    path = fit_path(data, PenaltySpec.lasso(), grid, max_iter=1)
    assert path.converged[0]
    assert not path.converged[-1]


def test_divergence_carries_partial_path(sparse_linear, monkeypatch):
    data, _ = sparse_linear
    grid = lambda_grid(data, 10, 0.01)
    original = solver.CoordinateDescentSolver.solve

    def failing(self, lam, b=None, b0=None, position=-1):
        if position == 3:
            raise SolverDivergenceError("objective rose", position=position)
        return original(self, lam, b, b0, position=position)

    monkeypatch.setattr(solver.CoordinateDescentSolver, "solve", failing)
    with pytest.raises(SolverDivergenceError) as info:
        fit_path(data, PenaltySpec.lasso(), grid)
    partial = info.value.partial_path
    assert partial.n_points == 3
    assert not partial.complete
    assert info.value.position == 3


def _path_with_sets(sets, p=3):
    grid = LambdaGrid.from_bounds(1.0, len(sets), 0.1)
    rows = []
    for active in sets:
        beta = np.zeros(p)
        beta[list(active)] = 1.0
        rows.append(beta)
    return SolutionPath.from_coefficients(grid, rows, p, PenaltySpec.lasso(), GAUSSIAN)


def test_active_set_sequence_collapses_consecutive_repeats():
    path = _path_with_sets([(), (), (1,), (1,), (1, 2)])
    sequence = active_set_sequence(path)
    assert sequence == [(ActiveSet(()), 0), (ActiveSet((1,)), 2), (ActiveSet((1, 2)), 4)]
    assert len(active_set_sequence(_path_with_sets([(0,)] * 4))) == 1


def test_active_set_sequence_keeps_reentered_sets():
    sequence = active_set_sequence(_path_with_sets([(1,), (1, 2), (1,)]))
    assert [position for _, position in sequence] == [0, 1, 2]
