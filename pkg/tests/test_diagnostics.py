import math

import numpy as np
import pytest

from src.errors import ArgumentError
from src.glm.dataset import ActiveSet
from src.glm.families import BINOMIAL, GAUSSIAN
from src.diagnostics.coherent import coherent_rate, first_noise_position, split_active_sets
from src.diagnostics.order_stats import lemma1_probability, parse_rho_model
from src.diagnostics.shrinkage import (
    is_orthonormal,
    orthonormal_lasso_path,
    shrinkage_decomposition,
)
from src.diagnostics.thresholds import (
    construction_lambda_series,
    theoretical_lambda_series,
    universal_threshold,
)
from src.path.penalties import PenaltySpec
from src.path.solver import LambdaGrid, SolutionPath, fit_path, lambda_grid
from src.selection.splits import kfold_splits, monte_carlo_splits

A, B, C = ActiveSet(()), ActiveSet((0,)), ActiveSet((0, 3))


def test_coherent_rate_counts_matches():
    full = [A, B, C]
    assert np.array_equal(coherent_rate(full, [full, full, full]).cr, [1.0, 1.0, 1.0])
    series = coherent_rate(full, [[A, B, C], [A, B, ActiveSet((0, 4))]])
    np.testing.assert_array_equal(series.cr, [1.0, 1.0, 0.5])
    assert series.r == 2


def test_coherent_rate_compares_sets_not_sizes():
    series = coherent_rate([B], [[ActiveSet((1,))], [None]])
    assert series.cr[0] == 0.0


def test_coherent_rate_length_mismatch():
    with pytest.raises(ArgumentError):
        coherent_rate([A, B], [[A]])


def test_split_sets_and_first_noise(sparse_linear):
    data, _ = sparse_linear
    grid = lambda_grid(data, 25, 0.02)
    path = fit_path(data, PenaltySpec.lasso(), grid)
    plan = kfold_splits(data.n, 5, seed=1)
    sets = split_active_sets(data, PenaltySpec.lasso(), grid, plan)
    assert len(sets) == 5 and all(len(s) == 25 for s in sets)
    series = coherent_rate(path.active_sets, sets, lambdas=grid.values)
    assert series.cr[0] == 1.0
    assert np.allclose(series.cr * 5, np.round(series.cr * 5))
    noise = first_noise_position(path.active_sets, range(5))
    assert noise is None or any(j >= 5 for j in path.active_sets[noise])
    assert list(series.to_frame().columns) == ["position", "lambda", "cr"]


def test_first_noise_position():
    assert first_noise_position([A, B, ActiveSet((0, 7))], [0, 1]) == 2
    assert first_noise_position([A, B], [0]) is None


def test_shrinkage_gap_vanishes_on_oracle_path(orthonormal_data):
    grid = lambda_grid(orthonormal_data, 40, 0.01)
    oracle = orthonormal_lasso_path(orthonormal_data, grid)
    decomposition = shrinkage_decomposition(orthonormal_data, oracle)
    assert decomposition.max_abs_gap() <= 1e-8
    first = decomposition.records[0]
    assert first.d_alpha == 0
    assert first.shrink_term == 0.0
    assert first.gamma_hat == pytest.approx(first.gamma_tilde)


def test_shrinkage_gap_on_solver_path(orthonormal_data):
    grid = lambda_grid(orthonormal_data, 40, 0.01)
    path = fit_path(orthonormal_data, PenaltySpec.lasso(), grid)
    assert shrinkage_decomposition(orthonormal_data, path).max_abs_gap() <= 1e-6


def test_shrinkage_rejects_other_models(orthonormal_data, sparse_logistic):
    grid = lambda_grid(orthonormal_data, 10, 0.1)
    with pytest.raises(ArgumentError):
        shrinkage_decomposition(orthonormal_data, fit_path(orthonormal_data, PenaltySpec.mcp(3.0), grid))
    data, _ = sparse_logistic
    path = fit_path(data, PenaltySpec.lasso(), lambda_grid(data, 10, 0.1))
    with pytest.raises(ArgumentError):
        shrinkage_decomposition(data, path)


def test_correlated_design_reports_a_gap(sparse_linear):
    data, _ = sparse_linear
    assert not is_orthonormal(data.X)
    path = fit_path(data, PenaltySpec.lasso(), lambda_grid(data, 20, 0.05))
    frame = shrinkage_decomposition(data, path).to_frame()
    assert len(frame) == 20
    assert frame["gap"].notna().all()


def test_lemma1_rejects_bad_orders():
    with pytest.raises(ArgumentError):
        lemma1_probability(10, 3, 3)
    with pytest.raises(ArgumentError):
        lemma1_probability(10, 3, 1)


def test_lemma1_grows_with_dimension():
    large = lemma1_probability(10_000, 3, 2, trials=2000, seed=1)
    small = lemma1_probability(10, 3, 2, trials=20_000, seed=1)
    assert large >= 0.9
    assert large - small >= 0.05
    assert lemma1_probability(10, 3, 2, trials=500, seed=4) == lemma1_probability(10, 3, 2, trials=500, seed=4)


def test_lemma1_correlated_and_shifted():
    value = lemma1_probability(200, 5, 2, rho_model="ar1(0.5)", mean_shifts=np.array([6.0, 6.0]), trials=300)
    assert 0.0 <= value <= 1.0


def test_parse_rho_model():
    assert parse_rho_model("iid") == 0.0
    assert parse_rho_model("AR1(0.25)") == 0.25
    with pytest.raises(ArgumentError):
        parse_rho_model("ar1(1.5)")
    with pytest.raises(ArgumentError):
        parse_rho_model("garch")


def test_universal_threshold():
    assert round(universal_threshold(300, 1000, 1.0), 2) == 0.21
    assert round(universal_threshold(500, 1000, 1.0), 2) == 0.17
    assert universal_threshold(500, 1000, 0.0) == 0.0
    assert universal_threshold(400, 1000, 2.0) == pytest.approx(universal_threshold(100, 1000, 2.0) / 2, rel=1e-15)


def test_theoretical_series_ratio_one():
    theoretical = math.sqrt(2.0 * math.log(10) / 20)
    grid = LambdaGrid.from_bounds(theoretical, 2, 0.5)
    path = SolutionPath.from_coefficients(grid, [np.zeros(10), np.zeros(10)], 10, PenaltySpec.lasso(), GAUSSIAN)
    frame = theoretical_lambda_series(path, n_c=20, sigma=1.0)
    assert frame["ratio"].iloc[0] == pytest.approx(1.0)
    assert frame["ratio"].iloc[1] == pytest.approx(0.5)
    assert (frame["shrink"] == 0.0).all()


def test_theoretical_series_skips_saturated_positions():
    grid = LambdaGrid.from_bounds(1.0, 2, 0.5)
    path = SolutionPath.from_coefficients(grid, [np.zeros(2), np.array([1.0, 0.0])], 2, PenaltySpec.lasso(), BINOMIAL)
    frame = theoretical_lambda_series(path, n_c=10, sigma=1.0)
    assert frame["position"].tolist() == [0]


def test_construction_series_is_tagged_by_split(sparse_linear):
    data, _ = sparse_linear
    grid = lambda_grid(data, 15, 0.05)
    plan = monte_carlo_splits(data.n, 50, 3, seed=2)
    frame = construction_lambda_series(data, PenaltySpec.lasso(), grid, plan, sigma=1.0)
    assert sorted(frame["split"].unique()) == [0, 1, 2]
    assert list(frame.columns) == ["split", "position", "lambda", "d_alpha", "theoretical_lambda", "ratio", "shrink"]
