"""Desk-scale reproductions of the selection-consistency experiments.

Slow (minutes each); enabled with CCV_ACCEPTANCE=1.
"""

import numpy as np
import pytest

from src.data.models import FamilyKind, MethodSpec, PenaltyKind
from src.diagnostics.coherent import coherent_rate, first_noise_position, split_active_sets
from src.diagnostics.order_stats import lemma1_probability
from src.glm.dataset import ActiveSet
from src.path.penalties import PenaltySpec
from src.path.solver import KKT_TOL, default_min_ratio, fit_path, lambda_grid, path_kkt_residuals
from src.selection.selectors import ccv
from src.selection.splits import kfold_splits, monte_carlo_splits
from src.simulation.experiment import preset_config, run_experiment
from src.simulation.generators import gen_linear, gen_logistic

pytestmark = pytest.mark.acceptance


def _means(result, method):
    summary = result.summary[result.summary["method"] == method]
    return dict(zip(summary["metric"], summary["mean"]))


def test_linear_ccv_is_consistent_where_kfold_overselects():
    config = preset_config(FamilyKind.GAUSSIAN, penalties=[PenaltyKind.LASSO], n_reps=20).model_copy(update={
        "methods": [MethodSpec(method="kfold", k=10), MethodSpec(method="ccv", n_c=23, r=20),
                    MethodSpec(method="cv_nv", n_c=63, r=20)],
        "threads": 4,
    })
    result = run_experiment(config)
    kfold = _means(result, "kfold(k=10)")
    consistent = _means(result, "ccv(n_c=23)")
    nv = _means(result, "cv_nv(n_c=63)")
    assert kfold["fp"] >= 10
    assert consistent["fp"] <= 0.5
    assert consistent["fn"] <= 0.1
    assert nv["fp"] <= 2
    assert abs(consistent["loss"] - 1.12) <= 0.04


def test_logistic_ccv_is_consistent_where_kfold_overselects():
    config = preset_config(FamilyKind.BINOMIAL, penalties=[PenaltyKind.LASSO], n_reps=10).model_copy(update={
        "methods": [MethodSpec(method="kfold", k=10), MethodSpec(method="ccv", n_c=63, r=20)],
        "threads": 4,
    })
    result = run_experiment(config)
    assert _means(result, "kfold(k=10)")["fp"] >= 15
    assert _means(result, "ccv(n_c=63)")["fp"] <= 1


def test_lemma1_full_size_baseline():
    large = lemma1_probability(10_000, 3, 2, trials=2000, seed=1)
    small = lemma1_probability(10, 3, 2, trials=100_000, seed=1)
    assert large >= 0.9
    assert large - small >= 0.05


def test_logistic_cv_nv_false_positives():
    config = preset_config(FamilyKind.BINOMIAL, penalties=[PenaltyKind.LASSO], n_reps=10).model_copy(update={
        "methods": [MethodSpec(method="cv_nv", n_c=106, r=20)],
        "threads": 4,
    })
    fp = _means(run_experiment(config), "cv_nv(n_c=106)")["fp"]
    assert abs(fp - 3.24) <= 3


def test_ccv_prefers_the_empty_model_on_pure_noise():
    wins = 0
    for seed in range(100):
        data, _ = gen_linear(200, 10, 0.0, [], 1.0, seed, test_size=10)
        grid = lambda_grid(data, 50, 0.01)
        plan = monte_carlo_splits(data.n, 15, 50, seed=seed)
        report = ccv(data, PenaltySpec.lasso(), grid, plan, size_cap=1)
        wins += report.selected_active == ActiveSet()
    assert wins >= 80


def test_coherent_rate_collapses_after_noise_enters():
    data, _ = gen_linear(500, 1000, 0.5, [2.0, 1.6, 1.2, 0.8, 0.4], 1.0, seed=0, test_size=10)
    grid = lambda_grid(data, 100, default_min_ratio(data.n, data.p))
    path = fit_path(data, PenaltySpec.lasso(), grid)
    sets = split_active_sets(data, PenaltySpec.lasso(), grid, kfold_splits(data.n, 10, seed=1), threads=4)
    series = coherent_rate(path.active_sets, sets)
    noise = first_noise_position(path.active_sets, range(5))
    assert noise is not None
    assert series.cr[noise:].mean() < 0.5
    copies = coherent_rate(path.active_sets, [path.active_sets] * 10)
    assert np.all(copies.cr == 1.0)


@pytest.mark.parametrize("penalty", [PenaltySpec.lasso(), PenaltySpec.scad(3.7), PenaltySpec.mcp(3.0)], ids=str)
def test_kkt_suite(penalty):
    for seed in range(20):
        for rho in (0.0, 0.5):
            for family in ("gaussian", "binomial"):
                if family == "gaussian":
                    data, _ = gen_linear(100, 200, rho, [2.0, 1.6, 1.2, 0.8, 0.4], 1.0, seed, test_size=10)
                else:
                    data, _ = gen_logistic(200, 200, rho, [3.0, 1.5, 0.0, 0.0, 2.0], seed, test_size=10)
                grid = lambda_grid(data, 50, default_min_ratio(data.n, data.p))
                path = fit_path(data, penalty, grid)
                assert path.active_sets[0].d == 0
                residuals = path_kkt_residuals(data, path)
                assert np.all(residuals[path.converged] <= KKT_TOL)
