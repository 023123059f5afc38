import math

import numpy as np
import pytest

from src.errors import OversizeModelError
from src.glm.dataset import ActiveSet, Dataset
from src.glm.families import BINOMIAL, GAUSSIAN, neg_log_lik
from src.mle.restricted import GRAD_TOL, ccv_size_cap, default_size_cap, fit_restricted
from src.simulation.generators import gen_logistic


def test_gaussian_matches_normal_equations(sparse_linear):
    data, _ = sparse_linear
    active = ActiveSet((0, 2, 7))
    fit = fit_restricted(data, active)
    Xa = data.X[:, [0, 2, 7]]
    expected = np.linalg.solve(Xa.T @ Xa, Xa.T @ data.y)
    np.testing.assert_allclose(fit.coef, expected, atol=1e-10)
    assert fit.converged
    assert fit.full_coef[[0, 2, 7]] == pytest.approx(expected)
    assert np.count_nonzero(fit.full_coef[[1, 3, 4, 5, 6]]) == 0


@pytest.mark.parametrize("seed", range(50))
def test_gaussian_fits_solve_the_normal_equations(seed):
    rng = np.random.default_rng(seed)
    X = rng.normal(size=(100, 20))
    y = X[:, :3] @ np.array([1.0, -2.0, 0.5]) + rng.normal(size=100)
    data = Dataset(X=X, y=y, family=GAUSSIAN)
    d = int(rng.integers(1, 11))
    active = ActiveSet.of(rng.choice(20, size=d, replace=False))
    fit = fit_restricted(data, active)
    Xa = X[:, active.as_array()]
    assert fit.converged
    np.testing.assert_allclose(fit.coef, np.linalg.solve(Xa.T @ Xa, Xa.T @ y), rtol=0, atol=1e-8)


def test_empty_set_is_the_null_model(sparse_logistic):
    data, _ = sparse_logistic
    fit = fit_restricted(data, ActiveSet())
    assert fit.converged
    assert fit.d == 0
    assert fit.neg_log_lik == pytest.approx(math.log(2.0))


def test_empty_set_with_intercept_fits_the_mean(sparse_linear):
    data, _ = sparse_linear
    fit = fit_restricted(data, ActiveSet(), intercept=True)
    assert fit.intercept == pytest.approx(data.y.mean())


def test_separation_is_reported_not_regularized():
    x = np.tile([1.0, -1.0], 10)
    data = Dataset(X=x[:, None], y=(x > 0).astype(float), family=BINOMIAL)
    fit = fit_restricted(data, ActiveSet((0,)))
    assert not fit.converged
    assert "separation" in fit.reason
    assert fit.validation_loss(data.family, data.X, data.y) == math.inf


def test_binomial_score_vanishes_at_the_mle():
    data, _ = gen_logistic(n=400, p=10, rho=0.0, beta=[1.0, -0.5, 0.5], seed=2)
    fit = fit_restricted(data, ActiveSet((0, 1, 2)))
    assert fit.converged
    assert fit.grad_norm <= GRAD_TOL
    Xa = data.X[:, :3]
    mu = 1.0 / (1.0 + np.exp(-(Xa @ fit.coef)))
    assert np.linalg.norm(Xa.T @ (data.y - mu) / data.n) <= GRAD_TOL


@pytest.mark.parametrize("family", ["gaussian", "binomial"])
def test_nested_sets_never_raise_training_loss(family, sparse_linear, sparse_logistic):
    data = sparse_linear[0] if family == "gaussian" else sparse_logistic[0]
    losses = [fit_restricted(data, ActiveSet(tuple(range(d)))).neg_log_lik for d in range(6)]
    assert all(b <= a + 1e-12 for a, b in zip(losses, losses[1:]))


def test_rank_deficient_gaussian_is_not_converged():
    rng = np.random.default_rng(1)
    x = rng.normal(size=30)
    data = Dataset(X=np.column_stack([x, 2.0 * x]), y=x + rng.normal(size=30), family=GAUSSIAN)
    fit = fit_restricted(data, ActiveSet((0, 1)))
    assert not fit.converged
    assert "rank" in fit.reason


def test_oversize_model_is_refused(sparse_linear):
    data, _ = sparse_linear
    with pytest.raises(OversizeModelError):
        fit_restricted(data, ActiveSet((0, 1, 2)), size_cap=2)


def test_validation_loss_uses_the_held_out_rows(sparse_linear):
    train, test = sparse_linear
    fit = fit_restricted(train, ActiveSet((0, 1)))
    theta = test.X[:, :2] @ fit.coef
    loss = fit.validation_loss(test.family, test.X, test.y)
    assert loss == pytest.approx(neg_log_lik(GAUSSIAN, theta, test.y), rel=1e-12)
    assert fit.validation_loss(test.family, test.X[:1], test.y[:1]) == pytest.approx(
        0.5 * theta[0] ** 2 - test.y[0] * theta[0], rel=1e-12
    )


def test_size_caps():
    assert default_size_cap(500, 1000) == 17
    assert ccv_size_cap(500, 23, 1000) == 17
    assert ccv_size_cap(500, 10, 1000) == 8
    assert default_size_cap(3, 1000) == 1
