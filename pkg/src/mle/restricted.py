"""Maximum-likelihood refits restricted to an active set."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy import linalg
from scipy.special import expit

from src.data.models import FamilyKind
from src.errors import OversizeModelError
from src.glm.dataset import ActiveSet, Dataset
from src.glm.families import GlmFamily, neg_log_lik, validation_loss

logger = logging.getLogger(__name__)

GRAD_TOL = 1e-6
STEP_TOL = 1e-8
MAX_HALVINGS = 20
SEPARATION_ETA = 30.0
DEFAULT_MAX_ITER = 50


@dataclass
class RestrictedFit:
    active: ActiveSet
    coef: np.ndarray
    full_coef: np.ndarray
    intercept: float
    neg_log_lik: float
    converged: bool
    grad_norm: float
    n_iter: int = 0
    reason: str = ""

    @property
    def d(self) -> int:
        return self.active.d

    def linear_predictor(self, X: np.ndarray) -> np.ndarray:
        return X @ self.full_coef + self.intercept

    def validation_loss(self, family: GlmFamily, X: np.ndarray, y: np.ndarray) -> float:
        """Held-out loss on rows (X, y); +inf for an unusable fit. A single row is enough."""
        if not self.converged:
            return math.inf
        return validation_loss(family, self.linear_predictor(X), y)


def default_size_cap(n_fit: int, p: int) -> int:
    """min(n_fit - 2, floor(2 * sqrt(n_fit / log(max(p, 3)))))."""
    rate = int(math.floor(2.0 * math.sqrt(n_fit / math.log(max(p, 3)))))
    return max(min(n_fit - 2, rate), 0)


def ccv_size_cap(n: int, n_c: int, p: int) -> int:
    """Candidate cap for CCV: the whole-data rate, bounded so construction fits stay identifiable."""
    rate = int(math.floor(2.0 * math.sqrt(n / math.log(max(p, 3)))))
    return max(min(n_c - 2, rate), 0)


def _design(data: Dataset, active: ActiveSet, intercept: bool) -> np.ndarray:
    Xa = data.X[:, active.as_array()]
    if intercept:
        return np.column_stack([np.ones(data.n), Xa])
    return np.ascontiguousarray(Xa)


def _split_params(params: np.ndarray, intercept: bool) -> tuple[np.ndarray, float]:
    if intercept:
        return params[1:].copy(), float(params[0])
    return params.copy(), 0.0


def _fit_gaussian(D: np.ndarray, y: np.ndarray) -> tuple[np.ndarray, bool, str]:
    if D.shape[1] == 0:
        return np.zeros(0), True, ""
    try:
        params, _, rank, _ = linalg.lstsq(D, y, lapack_driver="gelsd")
    except linalg.LinAlgError as e:
        return np.zeros(D.shape[1]), False, f"least squares failed: {e}"
    if rank < D.shape[1]:
        return params, False, f"rank-deficient design (rank {rank} < {D.shape[1]})"
    return params, True, ""


def _fit_binomial(D: np.ndarray, y: np.ndarray, max_iter: int) -> tuple[np.ndarray, int, str]:
    """Damped Newton from zero. Returns (params, iterations, failure reason or '')."""
    n, q = D.shape
    params = np.zeros(q)
    eta = np.zeros(n)
    loss = neg_log_lik_binomial(eta, y)
    for it in range(1, max_iter + 1):
        mu = expit(eta)
        score = D.T @ (y - mu) / n
        info = D.T @ (D * (mu * (1.0 - mu))[:, None]) / n
        try:
            step = linalg.cho_solve(linalg.cho_factor(info), score)
        except linalg.LinAlgError:
            return params, it, "singular information matrix"

        if np.linalg.norm(score) <= GRAD_TOL and np.max(np.abs(step)) <= STEP_TOL * (1.0 + np.max(np.abs(params))):
            return params, it, ""

        t = 1.0
        for _ in range(MAX_HALVINGS + 1):
            candidate = params + t * step
            eta_c = D @ candidate
            loss_c = neg_log_lik_binomial(eta_c, y)
            if loss_c <= loss + 1e-14 * abs(loss):
                break
            t *= 0.5
        else:
            return params, it, "step halving failed to decrease the loss"
        params, eta, loss = candidate, eta_c, loss_c
        if np.max(np.abs(eta)) > SEPARATION_ETA:
            return params, it, f"linear predictor exceeded |eta| > {SEPARATION_ETA:g} (separation)"
    return params, max_iter, f"no convergence in {max_iter} Newton iterations"


def neg_log_lik_binomial(eta: np.ndarray, y: np.ndarray) -> float:
    return float(np.mean(np.logaddexp(0.0, eta) - y * eta))


def fit_restricted(
    data: Dataset,
    active: ActiveSet,
    size_cap: int | None = None,
    max_iter: int = DEFAULT_MAX_ITER,
    intercept: bool = False,
) -> RestrictedFit:
    """Unpenalized fit on the columns in ``active``.

    Gaussian uses least squares; binomial uses damped Newton and reports
    non-convergence (e.g. separation) instead of regularizing it away. Raises
    OversizeModelError when the set is larger than ``size_cap``.
    """
    active.check_bounds(data.p)
    cap = default_size_cap(data.n, data.p) if size_cap is None else size_cap
    if active.d > cap:
        raise OversizeModelError(f"active set of size {active.d} exceeds size cap {cap}")

    D = _design(data, active, intercept)
    y = data.y
    if data.family.kind == FamilyKind.GAUSSIAN:
        params, ok, reason = _fit_gaussian(D, y)
        n_iter = 1
    else:
        params, n_iter, reason = _fit_binomial(D, y, max_iter)
        ok = not reason

    coef, b0 = _split_params(params, intercept)
    full = np.zeros(data.p)
    full[active.as_array()] = coef
    theta = D @ params if D.shape[1] else np.zeros(data.n)
    resid = y - data.family.mean(theta)
    grad_norm = float(np.linalg.norm(D.T @ resid / data.n)) if D.shape[1] else 0.0
    if ok and grad_norm > GRAD_TOL:
        ok, reason = False, f"score norm {grad_norm:.3g} above {GRAD_TOL:g}"

    return RestrictedFit(
        active=active,
        coef=coef,
        full_coef=full,
        intercept=b0,
        neg_log_lik=neg_log_lik(data.family, theta, y),
        converged=ok,
        grad_norm=grad_norm,
        n_iter=n_iter,
        reason=reason,
    )
