"""Exponential-family definitions and the losses every selector compares.

Only canonical links are supported, so theta = x'beta and the per-observation
negative log-likelihood is -y*theta + b(theta) up to an affine transform.
Gaussian dispersion is dropped: the loss is proportional to the residual sum
of squares, which leaves every model comparison unchanged.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np
from scipy.special import expit

from src.data.models import FamilyKind, LossMetric
from src.errors import ArgumentError

if TYPE_CHECKING:
    from src.glm.dataset import Dataset


@dataclass(frozen=True)
class GlmFamily:
    kind: FamilyKind

    @property
    def dispersion(self) -> float:
        """a(phi): fixed at 1.0 for both families (Gaussian sigma^2 is dropped)."""
        return 1.0

    def cumulant(self, theta: np.ndarray) -> np.ndarray:
        """b(theta)."""
        theta = np.asarray(theta, dtype=float)
        if self.kind == FamilyKind.GAUSSIAN:
            return 0.5 * theta * theta
        return np.logaddexp(0.0, theta)

    def mean(self, theta: np.ndarray) -> np.ndarray:
        """First derivative of b: the mean function."""
        theta = np.asarray(theta, dtype=float)
        if self.kind == FamilyKind.GAUSSIAN:
            return theta.copy()
        return expit(theta)

    def variance(self, theta: np.ndarray) -> np.ndarray:
        """Second derivative of b."""
        theta = np.asarray(theta, dtype=float)
        if self.kind == FamilyKind.GAUSSIAN:
            return np.ones_like(theta)
        mu = expit(theta)
        return mu * (1.0 - mu)

    def null_mean(self) -> float:
        """The mean at theta = 0, used for lambda_max without an intercept."""
        return 0.0 if self.kind == FamilyKind.GAUSSIAN else 0.5


GAUSSIAN = GlmFamily(FamilyKind.GAUSSIAN)
BINOMIAL = GlmFamily(FamilyKind.BINOMIAL)


def get_family(kind: FamilyKind | str) -> GlmFamily:
    try:
        kind = FamilyKind(kind)
    except ValueError as e:
        raise ArgumentError(f"Unknown family {kind!r}") from e
    return GAUSSIAN if kind == FamilyKind.GAUSSIAN else BINOMIAL


def neg_log_lik(family: GlmFamily, theta: np.ndarray, y: np.ndarray) -> float:
    """(1/m) * sum(-y_i * theta_i + b(theta_i))."""
    theta = np.asarray(theta, dtype=float).ravel()
    y = np.asarray(y, dtype=float).ravel()
    if theta.shape != y.shape:
        raise ArgumentError(f"theta has length {theta.size} but y has length {y.size}")
    if theta.size == 0:
        raise ArgumentError("neg_log_lik needs at least one observation")
    if not (np.all(np.isfinite(theta)) and np.all(np.isfinite(y))):
        raise ArgumentError("neg_log_lik received non-finite input")
    return float(np.mean(family.cumulant(theta) - y * theta))


def validation_loss(family: GlmFamily, theta: np.ndarray, y: np.ndarray) -> float:
    """Held-out criterion every selector averages: neg_log_lik on the held-out rows."""
    return neg_log_lik(family, theta, y)


def linear_predictor(X: np.ndarray, beta: np.ndarray, intercept: float = 0.0) -> np.ndarray:
    return X @ beta + intercept


def prediction_loss(
    family: GlmFamily,
    beta: np.ndarray,
    test: "Dataset",
    metric: LossMetric | str,
    intercept: float = 0.0,
) -> float:
    """Score coefficients on an independent test set.

    pe  - mean squared error (1/n) sum (y_i - x_i'beta)^2
    ce  - misclassification rate with ties at probability 0.5 classified as 0
    nll - neg_log_lik at theta_i = x_i'beta
    """
    metric = LossMetric(metric)
    beta = np.asarray(beta, dtype=float).ravel()
    if beta.size != test.p:
        raise ArgumentError(f"beta has length {beta.size} but the test set has p={test.p}")
    if metric == LossMetric.CE and family.kind != FamilyKind.BINOMIAL:
        raise ArgumentError("classification error is only defined for the binomial family")

    theta = linear_predictor(test.X, beta, intercept)
    if metric == LossMetric.PE:
        return float(np.mean((test.y - theta) ** 2))
    if metric == LossMetric.CE:
        predicted = (family.mean(theta) > 0.5).astype(float)
        return float(np.mean(predicted != test.y))
    return neg_log_lik(family, theta, test.y)


def default_metric(family: GlmFamily) -> LossMetric:
    return LossMetric.PE if family.kind == FamilyKind.GAUSSIAN else LossMetric.CE
