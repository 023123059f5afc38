"""Synthetic designs: AR(1)-correlated Gaussian rows and exactly orthonormal columns."""

from __future__ import annotations

from typing import Sequence

import numpy as np
from scipy.signal import lfilter
from scipy.special import expit

from src.data.models import FamilyKind, SimConfig
from src.errors import ArgumentError
from src.glm.dataset import Dataset
from src.glm.families import BINOMIAL, GAUSSIAN


def ar1_design(rng: np.random.Generator, n: int, p: int, rho: float) -> np.ndarray:
    """n rows from N(0, Sigma) with Sigma_jk = rho^|j-k|.

    Each row is the recursion x_j = rho * x_{j-1} + sqrt(1 - rho^2) * z_j started
    at x_0 = z_0, which is exact for this Sigma.
    """
    if not 0.0 <= rho < 1.0:
        raise ArgumentError(f"rho must lie in [0, 1), got {rho}")
    z = rng.standard_normal((n, p))
    if rho == 0.0:
        return z
    scale = np.sqrt(1.0 - rho * rho)
    z[:, 0] /= scale
    return lfilter([scale], [1.0, -rho], z, axis=1)


def full_coefficients(beta: Sequence[float], p: int) -> np.ndarray:
    """Leading coordinates ``beta``, zeros elsewhere."""
    beta = np.asarray(beta, dtype=float).ravel()
    if beta.size > p:
        raise ArgumentError(f"{beta.size} coefficients for p={p}")
    full = np.zeros(p)
    full[: beta.size] = beta
    return full


def gen_linear(
    n: int,
    p: int,
    rho: float,
    beta: Sequence[float],
    sigma: float,
    seed: int,
    test_size: int | None = None,
) -> tuple[Dataset, Dataset]:
    """y = X beta + N(0, sigma^2) noise; the test set (size n by default) follows the same law."""
    if sigma < 0:
        raise ArgumentError(f"sigma must be >= 0, got {sigma}")
    rng = np.random.default_rng(seed)
    b = full_coefficients(beta, p)

    def draw(m: int) -> Dataset:
        X = ar1_design(rng, m, p, rho)
        y = X @ b + sigma * rng.standard_normal(m)
        return Dataset(X=X, y=y, family=GAUSSIAN)

    return draw(n), draw(test_size or n)


def gen_logistic(
    n: int,
    p: int,
    rho: float,
    beta: Sequence[float],
    seed: int,
    test_size: int | None = None,
) -> tuple[Dataset, Dataset]:
    """Bernoulli responses with P(y = 1) = expit(x'beta)."""
    rng = np.random.default_rng(seed)
    b = full_coefficients(beta, p)

    def draw(m: int) -> Dataset:
        X = ar1_design(rng, m, p, rho)
        y = (rng.random(m) < expit(X @ b)).astype(float)
        return Dataset(X=X, y=y, family=BINOMIAL)

    return draw(n), draw(test_size or n)


def simulate(config: SimConfig, seed: int) -> tuple[Dataset, Dataset]:
    if config.family == FamilyKind.GAUSSIAN:
        return gen_linear(config.n, config.p, config.rho, config.beta_true, config.sigma, seed,
                          config.resolved_test_size)
    return gen_logistic(config.n, config.p, config.rho, config.beta_true, seed, config.resolved_test_size)


def orthonormal_design(n: int, p: int, seed: int) -> np.ndarray:
    """X with X'X/n = I: sqrt(n) times the thin Q factor of a Gaussian matrix."""
    if p > n:
        raise ArgumentError(f"an orthonormal design needs p <= n, got p={p}, n={n}")
    rng = np.random.default_rng(seed)
    q, _ = np.linalg.qr(rng.standard_normal((n, p)))
    return np.sqrt(n) * q
