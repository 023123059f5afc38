"""Monte Carlo for the comparison k * T_k^2 > l * T_l^2 of upper order statistics of |S|."""

from __future__ import annotations

import re

import numpy as np

from src.errors import ArgumentError
from src.simulation.generators import ar1_design

_AR1 = re.compile(r"^ar1\(\s*([-+0-9.eE]+)\s*\)$")
MAX_BATCH_CELLS = 1 << 22


def parse_rho_model(rho_model: str) -> float:
    """'iid' -> 0.0, 'ar1(0.5)' -> 0.5."""
    text = rho_model.strip().lower()
    if text == "iid":
        return 0.0
    match = _AR1.match(text)
    if match is None:
        raise ArgumentError(f"rho_model must be 'iid' or 'ar1(rho)', got {rho_model!r}")
    rho = float(match.group(1))
    if not 0.0 <= rho < 1.0:
        raise ArgumentError(f"ar1 correlation must lie in [0, 1), got {rho}")
    return rho


def lemma1_probability(
    p: int,
    k: int,
    l: int,
    rho_model: str = "iid",
    mean_shifts: np.ndarray | None = None,
    trials: int = 2000,
    seed: int = 0,
) -> float:
    """Estimate P{k * T_k^2 > l * T_l^2} with T_k = |S|_(p-k), T_l = |S|_(p-l).

    Order statistics are ascending and 1-based, so T_k is the (k+1)-th largest
    absolute value. S is a unit-variance Gaussian sequence (independent or
    AR(1)) plus optional mean shifts on its leading coordinates.
    """
    if not 2 <= l < k < p:
        raise ArgumentError(f"need 2 <= l < k < p, got l={l}, k={k}, p={p}")
    if trials < 1:
        raise ArgumentError(f"trials must be >= 1, got {trials}")
    rho = parse_rho_model(rho_model)
    shifts = np.zeros(p)
    if mean_shifts is not None:
        mean_shifts = np.asarray(mean_shifts, dtype=float).ravel()
        if mean_shifts.size > p:
            raise ArgumentError(f"{mean_shifts.size} mean shifts for p={p}")
        shifts[: mean_shifts.size] = mean_shifts

    rng = np.random.default_rng(seed)
    batch = max(1, min(trials, MAX_BATCH_CELLS // p))
    hits = 0
    done = 0
    while done < trials:
        m = min(batch, trials - done)
        magnitudes = np.abs(ar1_design(rng, m, p, rho) + shifts)
        ordered = np.partition(magnitudes, [p - k - 1, p - l - 1], axis=1)
        t_k = ordered[:, p - k - 1]
        t_l = ordered[:, p - l - 1]
        hits += int(np.sum(k * t_k ** 2 > l * t_l ** 2))
        done += m
    return hits / trials
