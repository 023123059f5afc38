"""Theoretical lambda levels and how the fitted path compares to them."""

from __future__ import annotations

import math

import pandas as pd

from src.errors import ArgumentError
from src.glm.dataset import Dataset
from src.path.penalties import PenaltySpec
from src.path.solver import LambdaGrid, SolutionPath
from src.selection.selectors import fit_split_paths
from src.selection.splits import SplitPlan

SERIES_COLUMNS = ["position", "lambda", "d_alpha", "theoretical_lambda", "ratio", "shrink"]


def universal_threshold(n: int, p: int, sigma: float) -> float:
    """sigma * sqrt(2 log p / n)."""
    if n < 1 or p < 2 or sigma < 0:
        raise ArgumentError(f"need n >= 1, p >= 2, sigma >= 0; got n={n}, p={p}, sigma={sigma}")
    return sigma * math.sqrt(2.0 * math.log(p) / n)


def theoretical_lambda_series(path: SolutionPath, n_c: int, sigma: float) -> pd.DataFrame:
    """Compare each lambda with sigma * sqrt(2 log(p - d) / n_c), d the active-set size.

    Positions with p - d <= 1 are skipped. shrink = lambda^2 * d.
    """
    if path.n_points == 0:
        raise ArgumentError("theoretical_lambda_series needs a nonempty path")
    rows = []
    for position, lam in enumerate(path.lambdas):
        d = path.active_sets[position].d
        if path.p - d <= 1:
            continue
        theoretical = sigma * math.sqrt(2.0 * math.log(path.p - d) / n_c)
        ratio = lam / theoretical if theoretical > 0 else math.inf
        rows.append((position, float(lam), d, theoretical, ratio, float(lam) ** 2 * d))
    return pd.DataFrame(rows, columns=SERIES_COLUMNS)


def construction_lambda_series(
    data: Dataset,
    penalty: PenaltySpec,
    grid: LambdaGrid,
    plan: SplitPlan,
    sigma: float,
    threads: int = 1,
) -> pd.DataFrame:
    """theoretical_lambda_series of every construction-set path of a CV(n_v) plan, tagged by split."""
    frames = []
    for j, (path, _, _) in enumerate(fit_split_paths(data, penalty, grid, plan, threads)):
        if path.n_points == 0:
            continue
        frame = theoretical_lambda_series(path, plan.construction(j).size, sigma)
        frame.insert(0, "split", j)
        frames.append(frame)
    if not frames:
        return pd.DataFrame(columns=["split"] + SERIES_COLUMNS)
    return pd.concat(frames, ignore_index=True)
