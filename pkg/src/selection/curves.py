"""Averaged validation curves and the argmin rules used to read them."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
import pandas as pd

from src.data.models import CurveAxis
from src.errors import ArgumentError, SelectionError


@dataclass(frozen=True, eq=False)
class CvCurve:
    axis: CurveAxis
    positions: np.ndarray
    mean_loss: np.ndarray
    se_loss: np.ndarray
    n_valid_splits: np.ndarray
    lambdas: Optional[np.ndarray] = None

    def __len__(self) -> int:
        return self.positions.size

    def to_frame(self) -> pd.DataFrame:
        frame = pd.DataFrame({
            "position": self.positions,
            "mean_loss": self.mean_loss,
            "se_loss": self.se_loss,
            "n_valid_splits": self.n_valid_splits,
        })
        if self.lambdas is not None:
            frame.insert(1, "lambda", self.lambdas)
        return frame


def summarize_losses(
    losses: np.ndarray,
    axis: CurveAxis,
    positions: np.ndarray | None = None,
    lambdas: np.ndarray | None = None,
) -> CvCurve:
    """Average an (r, m) loss matrix over splits, ignoring non-finite entries.

    se = sd(ddof=1) / sqrt(count) over the contributing splits; 0 with a
    single contributor and NaN (as is the mean) with none.
    """
    losses = np.asarray(losses, dtype=float)
    if losses.ndim != 2:
        raise ArgumentError(f"losses must be a (splits, positions) matrix, got shape {losses.shape}")
    finite = np.isfinite(losses)
    counts = finite.sum(axis=0)

    mean = np.full(losses.shape[1], np.nan)
    se = np.full(losses.shape[1], np.nan)
    for m in np.flatnonzero(counts):
        column = losses[finite[:, m], m]
        mean[m] = column.mean()
        se[m] = column.std(ddof=1) / np.sqrt(column.size) if column.size > 1 else 0.0

    if positions is None:
        positions = np.arange(losses.shape[1])
    return CvCurve(
        axis=CurveAxis(axis),
        positions=np.asarray(positions, dtype=int),
        mean_loss=mean,
        se_loss=se,
        n_valid_splits=counts.astype(int),
        lambdas=None if lambdas is None else np.asarray(lambdas, dtype=float),
    )


def sparsest_argmin(values: np.ndarray, eligible: np.ndarray | None = None,
                    sizes: np.ndarray | None = None) -> int:
    """Index of the minimum; ties go to the smallest ``sizes`` entry, then the earliest index."""
    values = np.asarray(values, dtype=float)
    mask = np.isfinite(values)
    if eligible is not None:
        mask &= np.asarray(eligible, dtype=bool)
    if not mask.any():
        raise SelectionError("no position has a finite validation loss")
    best = np.min(values[mask])
    tied = np.flatnonzero(mask & (values == best))
    if sizes is not None:
        sizes = np.asarray(sizes)
        tied = tied[sizes[tied] == sizes[tied].min()]
    return int(tied[0])


def one_se_position(curve: CvCurve, best: int) -> int:
    """Earliest (largest lambda) position with mean_loss <= mean_loss[best] + se_loss[best]."""
    threshold = curve.mean_loss[best] + curve.se_loss[best]
    candidates = np.flatnonzero(np.isfinite(curve.mean_loss[: best + 1]) & (curve.mean_loss[: best + 1] <= threshold))
    return int(candidates[0])
