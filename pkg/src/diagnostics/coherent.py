"""Coherent rate: how often split paths reproduce the whole-data active set."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

import numpy as np
import pandas as pd

from src.errors import ArgumentError
from src.glm.dataset import ActiveSet, Dataset
from src.path.penalties import PenaltySpec
from src.path.solver import LambdaGrid
from src.selection.selectors import fit_split_paths
from src.selection.splits import SplitPlan


@dataclass(frozen=True, eq=False)
class CoherentRateSeries:
    cr: np.ndarray
    r: int
    cv_choice_position: Optional[int] = None
    first_noise_position: Optional[int] = None
    lambdas: Optional[np.ndarray] = None

    def to_frame(self) -> pd.DataFrame:
        frame = pd.DataFrame({"position": np.arange(self.cr.size), "cr": self.cr})
        if self.lambdas is not None:
            frame.insert(1, "lambda", self.lambdas)
        return frame


def coherent_rate(
    full_path_sets: Sequence[ActiveSet],
    split_path_sets: Sequence[Sequence[Optional[ActiveSet]]],
    cv_choice_position: int | None = None,
    first_noise_position: int | None = None,
    lambdas: np.ndarray | None = None,
) -> CoherentRateSeries:
    """CR(l) = #{j : split j's active set at position l equals the whole-data one} / r.

    A split entry of None (position never fitted) never matches.
    """
    full = list(full_path_sets)
    splits = [list(s) for s in split_path_sets]
    if not splits:
        raise ArgumentError("coherent_rate needs at least one split sequence")
    for j, sequence in enumerate(splits):
        if len(sequence) != len(full):
            raise ArgumentError(f"split {j} has {len(sequence)} positions, the whole-data path {len(full)}")
    matches = np.array(
        [sum(1 for sequence in splits if sequence[l] == full[l]) for l in range(len(full))],
        dtype=int,
    )
    return CoherentRateSeries(
        cr=matches / len(splits),
        r=len(splits),
        cv_choice_position=cv_choice_position,
        first_noise_position=first_noise_position,
        lambdas=lambdas,
    )


def split_active_sets(
    data: Dataset,
    penalty: PenaltySpec,
    grid: LambdaGrid,
    plan: SplitPlan,
    threads: int = 1,
    intercept: bool = False,
) -> list[list[Optional[ActiveSet]]]:
    """Active-set sequence of every construction-set path, padded with None past a divergence."""
    sequences = []
    for path, _, _ in fit_split_paths(data, penalty, grid, plan, threads, intercept):
        sets: list[Optional[ActiveSet]] = list(path.active_sets)
        sets.extend([None] * (grid.n_lambda - len(sets)))
        sequences.append(sets)
    return sequences


def first_noise_position(sets: Sequence[ActiveSet], truth: Iterable[int]) -> Optional[int]:
    """First position whose active set holds an index outside ``truth``."""
    truth = set(int(j) for j in truth)
    for position, active in enumerate(sets):
        if any(j not in truth for j in active):
            return position
    return None
