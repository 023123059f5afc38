"""Seeded validation/construction splits."""

from __future__ import annotations

import logging
import zlib
from dataclasses import dataclass

import numpy as np

from src.errors import ArgumentError

logger = logging.getLogger(__name__)

MAX_GUARD_ATTEMPTS = 100
MIN_CLASS_COUNT = 2


@dataclass(frozen=True, eq=False)
class SplitPlan:
    """r pairs (validation, construction), each a sorted partition of range(n).

    For Monte-Carlo plans every validation set has n_v rows; k-fold plans carry
    the nominal sizes and folds may differ by one.
    """

    n: int
    n_v: int
    n_c: int
    r: int
    seed: int
    splits: tuple[tuple[np.ndarray, np.ndarray], ...]
    kind: str = "monte_carlo"

    def __post_init__(self):
        if self.n_v + self.n_c != self.n:
            raise ArgumentError(f"n_v + n_c = {self.n_v + self.n_c} but n = {self.n}")
        if len(self.splits) != self.r:
            raise ArgumentError(f"plan declares r={self.r} but holds {len(self.splits)} splits")
        for validation, construction in self.splits:
            both = np.concatenate([validation, construction])
            if both.size != self.n or not np.array_equal(np.sort(both), np.arange(self.n)):
                raise ArgumentError("every split must partition range(n)")
            if self.kind == "monte_carlo" and validation.size != self.n_v:
                raise ArgumentError(f"validation set of size {validation.size}, expected {self.n_v}")
            validation.setflags(write=False)
            construction.setflags(write=False)

    def validation(self, j: int) -> np.ndarray:
        return self.splits[j][0]

    def construction(self, j: int) -> np.ndarray:
        return self.splits[j][1]

    def __iter__(self):
        return iter(self.splits)

    def __len__(self) -> int:
        return self.r


def _balanced(y: np.ndarray, rows: np.ndarray) -> bool:
    ones = int(np.sum(y[rows]))
    return ones >= MIN_CLASS_COUNT and rows.size - ones >= MIN_CLASS_COUNT


def monte_carlo_splits(n: int, n_c: int, r: int, seed: int, y: np.ndarray | None = None) -> SplitPlan:
    """r independent uniform splits with |construction| = n_c.

    Pass a 0/1 ``y`` to resample construction sets holding fewer than two
    observations of either class (at most 100 attempts per split).
    """
    if not 2 <= n_c < n:
        raise ArgumentError(f"need 2 <= n_c < n, got n_c={n_c}, n={n}")
    if r < 1:
        raise ArgumentError(f"r must be >= 1, got {r}")
    rng = np.random.default_rng(seed)
    guard = y is not None and _balanced(np.asarray(y), np.arange(n)) and n_c >= 2 * MIN_CLASS_COUNT
    if y is not None and not guard:
        logger.info("class-balance guard not applied n_c=%d need_n_c>=%d or each class >= %d in the data",
                    n_c, 2 * MIN_CLASS_COUNT, MIN_CLASS_COUNT)
    y = None if y is None else np.asarray(y)

    splits = []
    resampled = 0
    for _ in range(r):
        perm = rng.permutation(n)
        attempts = 1
        while guard and not _balanced(y, perm[:n_c]) and attempts < MAX_GUARD_ATTEMPTS:
            perm = rng.permutation(n)
            attempts += 1
        resampled += attempts - 1
        splits.append((np.sort(perm[n_c:]), np.sort(perm[:n_c])))
    if resampled:
        logger.info("class-balance guard resampled construction sets draws=%d n_c=%d r=%d", resampled, n_c, r)
    return SplitPlan(n=n, n_v=n - n_c, n_c=n_c, r=r, seed=seed, splits=tuple(splits))


def kfold_splits(n: int, k: int, seed: int) -> SplitPlan:
    """One shuffled partition into k folds of size floor(n/k) or ceil(n/k)."""
    if not 2 <= k <= n:
        raise ArgumentError(f"need 2 <= k <= n, got k={k}, n={n}")
    rng = np.random.default_rng(seed)
    folds = np.array_split(rng.permutation(n), k)
    everything = np.arange(n)
    splits = tuple((np.sort(fold), np.setdiff1d(everything, fold)) for fold in folds)
    n_v = int(np.ceil(n / k))
    return SplitPlan(n=n, n_v=n_v, n_c=n - n_v, r=k, seed=seed, splits=splits, kind="kfold")


def derive_seed(parent: int, label: str) -> int:
    """Child seed stable across interpreter runs (no reliance on hash())."""
    sequence = np.random.SeedSequence([int(parent) % 2**63, zlib.crc32(label.encode("utf-8"))])
    return int(sequence.generate_state(1, dtype=np.uint64)[0] >> np.uint64(1))


def required_splits(n: int, n_c: int) -> int:
    """(n / n_c)^2: the split count below which Monte-Carlo CV may not be consistent."""
    return int(np.ceil((n / n_c) ** 2))
