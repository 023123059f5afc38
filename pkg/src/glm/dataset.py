"""Immutable (X, y) containers and active sets."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Iterator, Optional

import numpy as np

from src.data.models import FamilyKind
from src.errors import ArgumentError, DataValidationError
from src.glm.families import GlmFamily

STANDARDIZED_TOL = 1e-10


def _frozen(array: np.ndarray) -> np.ndarray:
    array = np.array(array, dtype=float, copy=True)
    array.setflags(write=False)
    return array


@dataclass(frozen=True, eq=False)
class Dataset:
    """Design matrix, response and family. Arrays are copied and made read-only."""

    X: np.ndarray
    y: np.ndarray
    family: GlmFamily
    column_names: Optional[tuple[str, ...]] = None
    standardized: bool = False

    def __post_init__(self):
        X = _frozen(self.X)
        y = _frozen(self.y).ravel()
        if X.ndim != 2:
            raise DataValidationError(f"X must be a 2-d matrix, got shape {X.shape}")
        n, p = X.shape
        if n < 2:
            raise DataValidationError(f"a dataset needs n >= 2 observations, got {n}")
        if p < 1:
            raise DataValidationError("a dataset needs at least one column")
        if y.size != n:
            raise DataValidationError(f"X has {n} rows but y has {y.size} entries")
        if not np.all(np.isfinite(X)):
            raise DataValidationError("X contains missing or non-finite values")
        if not np.all(np.isfinite(y)):
            raise DataValidationError("y contains missing or non-finite values")
        if self.family.kind == FamilyKind.BINOMIAL:
            bad = np.flatnonzero((y != 0.0) & (y != 1.0))
            if bad.size:
                raise DataValidationError(
                    f"binomial response must be 0 or 1; row {int(bad[0])} has {y[bad[0]]!r}"
                )
        if self.column_names is not None:
            names = tuple(str(c) for c in self.column_names)
            if len(names) != p:
                raise DataValidationError(f"{len(names)} column names for {p} columns")
            object.__setattr__(self, "column_names", names)
        if self.standardized:
            means = X.mean(axis=0)
            sds = X.std(axis=0, ddof=1)
            if np.max(np.abs(means)) > STANDARDIZED_TOL or np.max(np.abs(sds - 1.0)) > STANDARDIZED_TOL:
                raise DataValidationError("dataset flagged standardized but columns are not mean 0 / sd 1")
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "y", y)

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def p(self) -> int:
        return self.X.shape[1]

    def subset(self, rows: np.ndarray) -> "Dataset":
        rows = np.asarray(rows, dtype=np.intp)
        return Dataset(
            X=self.X[rows],
            y=self.y[rows],
            family=self.family,
            column_names=self.column_names,
        )

    def standardize(self) -> "Dataset":
        """Center every column and scale it to sample sd 1; constant columns are rejected."""
        sds = self.X.std(axis=0, ddof=1)
        constant = np.flatnonzero(sds == 0.0)
        if constant.size:
            raise DataValidationError(f"column {int(constant[0])} is constant and cannot be standardized")
        X = (self.X - self.X.mean(axis=0)) / sds
        # second pass removes the residual round-off of the first
        X = (X - X.mean(axis=0)) / X.std(axis=0, ddof=1)
        return Dataset(X=X, y=self.y, family=self.family, column_names=self.column_names, standardized=True)


@dataclass(frozen=True)
class ActiveSet:
    """Strictly increasing column indices of a nonzero coefficient pattern."""

    indices: tuple[int, ...] = field(default_factory=tuple)

    def __post_init__(self):
        indices = tuple(int(i) for i in self.indices)
        if any(b <= a for a, b in zip(indices, indices[1:])):
            raise ArgumentError(f"active set indices must be strictly increasing: {indices}")
        if indices and indices[0] < 0:
            raise ArgumentError(f"active set indices must be nonnegative: {indices}")
        object.__setattr__(self, "indices", indices)

    @classmethod
    def from_beta(cls, beta: np.ndarray) -> "ActiveSet":
        return cls(tuple(np.flatnonzero(np.asarray(beta) != 0.0).tolist()))

    @classmethod
    def of(cls, indices: Iterable[int]) -> "ActiveSet":
        return cls(tuple(sorted(set(int(i) for i in indices))))

    @property
    def d(self) -> int:
        return len(self.indices)

    def __len__(self) -> int:
        return len(self.indices)

    def __iter__(self) -> Iterator[int]:
        return iter(self.indices)

    def as_array(self) -> np.ndarray:
        return np.asarray(self.indices, dtype=np.intp)

    def check_bounds(self, p: int) -> None:
        if self.indices and self.indices[-1] >= p:
            raise ArgumentError(f"active index {self.indices[-1]} out of range for p={p}")

    def __str__(self) -> str:
        return "{" + ",".join(str(i) for i in self.indices) + "}"
