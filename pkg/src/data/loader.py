"""CSV ingestion and serialization of datasets."""

from __future__ import annotations

import logging
from pathlib import Path

import numpy as np
import pandas as pd

from src.data.models import FamilyKind
from src.errors import DataValidationError
from src.glm.dataset import Dataset
from src.glm.families import get_family

logger = logging.getLogger(__name__)

FLOAT_FORMAT = "%.17g"


def _numeric_column(raw: pd.Series, name: str) -> np.ndarray:
    """Convert one text column, citing the first offending cell (rows are 1-based, header excluded)."""
    values = pd.to_numeric(raw.str.strip(), errors="coerce")
    bad = np.flatnonzero(~np.isfinite(values.to_numpy(dtype=float)))
    if bad.size:
        row = int(bad[0])
        cell = raw.iloc[row]
        if cell.strip() == "":
            what = "missing value"
        elif pd.isna(values.iloc[row]):
            what = f"non-numeric value {cell!r}"
        else:
            what = f"non-finite value {cell!r}"
        raise DataValidationError(f"{what} in column {name!r} at row {row + 1}")
    return values.to_numpy(dtype=float)


def load_csv(path: str | Path, response_column: str, family: FamilyKind | str) -> Dataset:
    """Read a headed, comma-separated file; every column other than the response is a predictor."""
    path = Path(path)
    family = get_family(family)
    try:
        frame = pd.read_csv(path, dtype=str, keep_default_na=False, encoding="utf-8")
    except FileNotFoundError as e:
        raise DataValidationError(f"data file not found: {path}") from e
    except (pd.errors.ParserError, pd.errors.EmptyDataError, UnicodeDecodeError) as e:
        raise DataValidationError(f"cannot parse {path}: {e}") from e

    frame.columns = [str(c).strip() for c in frame.columns]
    if response_column not in frame.columns:
        raise DataValidationError(f"response column {response_column!r} not found in {path}")
    predictors = [c for c in frame.columns if c != response_column]
    if not predictors:
        raise DataValidationError(f"{path} has no predictor columns besides {response_column!r}")

    y = _numeric_column(frame[response_column], response_column)
    if family.kind == FamilyKind.BINOMIAL:
        bad = np.flatnonzero((y != 0.0) & (y != 1.0))
        if bad.size:
            row = int(bad[0])
            raise DataValidationError(
                f"binomial response must be 0 or 1; row {row + 1} of column {response_column!r} has {y[row]:g}"
            )
    X = np.column_stack([_numeric_column(frame[c], c) for c in predictors])
    logger.info("loaded dataset path=%s n=%d p=%d family=%s", path, X.shape[0], X.shape[1], family.kind.value)
    return Dataset(X=X, y=y, family=family, column_names=tuple(predictors))


def write_csv(dataset: Dataset, path: str | Path, response_column: str = "y") -> Path:
    """Write predictors then the response with 17 significant digits, so load_csv reads back the same floats."""
    path = Path(path)
    names = dataset.column_names or tuple(f"x{j + 1}" for j in range(dataset.p))
    if response_column in names:
        raise DataValidationError(f"response column name {response_column!r} clashes with a predictor")
    frame = pd.DataFrame(dataset.X, columns=list(names))
    frame[response_column] = dataset.y
    path.parent.mkdir(parents=True, exist_ok=True)
    frame.to_csv(path, index=False, float_format=FLOAT_FORMAT)
    return path
