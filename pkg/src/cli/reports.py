"""JSON and CSV payloads written by the command line."""

from __future__ import annotations

import json
import math
import sys
from pathlib import Path
from typing import Any, Optional, Sequence

import numpy as np
import pandas as pd

from src.errors import CcvError
from src.glm.dataset import ActiveSet
from src.mle.restricted import RestrictedFit
from src.path.solver import SolutionPath
from src.selection.selectors import SelectionReport

SCHEMA_VERSION = "1"


def _clean(value: Any) -> Any:
    """JSON-safe copy: numpy scalars to Python, non-finite floats to None."""
    if isinstance(value, dict):
        return {str(k): _clean(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_clean(v) for v in value]
    if isinstance(value, np.ndarray):
        return [_clean(v) for v in value.tolist()]
    if isinstance(value, (np.bool_, bool)):
        return bool(value)
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (np.floating, float)):
        value = float(value)
        return value if math.isfinite(value) else None
    return value


def sparse_pairs(beta: np.ndarray) -> list[list]:
    """Nonzero coefficients as [index, value] pairs."""
    beta = np.asarray(beta, dtype=float)
    return [[int(j), float(beta[j])] for j in np.flatnonzero(beta)]


def _names(active: ActiveSet, column_names: Optional[Sequence[str]]) -> Optional[list[str]]:
    if column_names is None:
        return None
    return [column_names[j] for j in active]


def path_payload(path: SolutionPath) -> dict:
    points = []
    for k, lam in enumerate(path.lambdas):
        points.append({
            "position": k,
            "lambda": float(lam),
            "nonzero": path.active_sets[k].d,
            "converged": bool(path.converged[k]),
            "n_iter": int(path.n_iter[k]),
            "intercept": path.intercept(k),
            "coef": sparse_pairs(path.beta(k)),
        })
    return {
        "schema_version": SCHEMA_VERSION,
        "command": "fit",
        "family": path.family.kind.value,
        "penalty": str(path.penalty),
        "p": path.p,
        "lambda_max": path.grid.lambda_max,
        "min_ratio": path.grid.min_ratio,
        "points": points,
    }


def path_frame(path: SolutionPath) -> pd.DataFrame:
    """Sparse triplets (position, lambda, index, value)."""
    rows = []
    for k, lam in enumerate(path.lambdas):
        for j, value in sparse_pairs(path.beta(k)):
            rows.append((k, float(lam), j, value))
    return pd.DataFrame(rows, columns=["position", "lambda", "index", "value"])


def refit_payload(fit: Optional[RestrictedFit]) -> Optional[dict]:
    if fit is None:
        return None
    return {
        "converged": fit.converged,
        "coef": sparse_pairs(fit.full_coef),
        "intercept": fit.intercept,
        "neg_log_lik": fit.neg_log_lik,
        "grad_norm": fit.grad_norm,
        "reason": fit.reason,
    }


def selection_payload(report: SelectionReport, column_names: Optional[Sequence[str]] = None) -> dict:
    payload = {
        "schema_version": SCHEMA_VERSION,
        "command": "cv",
        "method": report.method.value,
        "penalty": str(report.path.penalty),
        "n_c": report.n_c,
        "r": report.r,
        "selected_position": report.selected_position,
        "selected_path_position": report.selected_path_position,
        "selected_lambda": report.selected_lambda,
        "selected_active": list(report.selected_active),
        "selected_names": _names(report.selected_active, column_names),
        "penalized_coef": sparse_pairs(report.penalized_coef),
        "penalized_intercept": report.penalized_intercept,
        "refit": refit_payload(report.refit),
        "curve": {
            "axis": report.curve.axis.value,
            "points": report.curve.to_frame().to_dict(orient="records"),
        },
        "split_log": [vars(record) for record in report.split_log],
    }
    if report.candidates:
        payload["candidates"] = [list(c) for c in report.candidates]
    return _clean(payload)


def frame_payload(command: str, name: str, frame: pd.DataFrame, **extra) -> dict:
    payload = {"schema_version": SCHEMA_VERSION, "command": command, "name": name}
    payload.update(extra)
    payload["rows"] = frame.to_dict(orient="records")
    return _clean(payload)


def value_payload(command: str, name: str, value: float, **extra) -> dict:
    payload = {"schema_version": SCHEMA_VERSION, "command": command, "name": name, "value": value}
    payload.update(extra)
    return _clean(payload)


def error_record(error: Exception) -> dict:
    if isinstance(error, CcvError):
        inner = error.to_record()
    else:
        inner = {"code": "internal", "message": f"{type(error).__name__}: {error}"}
    return {"schema_version": SCHEMA_VERSION, "error": inner}


def write_json(payload: dict, path: Optional[Path]) -> None:
    text = json.dumps(_clean(payload), indent=2, allow_nan=False) + "\n"
    _emit(text, path)


def write_frame(frame: pd.DataFrame, path: Optional[Path]) -> None:
    _emit(frame.to_csv(index=False, float_format="%.17g", lineterminator="\n"), path)


def _emit(text: str, path: Optional[Path]) -> None:
    if path is None:
        sys.stdout.write(text)
        return
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8")
