"""Repeated selector comparisons on simulated or held-out real data.

Each replication draws its data from seed ``base_seed + rep`` and runs every
(penalty, method) pair on it; split seeds are derived from the replication
seed and the method label, so methods share data but not splits. Results are
collected in replication order and written as plain CSV tables.
"""

from __future__ import annotations

import logging
import math
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Optional

import numpy as np
import pandas as pd
from joblib import Parallel, delayed
from pydantic import ValidationError

from src.data.loader import write_csv
from src.data.models import (
    FamilyKind,
    MethodSpec,
    PenaltyKind,
    SelectionMethod,
    SimConfig,
    construction_size,
)
from src.diagnostics.thresholds import universal_threshold
from src.errors import CcvError, ConfigError
from src.glm.dataset import Dataset
from src.path.penalties import PenaltySpec
from src.path.solver import lambda_grid
from src.selection.selectors import select
from src.selection.splits import derive_seed
from src.simulation.generators import simulate
from src.simulation.metrics import Metrics, evaluate

logger = logging.getLogger(__name__)

SUMMARY_METRICS = ("fn", "fp", "loss", "loss_penalized", "size", "exact_recovery")
SWEEP_R = 20

LINEAR_BETA = [2.0, 1.6, 1.2, 0.8, 0.4]
LOGISTIC_BETA = [3.0, 1.5, 0.0, 0.0, 2.0]


# --- Configuration ---

def preset_config(
    family: FamilyKind | str = FamilyKind.GAUSSIAN,
    rho: float = 0.0,
    full_scale: bool = False,
    penalties: Iterable[PenaltyKind] = (PenaltyKind.LASSO, PenaltyKind.SCAD, PenaltyKind.MCP),
    n_reps: int | None = None,
    base_seed: int = 0,
) -> SimConfig:
    """n=500, p=1000 AR(1) design with 10-fold, 10-fold 1SE, CV(n_v) and CCV at their default n_c."""
    family = FamilyKind(family)
    r = 50 if full_scale else 20
    if n_reps is None:
        n_reps = 100 if full_scale else (20 if family == FamilyKind.GAUSSIAN else 10)
    return SimConfig(
        family=family,
        n=500,
        p=1000,
        rho=rho,
        beta_true=LINEAR_BETA if family == FamilyKind.GAUSSIAN else LOGISTIC_BETA,
        sigma=1.0,
        methods=[
            MethodSpec(method=SelectionMethod.KFOLD, k=10),
            MethodSpec(method=SelectionMethod.KFOLD_1SE, k=10),
            MethodSpec(method=SelectionMethod.CV_NV, r=r),
            MethodSpec(method=SelectionMethod.CCV, r=r),
        ],
        penalties=list(penalties),
        n_reps=n_reps,
        base_seed=base_seed,
    )


def load_sim_config(path: str | Path) -> SimConfig:
    """Parse a JSON SimConfig file."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise ConfigError(f"cannot read simulation config {path}: {e}") from e
    try:
        return SimConfig.model_validate_json(text)
    except ValidationError as e:
        raise ConfigError(f"invalid simulation config {path}: {e}") from e


# --- Replications ---

@dataclass
class RepResult:
    rep: int
    penalty: str
    method: str
    n_c: int
    metrics: Optional[Metrics] = None
    error: str = ""
    sweep_exponent: Optional[float] = None

    def as_row(self) -> dict:
        row = {
            "rep": self.rep,
            "penalty": self.penalty,
            "method": self.method,
            "n_c": self.n_c,
            "sweep_exponent": self.sweep_exponent,
            "ok": self.metrics is not None,
            "error": self.error,
        }
        m = self.metrics
        row.update({
            "fn": None if m is None else m.fn_count,
            "fp": None if m is None else m.fp_count,
            "loss": None if m is None else m.loss,
            "loss_penalized": None if m is None else m.loss_penalized,
            "loss_name": None if m is None else m.loss_name,
            "size": None if m is None else m.model_size,
            "lambda": None if m is None else m.selected_lambda,
            "exact_recovery": None if m is None else m.exact_recovery,
            "refit_used": None if m is None else m.refit_used,
        })
        return row


def sweep_specs(config: SimConfig) -> list[tuple[float, MethodSpec]]:
    specs = []
    for exponent in config.nc_sweep:
        for method in config.sweep_methods:
            r = next((m.r for m in config.methods if m.method == method), SWEEP_R)
            specs.append((exponent, MethodSpec(method=method, nc_exponent=exponent, r=r)))
    return specs


def _run_methods(
    rep: int,
    seed: int,
    train: Dataset,
    test: Dataset,
    truth: Optional[tuple[int, ...]],
    penalties: list[PenaltySpec],
    methods: list[tuple[Optional[float], MethodSpec]],
    n_lambda: int,
    min_ratio: Optional[float],
    intercept: bool = False,
) -> list[RepResult]:
    results = []
    try:
        grid = lambda_grid(train, n_lambda, min_ratio, intercept=intercept)
    except CcvError as e:
        logger.warning("replication skipped rep=%d reason=%s", rep, e)
        return [
            RepResult(rep, str(penalty), spec.label(train.n, train.family.kind),
                      spec.resolve_n_c(train.n, train.family.kind), error=str(e), sweep_exponent=exponent)
            for penalty in penalties for exponent, spec in methods
        ]

    for penalty in penalties:
        for exponent, spec in methods:
            label = spec.label(train.n, train.family.kind)
            result = RepResult(rep, str(penalty), label, spec.resolve_n_c(train.n, train.family.kind),
                               sweep_exponent=exponent)
            started = time.perf_counter()
            try:
                report = select(train, penalty, grid, spec, derive_seed(seed, label), intercept=intercept)
                result.metrics = evaluate(report, truth, test, time.perf_counter() - started)
            except CcvError as e:
                logger.warning("selector failed rep=%d penalty=%s method=%s reason=%s", rep, penalty, label, e)
                result.error = str(e)
            results.append(result)
    return results


def run_replication(config: SimConfig, rep: int) -> list[RepResult]:
    seed = config.base_seed + rep
    train, test = simulate(config, seed)
    penalties = [PenaltySpec.build(kind, config.gamma_for(kind)) for kind in config.penalties]
    methods = [(None, spec) for spec in config.methods] + list(sweep_specs(config))
    return _run_methods(rep, seed, train, test, config.true_support(), penalties, methods,
                        config.n_lambda, config.min_ratio)


# --- Aggregation ---

@dataclass
class ExperimentResult:
    log: pd.DataFrame
    summary: pd.DataFrame
    lambda_table: pd.DataFrame
    nc_sweep: pd.DataFrame = field(default_factory=pd.DataFrame)

    def format_table(self) -> str:
        """mean(sd) per (method, penalty) and metric, in the order the rows first appear."""
        if self.summary.empty:
            return "(no results)"
        cells = self.summary.assign(
            cell=[
                "NA" if pd.isna(mean) else f"{mean:.2f}({sd:.2f})"
                for mean, sd in zip(self.summary["mean"], self.summary["sd"])
            ]
        )
        table = cells.pivot_table(
            index=["method", "penalty"], columns="metric", values="cell", aggfunc="first", sort=False
        )
        columns = [m for m in SUMMARY_METRICS if m in table.columns]
        return table[columns].to_string()

    def write(self, out_dir: str | Path) -> list[Path]:
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        written = []
        for name, frame in (("per_rep.csv", self.log), ("aggregate.csv", self.summary),
                            ("lambda.csv", self.lambda_table), ("nc_sweep.csv", self.nc_sweep)):
            if name == "nc_sweep.csv" and frame.empty:
                continue
            path = out_dir / name
            frame.to_csv(path, index=False, float_format="%.10g")
            written.append(path)
        table = out_dir / "table.txt"
        table.write_text(self.format_table() + "\n", encoding="utf-8")
        written.append(table)
        return written


def _mean_sd(values: pd.Series) -> tuple[float, float]:
    values = values.dropna().astype(float)
    if values.empty:
        return math.nan, math.nan
    sd = float(values.std(ddof=1)) if len(values) > 1 else 0.0
    return float(values.mean()), sd


def summarize(log: pd.DataFrame) -> pd.DataFrame:
    """Columns: method, penalty, metric, mean, sd, n_ok, n_failed."""
    rows = []
    main = log[log["sweep_exponent"].isna()]
    for (method, penalty), group in main.groupby(["method", "penalty"], sort=False):
        ok = group[group["ok"]]
        for metric in SUMMARY_METRICS:
            if ok[metric].isna().all():
                continue
            mean, sd = _mean_sd(ok[metric])
            rows.append({
                "method": method,
                "penalty": penalty,
                "metric": metric,
                "mean": mean,
                "sd": sd,
                "n_ok": int(ok[metric].notna().sum()),
                "n_failed": int((~group["ok"]).sum()),
            })
    return pd.DataFrame(rows, columns=["method", "penalty", "metric", "mean", "sd", "n_ok", "n_failed"])


def lambda_summary(log: pd.DataFrame, universal: Optional[float]) -> pd.DataFrame:
    rows = []
    main = log[log["sweep_exponent"].isna() & log["ok"]]
    for (method, penalty), group in main.groupby(["method", "penalty"], sort=False):
        mean, sd = _mean_sd(group["lambda"])
        rows.append({"method": method, "penalty": penalty, "mean_lambda": mean, "sd_lambda": sd,
                     "universal": universal})
    return pd.DataFrame(rows, columns=["method", "penalty", "mean_lambda", "sd_lambda", "universal"])


def sweep_summary(log: pd.DataFrame, n: int) -> pd.DataFrame:
    """Median FP (positive) and minus median FN per n_c exponent."""
    sweep = log[log["sweep_exponent"].notna() & log["ok"]]
    rows = []
    for (penalty, exponent, method), group in sweep.groupby(["penalty", "sweep_exponent", "method"], sort=False):
        rows.append({
            "penalty": penalty,
            "method": method.split("(")[0],
            "exponent": exponent,
            "n_c": construction_size(n, exponent),
            "median_fp": float(group["fp"].astype(float).median()),
            "neg_median_fn": -float(group["fn"].astype(float).median()),
        })
    return pd.DataFrame(rows, columns=["penalty", "method", "exponent", "n_c", "median_fp", "neg_median_fn"])


def _collect(results: list[list[RepResult]]) -> pd.DataFrame:
    return pd.DataFrame([r.as_row() for batch in results for r in batch])


def run_experiment(config: SimConfig, threads: int | None = None) -> ExperimentResult:
    """All replications of ``config``; ``threads`` overrides config.threads."""
    jobs = threads or config.threads
    logger.info("experiment start family=%s n=%d p=%d rho=%g reps=%d threads=%d",
                config.family.value, config.n, config.p, config.rho, config.n_reps, jobs)
    results = Parallel(n_jobs=jobs, prefer="threads")(
        delayed(run_replication)(config, rep) for rep in range(config.n_reps)
    )
    log = _collect(results)
    universal = (
        universal_threshold(config.n, config.p, config.sigma) if config.family == FamilyKind.GAUSSIAN else None
    )
    return ExperimentResult(
        log=log,
        summary=summarize(log),
        lambda_table=lambda_summary(log, universal),
        nc_sweep=sweep_summary(log, config.n) if config.nc_sweep else pd.DataFrame(),
    )


def run_holdout_study(
    data: Dataset,
    methods: list[MethodSpec],
    penalties: list[PenaltySpec],
    train_size: int,
    n_reps: int = 100,
    base_seed: int = 0,
    n_lambda: int = 100,
    min_ratio: Optional[float] = None,
    threads: int = 1,
    intercept: bool = False,
) -> ExperimentResult:
    """Repeated random train/holdout splits of real data; FN and FP are unavailable."""
    if not 2 <= train_size <= data.n - 2:
        raise ConfigError(f"train_size must satisfy 2 <= train_size <= n - 2 = {data.n - 2}, got {train_size}")

    def one(rep: int) -> list[RepResult]:
        seed = base_seed + rep
        rows = np.random.default_rng(seed).permutation(data.n)
        train, test = data.subset(np.sort(rows[:train_size])), data.subset(np.sort(rows[train_size:]))
        return _run_methods(rep, seed, train, test, None, penalties, [(None, m) for m in methods],
                            n_lambda, min_ratio, intercept)

    results = Parallel(n_jobs=threads, prefer="threads")(delayed(one)(rep) for rep in range(n_reps))
    log = _collect(results)
    return ExperimentResult(log=log, summary=summarize(log), lambda_table=lambda_summary(log, None))


def write_replication_data(config: SimConfig, out_dir: str | Path, rep: int = 0) -> list[Path]:
    """Write the train and test sets replication ``rep`` would use."""
    train, test = simulate(config, config.base_seed + rep)
    out_dir = Path(out_dir)
    return [write_csv(train, out_dir / f"train_rep{rep}.csv"), write_csv(test, out_dir / f"test_rep{rep}.csv")]
