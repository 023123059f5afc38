"""Command dispatch and exit codes."""

from __future__ import annotations

import json
import logging
import sys
from pathlib import Path
from typing import Sequence

from src.cli import reports
from src.cli.parser import parse_args
from src.config import configure_logging, get_setting
from src.data.loader import load_csv
from src.data.models import (
    Command,
    Diagnostic,
    FamilyKind,
    MethodSpec,
    OutputFormat,
    RunConfig,
    SelectionMethod,
)
from src.diagnostics.coherent import coherent_rate, first_noise_position, split_active_sets
from src.diagnostics.order_stats import lemma1_probability
from src.diagnostics.shrinkage import shrinkage_decomposition
from src.diagnostics.thresholds import construction_lambda_series, universal_threshold
from src.errors import CcvError
from src.glm.dataset import Dataset
from src.path.penalties import PenaltySpec
from src.path.solver import fit_path, lambda_grid
from src.selection.selectors import build_plan, kfold_cv, select
from src.selection.splits import required_splits
from src.simulation.experiment import (
    preset_config,
    load_sim_config,
    run_experiment,
    run_holdout_study,
    write_replication_data,
)

logger = logging.getLogger(__name__)


def _load(config: RunConfig) -> Dataset:
    return load_csv(config.data_path, config.response_column, config.family)


def _penalty(config: RunConfig) -> PenaltySpec:
    return PenaltySpec.build(config.penalty, config.gamma)


def _emit(config: RunConfig, json_payload: dict | None, frame=None) -> None:
    if config.output_format == OutputFormat.CSV and frame is not None:
        reports.write_frame(frame, config.output_path)
    else:
        reports.write_json(json_payload, config.output_path)


def _warn_split_count(n: int, spec: MethodSpec, family: FamilyKind) -> None:
    if spec.uses_kfold:
        return
    n_c = spec.resolve_n_c(n, family)
    needed = required_splits(n, n_c)
    if spec.r < needed:
        logger.warning("few splits for consistency method=%s r=%d n=%d n_c=%d suggested=%d",
                       spec.method.value, spec.r, n, n_c, needed)


def _run_fit(config: RunConfig) -> None:
    data = _load(config)
    grid = lambda_grid(data, config.n_lambda, config.min_ratio, intercept=config.intercept)
    path = fit_path(data, _penalty(config), grid, intercept=config.intercept)
    _emit(config, reports.path_payload(path), reports.path_frame(path))


def _run_cv(config: RunConfig) -> None:
    data = _load(config)
    spec = config.method_spec()
    _warn_split_count(data.n, spec, data.family.kind)
    grid = lambda_grid(data, config.n_lambda, config.min_ratio, intercept=config.intercept)
    report = select(data, _penalty(config), grid, spec, config.seed, config.threads, config.intercept)
    _emit(config, reports.selection_payload(report, data.column_names), report.curve.to_frame())


def _run_simulate(config: RunConfig) -> None:
    out_dir = Path(config.output_path or get_setting("CCV_OUTPUT_DIR") or "output")
    if config.data_path is not None:
        data = _load(config)
        spec = config.method_spec()
        result = run_holdout_study(
            data,
            methods=[spec],
            penalties=[_penalty(config)],
            train_size=config.train_size or max(2, (5 * data.n) // 6),
            n_reps=config.n_reps or 100,
            base_seed=config.seed,
            n_lambda=config.n_lambda,
            min_ratio=config.min_ratio,
            threads=config.threads,
            intercept=config.intercept,
        )
    else:
        if config.config_path is not None:
            sim = load_sim_config(config.config_path)
            if config.n_reps is not None:
                sim = sim.model_copy(update={"n_reps": config.n_reps})
        else:
            family = FamilyKind.GAUSSIAN if config.preset == "linear" else FamilyKind.BINOMIAL
            sim = preset_config(family, config.rho, config.full_scale, n_reps=config.n_reps,
                                  base_seed=config.seed)
        for spec in sim.methods:
            _warn_split_count(sim.n, spec, sim.family)
        if config.write_data is not None:
            write_replication_data(sim, config.write_data)
        result = run_experiment(sim, threads=config.threads)
    result.write(out_dir)
    sys.stdout.write(result.format_table() + "\n")


def _run_diagnose(config: RunConfig) -> None:
    name = config.diagnostic
    command = Command.DIAGNOSE.value
    if name == Diagnostic.UNIVERSAL:
        value = universal_threshold(config.n, config.p, config.sigma)
        reports.write_json(reports.value_payload(command, name.value, value, n=config.n, p=config.p,
                                                 sigma=config.sigma), config.output_path)
        return
    if name == Diagnostic.LEMMA1:
        value = lemma1_probability(config.p, config.k_order, config.l_order, config.rho_model,
                                   trials=config.trials, seed=config.seed)
        reports.write_json(reports.value_payload(command, name.value, value, p=config.p, k=config.k_order,
                                                 l=config.l_order, rho_model=config.rho_model,
                                                 trials=config.trials, seed=config.seed), config.output_path)
        return

    data = _load(config)
    grid = lambda_grid(data, config.n_lambda, config.min_ratio, intercept=config.intercept)
    if name == Diagnostic.SHRINKAGE:
        path = fit_path(data, PenaltySpec.lasso(), grid, intercept=config.intercept)
        frame = shrinkage_decomposition(data, path).to_frame()
        _emit(config, reports.frame_payload(command, name.value, frame), frame)
        return

    penalty = _penalty(config)
    if name == Diagnostic.COHERENT_RATE:
        spec = config.method_spec()
        path = fit_path(data, penalty, grid, intercept=config.intercept)
        plan = build_plan(data, spec, config.seed)
        sets = split_active_sets(data, penalty, grid, plan, config.threads, config.intercept)
        choice = kfold_cv(data, penalty, grid, config.k, seed=config.seed, threads=config.threads,
                          intercept=config.intercept).selected_position
        noise = first_noise_position(path.active_sets, config.truth) if config.truth is not None else None
        series = coherent_rate(path.active_sets, sets, cv_choice_position=choice,
                               first_noise_position=noise, lambdas=grid.values)
        frame = series.to_frame()
        _emit(config, reports.frame_payload(command, name.value, frame, r=series.r,
                                            cv_choice_position=choice, first_noise_position=noise), frame)
        return

    # lambda-ratio: construction-set paths of a CV(n_v) plan
    spec = MethodSpec(method=SelectionMethod.CV_NV, n_c=config.n_c, r=config.r)
    plan = build_plan(data, spec, config.seed)
    frame = construction_lambda_series(data, penalty, grid, plan, config.sigma, config.threads)
    _emit(config, reports.frame_payload(command, name.value, frame, n_c=plan.n_c, sigma=config.sigma), frame)


HANDLERS = {
    Command.FIT: _run_fit,
    Command.CV: _run_cv,
    Command.SIMULATE: _run_simulate,
    Command.DIAGNOSE: _run_diagnose,
}


def _report_error(error: Exception) -> None:
    sys.stderr.write(json.dumps(reports.error_record(error)) + "\n")


def run(config: RunConfig) -> int:
    """Execute one command; returns the process exit status."""
    try:
        HANDLERS[config.command](config)
    except CcvError as e:
        logger.debug("command failed code=%s", e.code, exc_info=True)
        _report_error(e)
        return e.exit_status
    except Exception as e:
        logger.exception("unexpected failure command=%s", config.command.value)
        _report_error(e)
        return 1
    return 0


def main(argv: Sequence[str] | None = None) -> int:
    try:
        config, log_level = parse_args(argv)
        configure_logging(log_level)
    except CcvError as e:
        _report_error(e)
        return e.exit_status
    return run(config)
