"""argparse front end producing a validated RunConfig."""

from __future__ import annotations

import argparse
from typing import Sequence

from pydantic import ValidationError

from src.config import get_int_setting
from src.data.models import (
    Command,
    Diagnostic,
    FamilyKind,
    OutputFormat,
    PenaltyKind,
    RunConfig,
    SelectionMethod,
    SelectionRule,
)
from src.errors import ArgumentError, ConfigError


class _Parser(argparse.ArgumentParser):
    """Raise instead of exiting so usage errors reach the JSON error record."""

    def error(self, message):
        raise ArgumentError(f"usage: {self.prog}: {message}")


def _choices(enum) -> list[str]:
    return [member.value for member in enum]


def _add_model_options(p: argparse.ArgumentParser) -> None:
    p.add_argument("--data", dest="data_path", help="CSV file with a header row")
    p.add_argument("--response", dest="response_column", help="name of the response column")
    p.add_argument("--family", choices=_choices(FamilyKind), default=FamilyKind.GAUSSIAN.value)
    p.add_argument("--penalty", choices=_choices(PenaltyKind), default=PenaltyKind.LASSO.value)
    p.add_argument("--gamma", type=float, help="concavity for scad/mcp (default 3)")
    p.add_argument("--n-lambda", dest="n_lambda", type=int, default=100)
    p.add_argument("--min-ratio", dest="min_ratio", type=float)
    p.add_argument("--intercept", action="store_true", help="fit an unpenalized intercept")


def _add_method_options(p: argparse.ArgumentParser) -> None:
    p.add_argument("--method", choices=_choices(SelectionMethod), default=SelectionMethod.KFOLD.value)
    p.add_argument("--k", type=int, default=10, help="number of folds")
    p.add_argument("--nc", dest="n_c", type=int, help="construction-set size for cv_nv and ccv")
    p.add_argument("--r", type=int, default=50, help="number of Monte-Carlo splits")
    p.add_argument("--rule", choices=_choices(SelectionRule), default=SelectionRule.MIN.value)


def _add_common_options(p: argparse.ArgumentParser) -> None:
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--output", dest="output_path", help="output file (directory for simulate)")
    p.add_argument("--format", dest="output_format", choices=_choices(OutputFormat), default=OutputFormat.JSON.value)
    p.add_argument("--threads", type=int, help="worker threads (default CCV_THREADS)")
    p.add_argument("--log-level", dest="log_level", help="DEBUG, INFO, WARNING or ERROR")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="ccv", description="Penalized GLM paths and tuning-parameter selection.")
    commands = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    fit = commands.add_parser(Command.FIT.value, help="fit a solution path")
    _add_model_options(fit)
    _add_common_options(fit)

    cv = commands.add_parser(Command.CV.value, help="select a tuning parameter")
    _add_model_options(cv)
    _add_method_options(cv)
    _add_common_options(cv)

    sim = commands.add_parser(Command.SIMULATE.value, help="run a simulation study")
    source = sim.add_mutually_exclusive_group()
    source.add_argument("--config", dest="config_path", help="JSON simulation config")
    source.add_argument("--preset", choices=["linear", "logistic"])
    _add_model_options(sim)
    _add_method_options(sim)
    sim.add_argument("--rho", type=float, default=0.0)
    sim.add_argument("--reps", dest="n_reps", type=int)
    sim.add_argument("--full-scale", dest="full_scale", action="store_true", help="100 reps and r=50")
    sim.add_argument("--write-data", dest="write_data", help="directory for the first replication's data")
    sim.add_argument("--train-size", dest="train_size", type=int, help="training rows for --data studies")
    _add_common_options(sim)

    diag = commands.add_parser(Command.DIAGNOSE.value, help="analytic checks")
    diag.add_argument("diagnostic", choices=_choices(Diagnostic))
    _add_model_options(diag)
    _add_method_options(diag)
    diag.add_argument("--n", type=int)
    diag.add_argument("--p", type=int)
    diag.add_argument("--sigma", type=float, default=1.0)
    diag.add_argument("--k-order", dest="k_order", type=int, default=3)
    diag.add_argument("--l-order", dest="l_order", type=int, default=2)
    diag.add_argument("--trials", type=int, default=2000)
    diag.add_argument("--rho-model", dest="rho_model", default="iid", help="iid or ar1(rho)")
    diag.add_argument("--truth", help="comma-separated true support indices")
    _add_common_options(diag)
    return parser


def _parse_truth(text: str | None) -> list[int] | None:
    if text is None:
        return None
    try:
        return [int(part) for part in text.split(",") if part.strip()]
    except ValueError as e:
        raise ArgumentError(f"--truth must be comma-separated integers, got {text!r}") from e


def parse_args(argv: Sequence[str] | None = None) -> tuple[RunConfig, str | None]:
    """Returns the validated config and the requested log level."""
    namespace = vars(build_parser().parse_args(argv))
    log_level = namespace.pop("log_level", None)
    if "truth" in namespace:
        namespace["truth"] = _parse_truth(namespace["truth"])
    if namespace.get("threads") is None:
        namespace["threads"] = get_int_setting("CCV_THREADS", minimum=1)
    values = {key: value for key, value in namespace.items() if value is not None}
    try:
        return RunConfig.model_validate(values), log_level
    except ValidationError as e:
        raise ConfigError(_summarize(e)) from e


def _summarize(error: ValidationError) -> str:
    parts = []
    for item in error.errors():
        where = ".".join(str(x) for x in item["loc"]) or "config"
        parts.append(f"{where}: {item['msg']}")
    return "; ".join(parts)
