"""Pydantic models and enums shared by the command line and the simulation harness."""

import math
from enum import Enum
from pathlib import Path
from typing import Optional

from pydantic import BaseModel, Field, model_validator


# --- Enums ---

class FamilyKind(str, Enum):
    GAUSSIAN = "gaussian"
    BINOMIAL = "binomial"


class PenaltyKind(str, Enum):
    LASSO = "lasso"
    SCAD = "scad"
    MCP = "mcp"


class LossMetric(str, Enum):
    PE = "pe"
    CE = "ce"
    NLL = "nll"


class SelectionMethod(str, Enum):
    KFOLD = "kfold"
    KFOLD_1SE = "kfold_1se"
    CV_NV = "cv_nv"
    CCV = "ccv"


class SelectionRule(str, Enum):
    MIN = "min"
    ONE_SE = "one_se"


class CurveAxis(str, Enum):
    LAMBDA_INDEX = "lambda_index"
    ACTIVE_SET_INDEX = "active_set_index"


class Command(str, Enum):
    FIT = "fit"
    CV = "cv"
    SIMULATE = "simulate"
    DIAGNOSE = "diagnose"


class OutputFormat(str, Enum):
    CSV = "csv"
    JSON = "json"


class Diagnostic(str, Enum):
    UNIVERSAL = "universal"
    LEMMA1 = "lemma1"
    SHRINKAGE = "shrinkage"
    COHERENT_RATE = "cr"
    LAMBDA_RATIO = "lambda-ratio"


# Construction-set exponents n_c = ceil(n^e) used when a method gives no n_c.
DEFAULT_NC_EXPONENTS = {
    (SelectionMethod.CV_NV, FamilyKind.GAUSSIAN): 2 / 3,
    (SelectionMethod.CV_NV, FamilyKind.BINOMIAL): 3 / 4,
    (SelectionMethod.CCV, FamilyKind.GAUSSIAN): 1 / 2,
    (SelectionMethod.CCV, FamilyKind.BINOMIAL): 2 / 3,
}


def construction_size(n: int, exponent: float) -> int:
    """ceil(n^exponent), guarded against 99.99999999999997-style round-off."""
    return int(math.ceil(n ** exponent - 1e-9))


def default_penalty_gamma(kind: PenaltyKind) -> float:
    return math.inf if kind == PenaltyKind.LASSO else 3.0


# --- Selection methods ---

class MethodSpec(BaseModel):
    method: SelectionMethod
    k: int = Field(10, ge=2)
    n_c: Optional[int] = Field(None, ge=2)
    nc_exponent: Optional[float] = Field(None, gt=0.0, lt=1.0)
    r: int = Field(20, ge=1)

    @property
    def rule(self) -> SelectionRule:
        return SelectionRule.ONE_SE if self.method == SelectionMethod.KFOLD_1SE else SelectionRule.MIN

    @property
    def uses_kfold(self) -> bool:
        return self.method in (SelectionMethod.KFOLD, SelectionMethod.KFOLD_1SE)

    def resolve_n_c(self, n: int, family: FamilyKind) -> int:
        """Construction-set size for Monte-Carlo methods (n - n/k for k-fold)."""
        if self.uses_kfold:
            return n - int(math.ceil(n / self.k))
        if self.n_c is not None:
            return self.n_c
        exponent = self.nc_exponent or DEFAULT_NC_EXPONENTS[(self.method, family)]
        return construction_size(n, exponent)

    def label(self, n: int | None = None, family: FamilyKind | None = None) -> str:
        if self.uses_kfold:
            return f"{self.method.value}(k={self.k})"
        if n is not None and family is not None:
            return f"{self.method.value}(n_c={self.resolve_n_c(n, family)})"
        if self.n_c is not None:
            return f"{self.method.value}(n_c={self.n_c})"
        if self.nc_exponent is not None:
            return f"{self.method.value}(e={self.nc_exponent:.4g})"
        return self.method.value


# --- Simulation ---

class SimConfig(BaseModel):
    family: FamilyKind = FamilyKind.GAUSSIAN
    n: int = Field(500, ge=10)
    p: int = Field(1000, ge=1)
    rho: float = Field(0.0, ge=0.0, lt=1.0)
    beta_true: list[float] = [2.0, 1.6, 1.2, 0.8, 0.4]  # leading coordinates, zeros elsewhere
    sigma: float = Field(1.0, ge=0.0)
    methods: list[MethodSpec] = []
    penalties: list[PenaltyKind] = [PenaltyKind.LASSO]
    gamma: Optional[float] = None
    n_reps: int = Field(20, ge=1)
    base_seed: int = 0
    test_size: Optional[int] = Field(None, ge=1)
    n_lambda: int = Field(100, ge=2)
    min_ratio: Optional[float] = Field(None, gt=0.0, lt=1.0)
    nc_sweep: list[float] = []  # exponents e for n_c = ceil(n^e)
    sweep_methods: list[SelectionMethod] = [SelectionMethod.CCV]
    threads: int = Field(1, ge=1)

    @model_validator(mode="after")
    def _check_consistency(self) -> "SimConfig":
        if not self.methods:
            raise ValueError("at least one selection method is required")
        if len(self.beta_true) > self.p:
            raise ValueError(f"beta_true has {len(self.beta_true)} entries but p={self.p}")
        for spec in self.methods:
            n_c = spec.resolve_n_c(self.n, self.family)
            if not 2 <= n_c < self.n:
                raise ValueError(f"{spec.label()} resolves to n_c={n_c}, need 2 <= n_c < n={self.n}")
            if spec.uses_kfold and spec.k > self.n:
                raise ValueError(f"k={spec.k} exceeds n={self.n}")
        for exponent in self.nc_sweep:
            if not 0.0 < exponent < 1.0:
                raise ValueError(f"n_c sweep exponent {exponent} must lie in (0, 1)")
            if construction_size(self.n, exponent) >= self.n:
                raise ValueError(f"n_c sweep exponent {exponent} gives n_c >= n")
        bad = [m.value for m in self.sweep_methods if m not in (SelectionMethod.CCV, SelectionMethod.CV_NV)]
        if bad:
            raise ValueError(f"n_c sweep only supports ccv and cv_nv, got {bad}")
        for kind in self.penalties:
            _check_gamma(kind, self.gamma)
        return self

    @property
    def resolved_test_size(self) -> int:
        return self.test_size or self.n

    def true_support(self) -> tuple[int, ...]:
        return tuple(j for j, b in enumerate(self.beta_true) if b != 0.0)

    def gamma_for(self, kind: PenaltyKind) -> float:
        if kind == PenaltyKind.LASSO:
            return math.inf
        return self.gamma if self.gamma is not None else default_penalty_gamma(kind)


def _check_gamma(kind: PenaltyKind, gamma: float | None) -> None:
    if gamma is None or kind == PenaltyKind.LASSO:
        return
    if kind == PenaltyKind.SCAD and not gamma > 2.0:
        raise ValueError(f"scad requires gamma > 2, got {gamma}")
    if kind == PenaltyKind.MCP and not gamma > 1.0:
        raise ValueError(f"mcp requires gamma > 1, got {gamma}")


# --- Command line ---

class RunConfig(BaseModel):
    command: Command
    data_path: Optional[Path] = None
    response_column: Optional[str] = None
    family: FamilyKind = FamilyKind.GAUSSIAN
    penalty: PenaltyKind = PenaltyKind.LASSO
    gamma: Optional[float] = None
    n_lambda: int = Field(100, ge=2)
    min_ratio: Optional[float] = Field(None, gt=0.0, lt=1.0)
    method: SelectionMethod = SelectionMethod.KFOLD
    k: int = Field(10, ge=2)
    n_c: Optional[int] = Field(None, ge=2)
    r: int = Field(50, ge=1)
    seed: int = 1
    rule: SelectionRule = SelectionRule.MIN
    output_path: Optional[Path] = None
    output_format: OutputFormat = OutputFormat.JSON
    intercept: bool = False
    threads: int = Field(1, ge=1)

    # simulate
    config_path: Optional[Path] = None
    preset: Optional[str] = None  # "linear" or "logistic"
    rho: float = Field(0.0, ge=0.0, lt=1.0)
    n_reps: Optional[int] = Field(None, ge=1)
    full_scale: bool = False
    write_data: Optional[Path] = None
    train_size: Optional[int] = Field(None, ge=2)

    # diagnose
    diagnostic: Optional[Diagnostic] = None
    n: Optional[int] = Field(None, ge=1)
    p: Optional[int] = Field(None, ge=2)
    sigma: float = Field(1.0, ge=0.0)
    k_order: int = Field(3, ge=3)
    l_order: int = Field(2, ge=2)
    trials: int = Field(2000, ge=1)
    rho_model: str = "iid"
    truth: Optional[list[int]] = None

    @model_validator(mode="after")
    def _check_required(self) -> "RunConfig":
        needs_data = self.command in (Command.FIT, Command.CV) or (
            self.command == Command.DIAGNOSE
            and self.diagnostic in (Diagnostic.SHRINKAGE, Diagnostic.COHERENT_RATE, Diagnostic.LAMBDA_RATIO)
        )
        if needs_data and (self.data_path is None or self.response_column is None):
            raise ValueError(f"'{self.command.value}' requires --data and --response")
        if self.command == Command.SIMULATE:
            sources = [s for s in (self.config_path, self.preset, self.data_path) if s is not None]
            if len(sources) != 1:
                raise ValueError("simulate requires exactly one of --config, --preset or --data")
            if self.preset is not None and self.preset not in ("linear", "logistic"):
                raise ValueError(f"unknown preset {self.preset!r}; expected linear or logistic")
            if self.data_path is not None and self.response_column is None:
                raise ValueError("simulate --data requires --response")
        if self.command == Command.DIAGNOSE:
            if self.diagnostic is None:
                raise ValueError("diagnose requires a diagnostic name")
            if self.diagnostic == Diagnostic.UNIVERSAL and (self.n is None or self.p is None):
                raise ValueError("diagnose universal requires --n and --p")
            if self.diagnostic == Diagnostic.LEMMA1:
                if self.p is None:
                    raise ValueError("diagnose lemma1 requires --p")
                if not self.l_order < self.k_order < self.p:
                    raise ValueError("diagnose lemma1 requires 2 <= l < k < p")
        if self.method == SelectionMethod.KFOLD and self.rule == SelectionRule.ONE_SE:
            self.method = SelectionMethod.KFOLD_1SE
        _check_gamma(self.penalty, self.gamma)
        return self

    def method_spec(self) -> MethodSpec:
        return MethodSpec(method=self.method, k=self.k, n_c=self.n_c, r=self.r)
