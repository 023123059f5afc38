"""Tuning-parameter selectors.

kfold_cv and cv_nv score the solution paths of construction sets on a shared
lambda grid and average the held-out loss per grid position. ccv scores the
active sets of the whole-data path instead: each candidate is refit without
penalty on every construction set and the held-out losses are averaged per
candidate. All three finish with an unpenalized refit of the chosen active
set on the whole data.

Splits may be processed on a thread pool; results are collected in split
order, so the report does not depend on ``threads``.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from joblib import Parallel, delayed

from src.data.models import CurveAxis, FamilyKind, MethodSpec, SelectionMethod, SelectionRule
from src.errors import OversizeModelError, SelectionError, SolverDivergenceError
from src.glm.dataset import ActiveSet, Dataset
from src.glm.families import validation_loss
from src.mle.restricted import RestrictedFit, ccv_size_cap, fit_restricted
from src.path.penalties import PenaltySpec
from src.path.solver import LambdaGrid, SolutionPath, active_set_sequence, fit_path
from src.selection.curves import CvCurve, one_se_position, sparsest_argmin, summarize_losses
from src.selection.splits import SplitPlan, kfold_splits, monte_carlo_splits

logger = logging.getLogger(__name__)


@dataclass
class SplitRecord:
    split: int
    n_construction: int
    n_validation: int
    status: str = "ok"  # ok | diverged | failed_fits
    n_failed: int = 0   # grid positions or candidates without a finite loss
    message: str = ""


@dataclass
class SelectionReport:
    method: SelectionMethod
    selected_position: int
    selected_lambda: Optional[float]
    selected_active: ActiveSet
    refit: Optional[RestrictedFit]
    curve: CvCurve
    split_log: list[SplitRecord]
    path: SolutionPath
    selected_path_position: int
    n_c: int
    r: int
    candidates: tuple[ActiveSet, ...] = field(default_factory=tuple)

    @property
    def penalized_coef(self) -> np.ndarray:
        return self.path.beta(self.selected_path_position)

    @property
    def penalized_intercept(self) -> float:
        return self.path.intercept(self.selected_path_position)

    @property
    def uses_refit(self) -> bool:
        return self.refit is not None and self.refit.converged

    @property
    def coef(self) -> np.ndarray:
        """Refit coefficients when the refit converged, else the penalized ones."""
        return self.refit.full_coef if self.uses_refit else self.penalized_coef

    @property
    def intercept(self) -> float:
        return self.refit.intercept if self.uses_refit else self.penalized_intercept

    @property
    def n_failed_splits(self) -> int:
        return sum(1 for record in self.split_log if record.status != "ok")


# --- Path-based selectors ---

def _score_path(path: SolutionPath, data: Dataset, rows: np.ndarray, n_lambda: int) -> np.ndarray:
    """Held-out loss per grid position on ``rows`` of ``data``; NaN where the path stopped."""
    losses = np.full(n_lambda, np.nan)
    if path.n_points == 0:
        return losses
    X, y = data.X[rows], data.y[rows]
    theta = np.asarray(path.coef @ X.T) + path.intercepts[:, None]
    for k in range(path.n_points):
        losses[k] = validation_loss(data.family, theta[k], y)
    return losses


def _fit_split(data, penalty, grid, plan, j, intercept, standardize):
    construction, validation = plan.construction(j), plan.validation(j)
    record = SplitRecord(split=j, n_construction=construction.size, n_validation=validation.size)
    train = data.subset(construction)
    try:
        path = fit_path(train, penalty, grid, intercept=intercept, standardize=standardize)
    except SolverDivergenceError as e:
        path = e.partial_path
        record.status = "diverged"
        record.message = str(e)
        logger.warning("split path diverged split=%d fitted=%d of=%d", j, path.n_points, grid.n_lambda)
    losses = _score_path(path, data, validation, grid.n_lambda)
    record.n_failed = int(np.sum(~np.isfinite(losses)))
    return path, losses, record


def fit_split_paths(
    data: Dataset,
    penalty: PenaltySpec,
    grid: LambdaGrid,
    plan: SplitPlan,
    threads: int = 1,
    intercept: bool = False,
    standardize: bool = True,
) -> list[tuple[SolutionPath, np.ndarray, SplitRecord]]:
    """Construction-set paths on the shared grid with their held-out losses, in split order."""
    return Parallel(n_jobs=threads, prefer="threads")(
        delayed(_fit_split)(data, penalty, grid, plan, j, intercept, standardize) for j in range(plan.r)
    )


def _refit(data: Dataset, active: ActiveSet, intercept: bool, size_cap: int | None = None) -> Optional[RestrictedFit]:
    cap = data.n - 2 if size_cap is None else size_cap
    try:
        fit = fit_restricted(data, active, size_cap=cap, intercept=intercept)
    except OversizeModelError as e:
        logger.info("refit skipped size=%d reason=%s", active.d, e)
        return None
    if not fit.converged:
        logger.info("refit did not converge size=%d reason=%s", active.d, fit.reason)
    return fit


def _path_selection(
    method: SelectionMethod,
    rule: SelectionRule,
    data: Dataset,
    penalty: PenaltySpec,
    grid: LambdaGrid,
    plan: SplitPlan,
    threads: int,
    intercept: bool,
    standardize: bool,
) -> SelectionReport:
    path = fit_path(data, penalty, grid, intercept=intercept, standardize=standardize)
    results = fit_split_paths(data, penalty, grid, plan, threads, intercept, standardize)
    losses = np.vstack([losses for _, losses, _ in results])
    curve = summarize_losses(losses, CurveAxis.LAMBDA_INDEX, lambdas=grid.values)

    eligible = curve.n_valid_splits >= 1
    if not eligible.any():
        raise SelectionError(f"{method.value}: every grid position failed on every split")
    best = sparsest_argmin(curve.mean_loss, eligible)
    position = one_se_position(curve, best) if rule == SelectionRule.ONE_SE else best

    active = path.active_sets[position]
    return SelectionReport(
        method=method,
        selected_position=position,
        selected_lambda=float(grid.values[position]),
        selected_active=active,
        refit=_refit(data, active, intercept),
        curve=curve,
        split_log=[record for _, _, record in results],
        path=path,
        selected_path_position=position,
        n_c=plan.n_c,
        r=plan.r,
    )


def kfold_cv(
    data: Dataset,
    penalty: PenaltySpec,
    grid: LambdaGrid,
    k: int = 10,
    rule: SelectionRule = SelectionRule.MIN,
    seed: int = 1,
    threads: int = 1,
    intercept: bool = False,
    standardize: bool = True,
) -> SelectionReport:
    """K-fold CV on a grid computed from the whole data; ``rule`` is min or one_se."""
    rule = SelectionRule(rule)
    plan = kfold_splits(data.n, k, seed)
    method = SelectionMethod.KFOLD_1SE if rule == SelectionRule.ONE_SE else SelectionMethod.KFOLD
    return _path_selection(method, rule, data, penalty, grid, plan, threads, intercept, standardize)


def cv_nv(
    data: Dataset,
    penalty: PenaltySpec,
    grid: LambdaGrid,
    plan: SplitPlan,
    threads: int = 1,
    intercept: bool = False,
    standardize: bool = True,
) -> SelectionReport:
    """Monte-Carlo leave-n_v-out CV over ``plan``, refit by restricted MLE."""
    return _path_selection(SelectionMethod.CV_NV, SelectionRule.MIN, data, penalty, grid, plan,
                           threads, intercept, standardize)


# --- CCV ---

def _score_candidates(data, candidates, plan, j, size_cap, intercept):
    construction, validation = plan.construction(j), plan.validation(j)
    train = data.subset(construction)
    X_v, y_v = data.X[validation], data.y[validation]
    losses = np.full(len(candidates), np.inf)
    for c, active in enumerate(candidates):
        try:
            fit = fit_restricted(train, active, size_cap=size_cap, intercept=intercept)
        except OversizeModelError as e:
            logger.debug("ccv split fit oversize split=%d candidate=%d reason=%s", j, c, e)
            continue
        if not fit.converged:
            logger.debug("ccv split fit failed split=%d candidate=%d size=%d reason=%s", j, c, active.d, fit.reason)
        losses[c] = fit.validation_loss(data.family, X_v, y_v)
    n_failed = int(np.sum(~np.isfinite(losses)))
    record = SplitRecord(
        split=j,
        n_construction=construction.size,
        n_validation=validation.size,
        status="failed_fits" if n_failed else "ok",
        n_failed=n_failed,
    )
    return losses, record


def ccv_candidates(path: SolutionPath, size_cap: int) -> tuple[list[ActiveSet], list[int]]:
    """Distinct consecutive active sets of ``path`` up to the first one larger than ``size_cap``."""
    candidates, first_positions = [], []
    for active, position in active_set_sequence(path):
        if active.d > size_cap:
            logger.info("ccv candidates truncated position=%d size=%d cap=%d kept=%d",
                        position, active.d, size_cap, len(candidates))
            break
        candidates.append(active)
        first_positions.append(position)
    return candidates, first_positions


def ccv(
    data: Dataset,
    penalty: PenaltySpec,
    grid: LambdaGrid,
    plan: SplitPlan,
    size_cap: int | None = None,
    threads: int = 1,
    intercept: bool = False,
    standardize: bool = True,
) -> SelectionReport:
    """Choose among the whole-data path's active sets by split-wise restricted-MLE validation loss.

    Failed construction-set fits count as +inf and are left out of the
    average; a candidate needs finite losses on at least half the splits.
    """
    path = fit_path(data, penalty, grid, intercept=intercept, standardize=standardize)
    cap = ccv_size_cap(data.n, plan.n_c, data.p) if size_cap is None else size_cap
    candidates, first_positions = ccv_candidates(path, cap)
    if not candidates:
        raise SelectionError(f"ccv: no active set on the path fits within size cap {cap}")

    results = Parallel(n_jobs=threads, prefer="threads")(
        delayed(_score_candidates)(data, candidates, plan, j, cap, intercept) for j in range(plan.r)
    )
    losses = np.vstack([losses for losses, _ in results])
    curve = summarize_losses(
        losses,
        CurveAxis.ACTIVE_SET_INDEX,
        lambdas=grid.values[np.asarray(first_positions)],
    )
    for c in np.flatnonzero(curve.n_valid_splits < plan.r):
        logger.info("ccv candidate fits failed candidate=%d size=%d failed=%d of=%d",
                    c, candidates[c].d, plan.r - curve.n_valid_splits[c], plan.r)

    if len(candidates) == 1:
        best = 0
    else:
        needed = math.ceil(plan.r / 2)
        eligible = curve.n_valid_splits >= needed
        if not eligible.any():
            starved = ", ".join(str(c) for c in candidates)
            raise SelectionError(f"ccv: no candidate has >= {needed} finite-loss splits; starved: {starved}")
        best = sparsest_argmin(curve.mean_loss, eligible, sizes=np.array([c.d for c in candidates]))

    chosen = candidates[best]
    path_position = first_positions[best]
    return SelectionReport(
        method=SelectionMethod.CCV,
        selected_position=best,
        selected_lambda=float(grid.values[path_position]),
        selected_active=chosen,
        refit=_refit(data, chosen, intercept, size_cap=max(cap, chosen.d)),
        curve=curve,
        split_log=[record for _, record in results],
        path=path,
        selected_path_position=path_position,
        n_c=plan.n_c,
        r=plan.r,
        candidates=tuple(candidates),
    )


# --- Dispatch ---

def build_plan(data: Dataset, spec: MethodSpec, seed: int) -> SplitPlan:
    if spec.uses_kfold:
        return kfold_splits(data.n, spec.k, seed)
    n_c = spec.resolve_n_c(data.n, data.family.kind)
    y = data.y if data.family.kind == FamilyKind.BINOMIAL else None
    return monte_carlo_splits(data.n, n_c, spec.r, seed, y=y)


def select(
    data: Dataset,
    penalty: PenaltySpec,
    grid: LambdaGrid,
    spec: MethodSpec,
    seed: int,
    threads: int = 1,
    intercept: bool = False,
    size_cap: int | None = None,
) -> SelectionReport:
    """Run the selector ``spec`` names with splits drawn from ``seed``."""
    if spec.uses_kfold:
        return kfold_cv(data, penalty, grid, spec.k, spec.rule, seed, threads, intercept)
    plan = build_plan(data, spec, seed)
    if spec.method == SelectionMethod.CV_NV:
        return cv_nv(data, penalty, grid, plan, threads, intercept)
    return ccv(data, penalty, grid, plan, size_cap, threads, intercept)
