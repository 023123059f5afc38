"""Regularization paths by cyclic coordinate descent.

Both families share one outer loop. Each outer iteration majorizes the
negative log-likelihood by a quadratic (exact for gaussian, curvature 1/4 for
binomial) and the penalized quadratic is solved by coordinate descent in a
jit-compiled kernel. For SCAD and MCP a proximal term lifts each coordinate's
curvature above the penalty's concavity, so every coordinate update is the
unique minimizer of a convex one-dimensional problem and the outer objective
never increases.

Columns are rescaled internally (see ``column_scaling``); coefficients are
returned on the original scale.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from numba import njit

from src.data.models import FamilyKind, PenaltyKind
from src.errors import ArgumentError, DegenerateGridError, SolverDivergenceError
from src.glm.dataset import ActiveSet, Dataset
from src.glm.families import GlmFamily, neg_log_lik
from src.path.penalties import PenaltySpec, penalty_derivative, total_penalty

logger = logging.getLogger(__name__)

DEFAULT_TOL = 1e-7
DEFAULT_MAX_ITER = 10_000
DEFAULT_MAX_OUTER = 100
DEFAULT_N_LAMBDA = 100
KKT_TOL = 1e-4
DIVERGENCE_TOL = 1e-8
BINOMIAL_CURVATURE = 0.25
CONVEXITY_MARGIN = 1.1


# --- Lambda grid ---

@dataclass(frozen=True, eq=False)
class LambdaGrid:
    """Strictly decreasing, log-equispaced tuning parameters starting at lambda_max."""

    values: np.ndarray
    lambda_max: float
    min_ratio: float

    def __post_init__(self):
        values = np.array(self.values, dtype=float, copy=True).ravel()
        if values.size < 2:
            raise ArgumentError("a lambda grid needs at least two values")
        if not (np.all(values > 0) and np.all(np.diff(values) < 0)):
            raise ArgumentError("lambda grid values must be positive and strictly decreasing")
        if not 0.0 < self.min_ratio < 1.0:
            raise ArgumentError(f"min_ratio must lie in (0, 1), got {self.min_ratio}")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @classmethod
    def from_bounds(cls, lambda_max: float, n_lambda: int, min_ratio: float) -> "LambdaGrid":
        if n_lambda < 2:
            raise ArgumentError(f"n_lambda must be >= 2, got {n_lambda}")
        if not 0.0 < min_ratio < 1.0:
            raise ArgumentError(f"min_ratio must lie in (0, 1), got {min_ratio}")
        if not lambda_max > 0.0:
            raise DegenerateGridError(f"lambda_max must be positive, got {lambda_max}")
        values = np.geomspace(lambda_max, lambda_max * min_ratio, n_lambda)
        return cls(values=values, lambda_max=float(lambda_max), min_ratio=float(min_ratio))

    @property
    def n_lambda(self) -> int:
        return self.values.size

    def __len__(self) -> int:
        return self.values.size


def default_min_ratio(n: int, p: int) -> float:
    return 1e-3 if n > p else 0.05


# --- Internal column scaling ---

@dataclass(frozen=True, eq=False)
class ColumnScaling:
    center: np.ndarray
    scale: np.ndarray

    def transform(self, X: np.ndarray) -> np.ndarray:
        return np.asfortranarray((X - self.center) / self.scale)

    def to_original(self, b: np.ndarray, b0: float) -> tuple[np.ndarray, float]:
        beta = b / self.scale
        return beta, float(b0 - self.center @ beta)

    def to_internal(self, beta: np.ndarray, intercept: float) -> tuple[np.ndarray, float]:
        return beta * self.scale, float(intercept + self.center @ beta)


def column_scaling(X: np.ndarray, fit_intercept: bool, standardize: bool = True) -> ColumnScaling:
    """Centering only with an intercept; unit root-mean-square columns when standardizing."""
    p = X.shape[1]
    center = X.mean(axis=0) if fit_intercept else np.zeros(p)
    if standardize:
        scale = np.sqrt(np.mean((X - center) ** 2, axis=0))
        scale[scale == 0.0] = 1.0
    else:
        scale = np.ones(p)
    return ColumnScaling(center=center, scale=scale)


def _null_mean(family: GlmFamily, y: np.ndarray, fit_intercept: bool) -> float:
    return float(np.mean(y)) if fit_intercept else family.null_mean()


def lambda_grid(
    data: Dataset,
    n_lambda: int = DEFAULT_N_LAMBDA,
    min_ratio: float | None = None,
    intercept: bool = False,
    standardize: bool = True,
) -> LambdaGrid:
    """Grid from lambda_max = max_j |x_j'(y - b'(0))| / n down to lambda_max * min_ratio."""
    if min_ratio is None:
        min_ratio = default_min_ratio(data.n, data.p)
    scaling = column_scaling(data.X, intercept, standardize)
    Xs = scaling.transform(data.X)
    residual = data.y - _null_mean(data.family, data.y, intercept)
    lambda_max = float(np.max(np.abs(Xs.T @ residual)) / data.n)
    if not lambda_max > 1e-14:
        raise DegenerateGridError(
            "lambda_max is 0: the response is uncorrelated with every column at the null fit"
        )
    return LambdaGrid.from_bounds(lambda_max, n_lambda, min_ratio)


# --- Jit kernel ---

@njit(cache=True, nogil=True)
def _rho(t, lam, kind, gamma):
    if kind == 0:
        return lam * t
    if kind == 2:
        if t <= gamma * lam:
            return lam * t - t * t / (2.0 * gamma)
        return 0.5 * gamma * lam * lam
    if t <= lam:
        return lam * t
    if t <= gamma * lam:
        return (2.0 * gamma * lam * t - t * t - lam * lam) / (2.0 * (gamma - 1.0))
    return 0.5 * lam * lam * (gamma + 1.0)


@njit(cache=True, nogil=True)
def _better(c, a, v, lam, kind, gamma, best_t, best_f):
    f = 0.5 * v * c * c - a * c + _rho(c, lam, kind, gamma)
    if f < best_f:
        return c, f
    return best_t, best_f


@njit(cache=True, nogil=True)
def _coordinate_minimizer(z, v, lam, kind, gamma):
    """argmin over b of (v/2) b^2 - z b + rho(|b|), by comparing the region candidates."""
    a = abs(z)
    if kind == 0:
        t = max(a - lam, 0.0) / v
    else:
        gl = gamma * lam
        t = 0.0
        f = 0.0
        if kind == 2:
            denom = v - 1.0 / gamma
            if denom > 0.0:
                c = (a - lam) / denom
                if 0.0 < c <= gl:
                    t, f = _better(c, a, v, lam, kind, gamma, t, f)
            t, f = _better(gl, a, v, lam, kind, gamma, t, f)
        else:
            c = (a - lam) / v
            if 0.0 < c <= lam:
                t, f = _better(c, a, v, lam, kind, gamma, t, f)
            t, f = _better(lam, a, v, lam, kind, gamma, t, f)
            denom = v - 1.0 / (gamma - 1.0)
            if denom > 0.0:
                c = (a - gl / (gamma - 1.0)) / denom
                if lam < c <= gl:
                    t, f = _better(c, a, v, lam, kind, gamma, t, f)
            t, f = _better(gl, a, v, lam, kind, gamma, t, f)
        c = a / v
        if c > gl:
            t, f = _better(c, a, v, lam, kind, gamma, t, f)
    if z < 0.0:
        return -t
    return t


@njit(cache=True, nogil=True)
def _sweep(X, r, beta, anchor, v0, prox, weight, lam, kind, gamma, active, full):
    n, p = X.shape
    max_change = 0.0
    for j in range(p):
        if not full and not active[j]:
            continue
        if v0[j] <= 0.0:
            continue
        xr = 0.0
        for i in range(n):
            xr += X[i, j] * r[i]
        z = weight * xr / n + v0[j] * beta[j] + prox[j] * anchor[j]
        b = _coordinate_minimizer(z, v0[j] + prox[j], lam, kind, gamma)
        delta = b - beta[j]
        if delta != 0.0:
            for i in range(n):
                r[i] -= delta * X[i, j]
            beta[j] = b
            if b != 0.0:
                active[j] = True
            if abs(delta) > max_change:
                max_change = abs(delta)
    return max_change


@njit(cache=True, nogil=True)
def _shift_intercept(r, intercept):
    delta = 0.0
    for i in range(r.size):
        delta += r[i]
    delta /= r.size
    for i in range(r.size):
        r[i] -= delta
    return intercept + delta, abs(delta)


@njit(cache=True, nogil=True)
def _cd_solve(X, r, beta, anchor, intercept, v0, prox, weight, lam, kind, gamma,
              fit_intercept, tol, max_iter):
    """Minimize (weight/2n)||r||^2 + sum prox_j/2 (b_j - anchor_j)^2 + sum rho(|b_j|).

    r = z - X beta - intercept is updated in place together with beta. Full
    sweeps alternate with sweeps over the active set until a full sweep moves
    no coefficient by more than tol.
    """
    p = beta.size
    active = np.zeros(p, dtype=np.bool_)
    for j in range(p):
        active[j] = beta[j] != 0.0
    sweeps = 0
    converged = False
    while sweeps < max_iter:
        change = _sweep(X, r, beta, anchor, v0, prox, weight, lam, kind, gamma, active, True)
        if fit_intercept:
            intercept, shift = _shift_intercept(r, intercept)
            change = max(change, shift)
        sweeps += 1
        if change < tol:
            converged = True
            break
        while sweeps < max_iter:
            change = _sweep(X, r, beta, anchor, v0, prox, weight, lam, kind, gamma, active, False)
            if fit_intercept:
                intercept, shift = _shift_intercept(r, intercept)
                change = max(change, shift)
            sweeps += 1
            if change < tol:
                break
    return intercept, sweeps, converged


# --- Solver ---

@dataclass
class PointFit:
    beta: np.ndarray          # internal scale
    intercept: float          # internal scale
    objective: float
    n_iter: int
    converged: bool


class CoordinateDescentSolver:
    """Holds the rescaled design for one dataset and solves single grid points."""

    def __init__(
        self,
        data: Dataset,
        penalty: PenaltySpec,
        intercept: bool = False,
        standardize: bool = True,
        tol: float = DEFAULT_TOL,
        max_iter: int = DEFAULT_MAX_ITER,
        max_outer: int = DEFAULT_MAX_OUTER,
    ):
        if not tol > 0.0:
            raise ArgumentError(f"tol must be positive, got {tol}")
        if max_iter < 1 or max_outer < 1:
            raise ArgumentError("max_iter and max_outer must be >= 1")
        self.data = data
        self.penalty = penalty
        self.fit_intercept = intercept
        self.tol = tol
        self.max_iter = max_iter
        self.max_outer = max_outer
        self.scaling = column_scaling(data.X, intercept, standardize)
        self.X = self.scaling.transform(data.X)
        self.y = np.array(data.y, dtype=float)

        gaussian = data.family.kind == FamilyKind.GAUSSIAN
        self.weight = 1.0 if gaussian else BINOMIAL_CURVATURE
        self.v0 = self.weight * np.mean(self.X ** 2, axis=0)
        self.prox = self._proximal_lift()
        self.exact_quadratic = gaussian and not np.any(self.prox > 0.0)

    def _proximal_lift(self) -> np.ndarray:
        kind = self.penalty.kind
        if kind == PenaltyKind.LASSO:
            return np.zeros_like(self.v0)
        concavity = 1.0 / self.penalty.gamma if kind == PenaltyKind.MCP else 1.0 / (self.penalty.gamma - 1.0)
        lift = np.maximum(CONVEXITY_MARGIN * concavity - self.v0, 0.0)
        lift[self.v0 <= 0.0] = 0.0
        return lift

    def null_intercept(self) -> float:
        if not self.fit_intercept:
            return 0.0
        ybar = float(np.mean(self.y))
        if self.data.family.kind == FamilyKind.GAUSSIAN:
            return ybar
        ybar = min(max(ybar, 1e-10), 1.0 - 1e-10)
        return math.log(ybar / (1.0 - ybar))

    def objective(self, lam: float, b: np.ndarray, b0: float) -> float:
        theta = self.X @ b + b0
        return neg_log_lik(self.data.family, theta, self.y) + total_penalty(b, lam, self.penalty)

    def solve(self, lam: float, b: np.ndarray | None = None, b0: float | None = None,
              position: int = -1) -> PointFit:
        b = np.zeros(self.X.shape[1]) if b is None else np.array(b, dtype=float)
        b0 = self.null_intercept() if b0 is None else float(b0)
        family = self.data.family
        kind, gamma = self.penalty.code, self.penalty.kernel_gamma

        previous = self.objective(lam, b, b0)
        total_sweeps = 0
        converged = False
        for _ in range(self.max_outer):
            theta = self.X @ b + b0
            if family.kind == FamilyKind.GAUSSIAN:
                r = self.y - theta
            else:
                r = (self.y - family.mean(theta)) / self.weight
            anchor = b.copy()
            anchor0 = b0
            b0, sweeps, inner_ok = _cd_solve(
                self.X, r, b, anchor, b0, self.v0, self.prox, self.weight,
                lam, kind, gamma, self.fit_intercept, self.tol, self.max_iter,
            )
            total_sweeps += sweeps
            current = self.objective(lam, b, b0)
            if current > previous + DIVERGENCE_TOL * max(1.0, abs(previous)):
                raise SolverDivergenceError(
                    f"objective rose from {previous:.12g} to {current:.12g} at lambda={lam:.6g}",
                    position=position,
                )
            previous = current
            step = max(float(np.max(np.abs(b - anchor), initial=0.0)), abs(b0 - anchor0))
            if self.exact_quadratic:
                converged = inner_ok
                break
            if inner_ok and step < self.tol:
                converged = True
                break
        return PointFit(beta=b, intercept=b0, objective=previous, n_iter=total_sweeps, converged=converged)


# --- Solution path ---

@dataclass(frozen=True, eq=False)
class SolutionPath:
    """Coefficients along a grid, stored sparsely on the original scale.

    ``coef`` may hold fewer rows than the grid when a fit stopped early;
    positions beyond ``n_points`` were never fitted.
    """

    grid: LambdaGrid
    coef: sp.csr_matrix
    intercepts: np.ndarray
    active_sets: tuple[ActiveSet, ...]
    n_iter: np.ndarray
    converged: np.ndarray
    objective: np.ndarray
    penalty: PenaltySpec
    family: GlmFamily
    has_intercept: bool = False
    standardize: bool = True

    @property
    def n_points(self) -> int:
        return self.coef.shape[0]

    @property
    def p(self) -> int:
        return self.coef.shape[1]

    @property
    def lambdas(self) -> np.ndarray:
        return self.grid.values[: self.n_points]

    @property
    def complete(self) -> bool:
        return self.n_points == self.grid.n_lambda

    def beta(self, position: int) -> np.ndarray:
        return self.coef.getrow(position).toarray().ravel()

    def intercept(self, position: int) -> float:
        return float(self.intercepts[position])

    def df(self) -> np.ndarray:
        return np.array([a.d for a in self.active_sets], dtype=int)

    @classmethod
    def from_coefficients(
        cls,
        grid: LambdaGrid,
        rows: list[np.ndarray],
        p: int,
        penalty: PenaltySpec,
        family: GlmFamily,
        intercepts=None,
        n_iter=None,
        converged=None,
        objective=None,
        has_intercept: bool = False,
        standardize: bool = True,
    ) -> "SolutionPath":
        """Build a path from dense per-position coefficient vectors on the original scale."""
        m = len(rows)
        if m > grid.n_lambda:
            raise ArgumentError(f"{m} coefficient rows for a grid of {grid.n_lambda}")
        indptr = [0]
        indices: list[int] = []
        values: list[float] = []
        active_sets = []
        for beta in rows:
            beta = np.asarray(beta, dtype=float).ravel()
            if beta.size != p:
                raise ArgumentError(f"coefficient row of length {beta.size}, expected p={p}")
            nz = np.flatnonzero(beta)
            indices.extend(nz.tolist())
            values.extend(beta[nz].tolist())
            indptr.append(len(indices))
            active_sets.append(ActiveSet(tuple(nz.tolist())))
        coef = sp.csr_matrix(
            (np.asarray(values, dtype=float), np.asarray(indices, dtype=np.int64), np.asarray(indptr, dtype=np.int64)),
            shape=(m, p),
        )
        return cls(
            grid=grid,
            coef=coef,
            intercepts=np.zeros(m) if intercepts is None else np.asarray(intercepts, dtype=float),
            active_sets=tuple(active_sets),
            n_iter=np.zeros(m, dtype=int) if n_iter is None else np.asarray(n_iter, dtype=int),
            converged=np.ones(m, dtype=bool) if converged is None else np.asarray(converged, dtype=bool),
            objective=np.full(m, np.nan) if objective is None else np.asarray(objective, dtype=float),
            penalty=penalty,
            family=family,
            has_intercept=has_intercept,
            standardize=standardize,
        )


def fit_path(
    data: Dataset,
    penalty: PenaltySpec,
    grid: LambdaGrid,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
    max_outer: int = DEFAULT_MAX_OUTER,
    intercept: bool = False,
    standardize: bool = True,
) -> SolutionPath:
    """Warm-started coordinate descent along ``grid``.

    Points that hit max_iter are flagged converged=False. An objective
    increase raises SolverDivergenceError carrying the fitted prefix.
    """
    solver = CoordinateDescentSolver(data, penalty, intercept, standardize, tol, max_iter, max_outer)
    rows, intercepts, n_iter, converged, objective = [], [], [], [], []

    def assemble() -> SolutionPath:
        return SolutionPath.from_coefficients(
            grid, rows, data.p, penalty, data.family,
            intercepts=intercepts, n_iter=n_iter, converged=converged, objective=objective,
            has_intercept=intercept, standardize=standardize,
        )

    b = np.zeros(data.p)
    b0 = solver.null_intercept()
    for position, lam in enumerate(grid.values):
        try:
            point = solver.solve(float(lam), b, b0, position=position)
        except SolverDivergenceError as e:
            e.partial_path = assemble()
            raise
        b, b0 = point.beta, point.intercept
        beta, b0_original = solver.scaling.to_original(b, b0)
        rows.append(beta)
        intercepts.append(b0_original if intercept else 0.0)
        n_iter.append(point.n_iter)
        converged.append(point.converged)
        objective.append(point.objective)
        if not point.converged:
            logger.debug("path point not converged position=%d lambda=%.6g sweeps=%d", position, lam, point.n_iter)

    n_bad = len(converged) - int(np.sum(converged))
    if n_bad:
        logger.info("path fit finished with non-converged points count=%d of=%d", n_bad, len(converged))
    return assemble()


def solve_at(
    data: Dataset,
    penalty: PenaltySpec,
    lam: float,
    beta_init: np.ndarray | None = None,
    intercept: bool = False,
    standardize: bool = True,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
    max_outer: int = DEFAULT_MAX_OUTER,
) -> tuple[np.ndarray, float, float, bool]:
    """Fit one lambda from ``beta_init`` (zero by default).

    Returns (beta, intercept, objective, converged); beta and intercept are on
    the original scale, the objective on the internal scale used by fit_path.
    """
    solver = CoordinateDescentSolver(data, penalty, intercept, standardize, tol, max_iter, max_outer)
    b = None
    if beta_init is not None:
        b, _ = solver.scaling.to_internal(np.asarray(beta_init, dtype=float), 0.0)
    point = solver.solve(float(lam), b)
    beta, b0 = solver.scaling.to_original(point.beta, point.intercept)
    return beta, (b0 if intercept else 0.0), point.objective, point.converged


def kkt_residual(
    data: Dataset,
    penalty: PenaltySpec,
    lam: float,
    beta: np.ndarray,
    intercept: float | None = None,
    standardize: bool = True,
) -> float:
    """Largest violation of the stationarity conditions at ``beta``.

    With g_j = x_j'(y - b'(X beta))/n on the internal scale:
      beta_j != 0  ->  |g_j - rho'(|beta_j|) sgn(beta_j)|
      beta_j == 0  ->  max(|g_j| - lam, 0)
    ``intercept`` is None for intercept-free fits.
    """
    beta = np.asarray(beta, dtype=float).ravel()
    if beta.size != data.p:
        raise ArgumentError(f"beta has length {beta.size} but p={data.p}")
    fit_intercept = intercept is not None
    scaling = column_scaling(data.X, fit_intercept, standardize)
    b = beta * scaling.scale
    theta = data.X @ beta + (intercept or 0.0)
    resid = data.y - data.family.mean(theta)
    g = scaling.transform(data.X).T @ resid / data.n

    active = b != 0.0
    violation = np.maximum(np.abs(g) - lam, 0.0)
    if np.any(active):
        slope = penalty_derivative(np.abs(b[active]), lam, penalty)
        violation[active] = np.abs(g[active] - slope * np.sign(b[active]))
    return float(np.max(violation, initial=0.0))


def path_kkt_residuals(data: Dataset, path: SolutionPath) -> np.ndarray:
    return np.array([
        kkt_residual(
            data, path.penalty, float(lam), path.beta(k),
            intercept=path.intercept(k) if path.has_intercept else None,
            standardize=path.standardize,
        )
        for k, lam in enumerate(path.lambdas)
    ])


def active_set_sequence(path: SolutionPath) -> list[tuple[ActiveSet, int]]:
    """Collapse consecutive repeats; a set that re-enters later is a new entry."""
    if path.n_points == 0:
        raise ArgumentError("active_set_sequence needs a nonempty path")
    sequence: list[tuple[ActiveSet, int]] = []
    for position, active in enumerate(path.active_sets):
        if not sequence or sequence[-1][0] != active:
            sequence.append((active, position))
    return sequence
