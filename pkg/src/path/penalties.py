"""Separable penalties rho(|beta_j|; lambda, gamma): lasso, SCAD and MCP.

SCAD follows Fan and Li (2001), MCP follows Zhang (2010):

    SCAD  rho'(t) = lam * [1{t <= lam} + (gamma*lam - t)_+ / ((gamma - 1) * lam) * 1{t > lam}]
    MCP   rho'(t) = (lam - t / gamma)_+
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from src.data.models import PenaltyKind
from src.errors import ArgumentError

# Integer codes understood by the jit-compiled solver kernel.
KIND_CODES = {PenaltyKind.LASSO: 0, PenaltyKind.SCAD: 1, PenaltyKind.MCP: 2}


@dataclass(frozen=True)
class PenaltySpec:
    kind: PenaltyKind = PenaltyKind.LASSO
    gamma: float | None = None

    def __post_init__(self):
        kind = PenaltyKind(self.kind)
        object.__setattr__(self, "kind", kind)
        if kind != PenaltyKind.LASSO and self.gamma is None:
            object.__setattr__(self, "gamma", 3.0)
        if kind == PenaltyKind.LASSO:
            object.__setattr__(self, "gamma", math.inf)
        elif kind == PenaltyKind.SCAD and not self.gamma > 2.0:
            raise ArgumentError(f"scad requires gamma > 2, got {self.gamma}")
        elif kind == PenaltyKind.MCP and not self.gamma > 1.0:
            raise ArgumentError(f"mcp requires gamma > 1, got {self.gamma}")

    @classmethod
    def lasso(cls) -> "PenaltySpec":
        return cls(PenaltyKind.LASSO)

    @classmethod
    def scad(cls, gamma: float = 3.0) -> "PenaltySpec":
        return cls(PenaltyKind.SCAD, gamma)

    @classmethod
    def mcp(cls, gamma: float = 3.0) -> "PenaltySpec":
        return cls(PenaltyKind.MCP, gamma)

    @classmethod
    def build(cls, kind: PenaltyKind | str, gamma: float | None = None) -> "PenaltySpec":
        kind = PenaltyKind(kind)
        if kind == PenaltyKind.LASSO:
            return cls.lasso()
        return cls(kind, 3.0 if gamma is None else gamma)

    @property
    def code(self) -> int:
        return KIND_CODES[self.kind]

    @property
    def kernel_gamma(self) -> float:
        # the kernel ignores gamma for lasso; a finite placeholder keeps it float-typed
        return 0.0 if self.kind == PenaltyKind.LASSO else float(self.gamma)

    def __str__(self) -> str:
        if self.kind == PenaltyKind.LASSO:
            return "lasso"
        return f"{self.kind.value}(gamma={self.gamma:g})"


def penalty_value(beta: np.ndarray, lam: float, spec: PenaltySpec) -> np.ndarray:
    """Elementwise rho(|beta_j|; lam, gamma)."""
    t = np.abs(np.asarray(beta, dtype=float))
    if spec.kind == PenaltyKind.LASSO:
        return lam * t
    g = spec.gamma
    if spec.kind == PenaltyKind.MCP:
        return np.where(t <= g * lam, lam * t - t * t / (2.0 * g), 0.5 * g * lam * lam)
    return np.where(
        t <= lam,
        lam * t,
        np.where(
            t <= g * lam,
            (2.0 * g * lam * t - t * t - lam * lam) / (2.0 * (g - 1.0)),
            0.5 * lam * lam * (g + 1.0),
        ),
    )


def penalty_derivative(t: np.ndarray, lam: float, spec: PenaltySpec) -> np.ndarray:
    """rho'(t; lam, gamma) for t >= 0 (the right derivative at 0 is lam for all three)."""
    t = np.abs(np.asarray(t, dtype=float))
    if spec.kind == PenaltyKind.LASSO:
        return np.full_like(t, lam)
    g = spec.gamma
    if spec.kind == PenaltyKind.MCP:
        return np.maximum(lam - t / g, 0.0)
    return np.where(t <= lam, lam, np.maximum(g * lam - t, 0.0) / (g - 1.0))


def total_penalty(beta: np.ndarray, lam: float, spec: PenaltySpec) -> float:
    return float(np.sum(penalty_value(beta, lam, spec)))


def soft_threshold(z: np.ndarray, lam: float) -> np.ndarray:
    z = np.asarray(z, dtype=float)
    return np.sign(z) * np.maximum(np.abs(z) - lam, 0.0)


def firm_threshold(z: np.ndarray, lam: float, gamma: float) -> np.ndarray:
    """MCP solution of the one-dimensional problem with unit curvature."""
    z = np.asarray(z, dtype=float)
    return np.where(np.abs(z) <= gamma * lam, soft_threshold(z, lam) * gamma / (gamma - 1.0), z)
