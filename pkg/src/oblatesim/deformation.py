"""Deformation laws for the polar semi-axis and admissibility checks.

A law is a scalar SDE dc = drift(t, c) dt + diffusion(t, c) dB restricted
to the interval [c0 + d_min, c0 + d_max].  The interval is invariant iff
the drift points inward (or vanishes) at both endpoints and the diffusion
vanishes there exactly.  The ad-hoc "toy" law uses factored polynomials

    drift(t, x)    = alpha * cos(gamma t) * (x - lo) * (hi - x)
    diffusion(t, x) = beta * (x - lo) * (hi - x)

whose boundary roots make admissibility hold structurally, bitwise in
floating point.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

__all__ = [
    "DeformationLaw",
    "ToyModelParams",
    "AdmissibilityReport",
    "toy_drift",
    "toy_diffusion",
    "toy_law",
    "zero_law",
    "check_deterministic_admissible",
    "check_stochastic_admissible",
]


@dataclass(frozen=True)
class ToyModelParams:
    """Coefficients of the factored-polynomial deformation law."""
    alpha: float
    beta: float
    gamma: float
    c0: float
    d_min: float
    d_max: float

    def __post_init__(self):
        if self.alpha < 0.0 or self.beta < 0.0:
            raise ValueError("alpha and beta must be non-negative")
        if not (self.d_min < 0.0 < self.d_max):
            raise ValueError("need d_min < 0 < d_max")
        if self.c0 + self.d_min <= 0.0:
            raise ValueError("lower bound c0 + d_min must stay positive")

    @property
    def bounds(self) -> tuple[float, float]:
        return (self.c0 + self.d_min, self.c0 + self.d_max)


@dataclass(frozen=True)
class DeformationLaw:
    """Drift/diffusion pair with its invariance interval.

    `structurally_admissible` marks laws built in factored form whose
    diffusion has exact boundary roots; grid checks are then a smoke test
    while the structure is the actual guarantee.
    """
    drift: Callable[[float, np.ndarray], np.ndarray]
    diffusion: Callable[[float, np.ndarray], np.ndarray]
    bounds: tuple[float, float]
    structurally_admissible: bool = False
    # Set for toy laws so the fast integrator kernel can be used.
    toy_params: Optional[ToyModelParams] = None

    def __post_init__(self):
        lo, hi = self.bounds
        if not (0.0 < lo < hi):
            raise ValueError(f"need 0 < lo < hi, got bounds ({lo}, {hi})")


def toy_drift(p: ToyModelParams, t, x):
    """alpha * cos(gamma t) * (x - lo) * (hi - x); zero at both bounds."""
    lo, hi = p.bounds
    return p.alpha * np.cos(p.gamma * t) * (x - lo) * (hi - x)


def toy_diffusion(p: ToyModelParams, x):
    """beta * (x - lo) * (hi - x); zero at both bounds."""
    lo, hi = p.bounds
    return p.beta * (x - lo) * (hi - x)


def toy_law(p: ToyModelParams) -> DeformationLaw:
    """Deformation law for the toy model (deterministic when beta == 0)."""
    return DeformationLaw(
        drift=lambda t, x: toy_drift(p, t, x),
        diffusion=lambda t, x: toy_diffusion(p, x),
        bounds=p.bounds,
        structurally_admissible=True,
        toy_params=p,
    )


def zero_law(bounds: tuple[float, float]) -> DeformationLaw:
    """Rigid body: no deformation at all."""
    p = ToyModelParams(alpha=0.0, beta=0.0, gamma=0.0,
                       c0=0.5 * (bounds[0] + bounds[1]),
                       d_min=bounds[0] - 0.5 * (bounds[0] + bounds[1]),
                       d_max=bounds[1] - 0.5 * (bounds[0] + bounds[1]))
    return DeformationLaw(
        drift=lambda t, x: np.zeros_like(np.asarray(x, dtype=float)),
        diffusion=lambda t, x: np.zeros_like(np.asarray(x, dtype=float)),
        bounds=bounds,
        structurally_admissible=True,
        toy_params=p,
    )


@dataclass
class AdmissibilityReport:
    """Outcome of the boundary sign/vanishing checks on a time grid."""
    admissible: bool
    stochastic: bool
    structural: bool
    violations: list = field(default_factory=list)

    def __str__(self) -> str:
        kind = "stochastic" if self.stochastic else "deterministic"
        if self.admissible:
            extra = " (structurally guaranteed)" if self.structural else ""
            return f"admissible ({kind} criteria){extra}"
        lines = [f"NOT admissible ({kind} criteria); violations:"]
        for t, boundary, which, value in self.violations[:20]:
            lines.append(f"  t={t:g} {which} at {boundary} bound: {value:.6g}")
        if len(self.violations) > 20:
            lines.append(f"  ... {len(self.violations) - 20} more")
        return "\n".join(lines)


def _drift_violations(law: DeformationLaw, t_grid: Sequence[float]) -> list:
    lo, hi = law.bounds
    out = []
    for t in t_grid:
        f_lo = float(law.drift(float(t), lo))
        f_hi = float(law.drift(float(t), hi))
        if f_lo < 0.0:
            out.append((float(t), "lower", "drift", f_lo))
        if f_hi > 0.0:
            out.append((float(t), "upper", "drift", f_hi))
    return out


def check_deterministic_admissible(law: DeformationLaw,
                                   t_grid: Sequence[float]) -> AdmissibilityReport:
    """Check drift(t, lo) >= 0 and drift(t, hi) <= 0 on the grid.

    The invariance theorem quantifies over all t >= 0; a finite grid is a
    smoke test unless the law is structurally admissible.
    """
    if len(t_grid) == 0:
        raise ValueError("t_grid must be non-empty")
    if any(t < 0.0 for t in t_grid):
        raise ValueError("t_grid times must be non-negative")
    violations = _drift_violations(law, t_grid)
    return AdmissibilityReport(
        admissible=not violations,
        stochastic=False,
        structural=law.structurally_admissible,
        violations=violations,
    )


def check_stochastic_admissible(law: DeformationLaw,
                                t_grid: Sequence[float]) -> AdmissibilityReport:
    """Deterministic checks plus diffusion(t, lo) == diffusion(t, hi) == 0.

    The boundary equality is required exactly (tolerance 0): the
    invariance theorem demands a vanishing diffusion at the endpoints, and
    factored-form laws satisfy it bitwise.
    """
    if len(t_grid) == 0:
        raise ValueError("t_grid must be non-empty")
    if any(t < 0.0 for t in t_grid):
        raise ValueError("t_grid times must be non-negative")
    lo, hi = law.bounds
    violations = _drift_violations(law, t_grid)
    for t in t_grid:
        g_lo = float(law.diffusion(float(t), lo))
        g_hi = float(law.diffusion(float(t), hi))
        if g_lo != 0.0:
            violations.append((float(t), "lower", "diffusion", g_lo))
        if g_hi != 0.0:
            violations.append((float(t), "upper", "diffusion", g_hi))
    violations.sort(key=lambda v: (v[0], v[1]))
    return AdmissibilityReport(
        admissible=not violations,
        stochastic=True,
        structural=law.structurally_admissible,
        violations=violations,
    )
