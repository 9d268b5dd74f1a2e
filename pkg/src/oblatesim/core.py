"""Geometry and inertia of a homogeneous ellipsoid of revolution.

Axes (a, a, c) with mass and volume conserved: the equatorial axis is
slaved to the polar axis c through a^2 = 3V/(4*pi*c), so the whole shape
is described by c alone.  The three flattening measures (geometric,
dynamical, second zonal harmonic) are derived quantities.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "EllipsoidParams",
    "EllipsoidState",
    "FlatteningObservables",
    "a_squared_from_c",
    "volume_from_axes",
    "inertia_from_axes",
    "observables",
    "dynamical_flattening_closed_form",
    "zonal_harmonic_closed_form",
    "initial_state",
]


@dataclass(frozen=True)
class EllipsoidParams:
    """Conserved bulk quantities and deformation bounds.

    The volume is never set independently: it is derived from the initial
    axes (a0, c0), since mass and volume conservation make the geometric
    formula the source of truth.
    """
    mass: float
    c0: float
    d_min: float
    d_max: float
    a0: float = 1.0

    def __post_init__(self):
        if self.mass <= 0.0:
            raise ValueError(f"mass must be positive, got {self.mass}")
        if self.c0 <= 0.0 or self.a0 <= 0.0:
            raise ValueError("initial semi-axes must be positive")
        if not (self.d_min < 0.0 < self.d_max):
            raise ValueError(
                f"need d_min < 0 < d_max, got d_min={self.d_min}, d_max={self.d_max}"
            )
        if self.c0 + self.d_min <= 0.0:
            raise ValueError("lower deformation bound c0 + d_min must stay positive")

    @property
    def volume(self) -> float:
        """V = (4/3) π a0² c0, conserved throughout any deformation."""
        return 4.0 / 3.0 * math.pi * self.a0 * self.a0 * self.c0

    @property
    def bounds(self) -> tuple[float, float]:
        return (self.c0 + self.d_min, self.c0 + self.d_max)


@dataclass(frozen=True)
class EllipsoidState:
    """Snapshot of the ellipsoid at one instant.

    I2 == I1 by rotational symmetry; a_sq is redundant with c through
    volume conservation and is carried for convenience.
    """
    t: float
    c: float
    a_sq: float
    I1: float
    I2: float
    I3: float
    L: np.ndarray
    Omega: np.ndarray

    def __post_init__(self):
        if self.c <= 0.0 or self.a_sq <= 0.0:
            raise ValueError("semi-axes must be positive")
        if self.I1 <= 0.0 or self.I3 <= 0.0:
            raise ValueError("inertia coefficients must be positive")


@dataclass(frozen=True)
class FlatteningObservables:
    """The three flattening measures of an oblate spheroid.

    j2 follows the convention J2 = (I1 - I3)/(M a^2), negative for an
    oblate body; `j2_geophysical` flips the sign for comparison with
    observational series.
    """
    f_geo: float
    H: float
    J2: float

    @property
    def j2_geophysical(self) -> float:
        return -self.J2


def a_squared_from_c(c, volume):
    """Equatorial semi-axis squared from the polar one: a² = 3V/(4πc)."""
    c = np.asarray(c, dtype=float)
    if np.any(c <= 0.0):
        raise ValueError("polar semi-axis must be positive")
    if volume <= 0.0:
        raise ValueError("volume must be positive")
    out = 3.0 * volume / (4.0 * math.pi * c)
    return float(out) if out.ndim == 0 else out


def volume_from_axes(a_sq, c):
    """V = (4/3) π a² c."""
    return 4.0 / 3.0 * math.pi * np.asarray(a_sq, dtype=float) * c


def inertia_from_axes(a_sq, c, mass):
    """Principal moments (I1, I3) of the homogeneous spheroid.

    I1 = I2 = M(a² + c²)/5 and I3 = 2Ma²/5.
    """
    a_sq = np.asarray(a_sq, dtype=float)
    c = np.asarray(c, dtype=float)
    if np.any(a_sq <= 0.0) or np.any(c <= 0.0) or mass <= 0.0:
        raise ValueError("axes and mass must be positive")
    I1 = mass / 5.0 * (a_sq + c * c)
    I3 = 2.0 * mass / 5.0 * a_sq
    if I1.ndim == 0:
        return float(I1), float(I3)
    return I1, I3


def dynamical_flattening_closed_form(c, volume):
    """H(c) = 1/2 - (2π/3V) c³, valid under mass and volume conservation."""
    c = np.asarray(c, dtype=float)
    return 0.5 - 2.0 * math.pi / (3.0 * volume) * c ** 3


def zonal_harmonic_closed_form(c, volume):
    """J2(c) = -1/5 + (4π/15V) c³, valid under mass and volume conservation."""
    c = np.asarray(c, dtype=float)
    return -0.2 + 4.0 * math.pi / (15.0 * volume) * c ** 3


def observables(state: EllipsoidState, params: EllipsoidParams) -> FlatteningObservables:
    """Flattening measures computed from the defining formulas."""
    a = math.sqrt(state.a_sq)
    f_geo = (a - state.c) / a
    H = (state.I3 - state.I1) / state.I3
    J2 = (state.I1 - state.I3) / (params.mass * state.a_sq)
    return FlatteningObservables(f_geo=f_geo, H=H, J2=J2)


def initial_state(params: EllipsoidParams, Omega0) -> EllipsoidState:
    """State at t = 0 from the parameters and an initial rotation vector."""
    Omega0 = np.asarray(Omega0, dtype=float).reshape(3)
    a_sq = a_squared_from_c(params.c0, params.volume)
    I1, I3 = inertia_from_axes(a_sq, params.c0, params.mass)
    I = np.array([I1, I1, I3])
    return EllipsoidState(
        t=0.0, c=params.c0, a_sq=a_sq, I1=I1, I2=I1, I3=I3,
        L=I * Omega0, Omega=Omega0,
    )
