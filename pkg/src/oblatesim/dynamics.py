"""Drift and diffusion coefficients of the coupled (Omega, I, c) system.

The state evolves under a single one-dimensional driving noise: every
diffusion coefficient is a multiple of the deformation diffusion g(t, c).
The rotation equations carry the Ito correction +(Omega_i / I_i^2) m_i^2,
the secular term induced purely by the stochastic deformation.

State ordering throughout: (Omega1, Omega2, Omega3, I1, I2, I3, c).
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import EllipsoidParams
from .deformation import DeformationLaw

__all__ = [
    "SystemState",
    "SystemIncrement",
    "torque_terms",
    "deterministic_inertia_rates",
    "stochastic_inertia_coeffs",
    "stochastic_system_increment",
    "flattening_increments",
]


@dataclass(frozen=True)
class SystemState:
    """State of the coupled rotation/inertia/deformation system."""
    t: float
    Omega: np.ndarray
    I: np.ndarray
    c: float

    def __post_init__(self):
        if np.any(np.asarray(self.I) <= 0.0):
            raise ValueError("inertia coefficients must be positive")
        if self.c <= 0.0:
            raise ValueError("polar semi-axis must be positive")


@dataclass(frozen=True)
class SystemIncrement:
    """Per-unit-time drift and dB coefficients, state ordering above."""
    drift: np.ndarray
    diffusion: np.ndarray


def torque_terms(I, Omega):
    """Right-hand side of dL_i: the inertial coupling terms.

    l1 = (I1 - I3) Omega2 Omega3, l2 = -(I1 - I3) Omega1 Omega3, l3 = 0.
    """
    I = np.asarray(I, dtype=float)
    Omega = np.asarray(Omega, dtype=float)
    d13 = I[0] - I[2]
    return np.array([d13 * Omega[1] * Omega[2],
                     -d13 * Omega[0] * Omega[2],
                     0.0])


def deterministic_inertia_rates(law: DeformationLaw, params: EllipsoidParams,
                                t: float, c):
    """dI_i/dt for a purely deterministic deformation dc/dt = f(t, c).

    k1 = (M/5) (-(3V/4pi) f/c^2 + 2 c f),  k3 = (3MV/10pi) (-f/c^2),
    k2 = k3.
    """
    c = np.asarray(c, dtype=float)
    if np.any(c <= 0.0):
        raise ValueError("polar semi-axis must be positive")
    M, V = params.mass, params.volume
    f = np.asarray(law.drift(t, c), dtype=float)
    k1 = M / 5.0 * (-3.0 * V / (4.0 * math.pi) * f / c ** 2 + 2.0 * c * f)
    k3 = 3.0 * M * V / (10.0 * math.pi) * (-f / c ** 2)
    return k1, k3, k3


def stochastic_inertia_coeffs(law: DeformationLaw, params: EllipsoidParams,
                              t: float, c):
    """Ito coefficients (h1, h2, h3, m1, m2, m3) of dI_i = h_i dt + m_i dB.

    Reduces exactly to the deterministic rates when g == 0.
    """
    c = np.asarray(c, dtype=float)
    if np.any(c <= 0.0):
        raise ValueError("polar semi-axis must be positive")
    M, V = params.mass, params.volume
    f = np.asarray(law.drift(t, c), dtype=float)
    g = np.asarray(law.diffusion(t, c), dtype=float)
    q = 3.0 * V / (4.0 * math.pi)  # a^2 c, constant by volume conservation
    h1 = M / 5.0 * (-q * f / c ** 2 + g * g * (1.0 + q / c ** 3) + 2.0 * c * f)
    h3 = 3.0 * M * V / (10.0 * math.pi) * (-f / c ** 2 + g * g / c ** 3)
    m1 = M / 5.0 * g * (2.0 * c - q / c ** 2)
    m3 = -3.0 * M * V / (10.0 * math.pi) * g / c ** 2
    return h1, h3, h3, m1, m3, m3


def stochastic_system_increment(state: SystemState, law: DeformationLaw,
                                params: EllipsoidParams) -> SystemIncrement:
    """Full 7-component drift/diffusion of the stochastic rotation system.

    dOmega_i = (l_i/I_i - (Omega_i/I_i) h_i + (Omega_i/I_i^2) m_i^2) dt
               - (Omega_i/I_i) m_i dB
    dI_i     = h_i dt + m_i dB
    dc       = f dt + g dB
    """
    I = np.asarray(state.I, dtype=float)
    if np.any(I <= 0.0):
        raise ValueError("inertia must be positive; state corrupted")
    Om = np.asarray(state.Omega, dtype=float)
    h1, h2, h3, m1, m2, m3 = stochastic_inertia_coeffs(law, params, state.t, state.c)
    h = np.array([h1, h2, h3])
    m = np.array([m1, m2, m3])
    l = torque_terms(I, Om)
    f = float(law.drift(state.t, state.c))
    g = float(law.diffusion(state.t, state.c))

    om_drift = l / I - Om / I * h + Om / I ** 2 * m * m
    om_diff = -Om / I * m
    drift = np.concatenate([om_drift, h, [f]])
    diffusion = np.concatenate([om_diff, m, [g]])
    return SystemIncrement(drift=drift, diffusion=diffusion)


def flattening_increments(state: SystemState, law: DeformationLaw,
                          params: EllipsoidParams):
    """Ito coefficients of dH and dJ2, plus the pure Ito drift in J2.

    dH  = -(2pi/V) (c^2 f + c g^2) dt - (2pi/V) c^2 g dB
    dJ2 = -(2/5) dH componentwise.

    Returns (dH_drift, dH_diff, dJ2_drift, dJ2_diff, j2_ito_drift) where
    j2_ito_drift = (4pi/5V) c g^2 is the secular term induced purely by
    the noise, exposed separately for drift estimation.
    """
    V = params.volume
    c = state.c
    f = float(law.drift(state.t, c))
    g = float(law.diffusion(state.t, c))
    pref = 2.0 * math.pi / V
    dH_drift = -pref * (c * c * f + c * g * g)
    dH_diff = -pref * c * c * g
    dJ2_drift = -0.4 * dH_drift
    dJ2_diff = -0.4 * dH_diff
    j2_ito_drift = 4.0 * math.pi / (5.0 * V) * c * g * g
    return dH_drift, dH_diff, dJ2_drift, dJ2_diff, j2_ito_drift
