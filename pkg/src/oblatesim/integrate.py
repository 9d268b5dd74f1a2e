"""Seeded Brownian increments, Euler/Euler-Maruyama steppers and the
invariance-preserving path runner.

Generator contract
------------------
Every path owns an independent counter-based stream:
``numpy.random.Philox(SeedSequence([seed, path_index]))``.  One standard
normal is consumed per base step in step order, scaled to variance h and
truncated at ``truncation_k * sqrt(h)``.  The stream for path p is the
same whether the path runs alone or inside an ensemble, so ensembles are
order-independent and reproducible.  Sub-steps created by the shrink-step
boundary policy draw from a secondary stream seeded per
(seed, path, step); they never consume from the main stream.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from . import _kernel
from .core import EllipsoidParams, a_squared_from_c, inertia_from_axes
from .deformation import DeformationLaw
from .dynamics import SystemState, stochastic_system_increment

__all__ = [
    "IntegratorConfig",
    "BrownianPath",
    "Trajectory",
    "euler_step",
    "euler_maruyama_step",
    "invariance_preserving_run",
    "simulate_paths",
    "StepUnderflowError",
]

REC_COLUMNS = ("c", "Omega1", "Omega2", "Omega3", "I1", "I2", "I3",
               "H_int", "J2_int", "mart", "int_c2dc", "int_cg2ds")

_BLOCK_STEPS = 16384


class StepUnderflowError(RuntimeError):
    """Shrink-step halved below h * 2^-20: the law is not admissible in practice."""


@dataclass(frozen=True)
class IntegratorConfig:
    """Time grid, seeding and boundary policy for a run."""
    h: float
    t_end: float
    seed: int
    truncation_k: float = 6.0
    boundary_policy: str = "shrink-step"
    decimate: int = 10

    def __post_init__(self):
        if self.h <= 0.0 or self.t_end <= 0.0:
            raise ValueError("h and t_end must be positive")
        if self.truncation_k < 3.0:
            raise ValueError("truncation_k must be at least 3")
        if self.boundary_policy not in ("shrink-step", "clamp-with-log"):
            raise ValueError(f"unknown boundary policy {self.boundary_policy!r}")
        if self.decimate < 1:
            raise ValueError("decimate must be a positive integer")

    @property
    def n_steps(self) -> int:
        return max(1, int(round(self.t_end / self.h)))

    @property
    def policy_code(self) -> int:
        return (_kernel.POLICY_SHRINK if self.boundary_policy == "shrink-step"
                else _kernel.POLICY_CLAMP)


class BrownianPath:
    """Reproducible stream of truncated Gaussian increments of variance h."""

    def __init__(self, seed: int, path_index: int, h: float,
                 truncation_k: float = 6.0):
        if h <= 0.0:
            raise ValueError("h must be positive")
        self.seed = int(seed)
        self.path_index = int(path_index)
        self.h = float(h)
        self.truncation_k = float(truncation_k)
        self._gen = path_generator(seed, path_index)

    def normals(self, n: int) -> np.ndarray:
        """Next n raw standard normals of the stream (untruncated)."""
        return self._gen.standard_normal(n)

    def increments(self, n: int) -> np.ndarray:
        """Next n Brownian increments: sqrt(h) * clip(Z, +-truncation_k)."""
        z = np.clip(self.normals(n), -self.truncation_k, self.truncation_k)
        return math.sqrt(self.h) * z


def path_generator(seed: int, path_index: int) -> np.random.Generator:
    """The per-path Philox generator of the documented contract."""
    return np.random.Generator(
        np.random.Philox(np.random.SeedSequence([int(seed), int(path_index)]))
    )


def euler_step(x, t, rhs, h):
    """One explicit Euler step: x + h * rhs(t, x)."""
    if h <= 0.0:
        raise ValueError("h must be positive")
    x = np.asarray(x, dtype=float)
    return x + h * np.asarray(rhs(t, x), dtype=float)


def euler_maruyama_step(x, t, drift, diffusion, h, dB):
    """One Euler-Maruyama step with a shared scalar Brownian increment."""
    if h <= 0.0:
        raise ValueError("h must be positive")
    x = np.asarray(x, dtype=float)
    return (x + h * np.asarray(drift(t, x), dtype=float)
            + dB * np.asarray(diffusion(t, x), dtype=float))


@dataclass
class Trajectory:
    """Decimated time series of an ensemble of lockstep paths.

    ``data`` has shape (n_times, n_paths, len(REC_COLUMNS)); integral
    accumulators (H_int, J2_int, martingale part, realized int c^2 dc and
    int c g^2 ds) are carried at full step resolution and sampled on the
    output grid.
    """
    t: np.ndarray
    data: np.ndarray
    oob_count: np.ndarray
    boundary_events: np.ndarray
    c_min: np.ndarray
    c_max: np.ndarray
    config: IntegratorConfig
    params: EllipsoidParams

    @property
    def n_paths(self) -> int:
        return self.data.shape[1]

    def column(self, name: str) -> np.ndarray:
        """Series (n_times, n_paths) of one recorded column."""
        return self.data[:, :, REC_COLUMNS.index(name)]

    def path(self, p: int) -> dict:
        """All recorded columns of one path, keyed by column name."""
        return {name: self.data[:, p, i] for i, name in enumerate(REC_COLUMNS)}


def _initial_record(state0: np.ndarray, n_paths: int) -> np.ndarray:
    rec = np.empty((n_paths, len(REC_COLUMNS)))
    rec[:, 0] = state0[:, 6]
    rec[:, 1:4] = state0[:, 0:3]
    rec[:, 4:7] = state0[:, 3:6]
    rec[:, 7:] = 0.0
    return rec


def _record_times(n_steps: int, rec_every: int, h: float) -> np.ndarray:
    marks = list(range(0, n_steps + 1, rec_every))
    if marks[-1] != n_steps:
        marks.append(n_steps)
    return np.array(marks, dtype=float) * h


def _initial_system(params: EllipsoidParams, Omega0) -> np.ndarray:
    Omega0 = np.asarray(Omega0, dtype=float).reshape(3)
    a_sq = a_squared_from_c(params.c0, params.volume)
    I1, I3 = inertia_from_axes(a_sq, params.c0, params.mass)
    return np.array([Omega0[0], Omega0[1], Omega0[2], I1, I1, I3, params.c0])


def simulate_paths(law: DeformationLaw, params: EllipsoidParams,
                   config: IntegratorConfig, Omega0,
                   n_paths: int = 1) -> Trajectory:
    """Integrate n_paths lockstep paths of the full 7-component system.

    Dispatches to the compiled kernel for toy-family laws and to the
    generic NumPy engine otherwise; both implement identical stepping
    semantics.
    """
    if n_paths < 1:
        raise ValueError("n_paths must be at least 1")
    if law.toy_params is not None:
        return _run_toy(law, params, config, Omega0, n_paths)
    return _run_generic(law, params, config, Omega0, n_paths)


def invariance_preserving_run(law: DeformationLaw, params: EllipsoidParams,
                              config: IntegratorConfig, Omega0) -> Trajectory:
    """Single-path run honoring the boundary policy (see simulate_paths)."""
    return simulate_paths(law, params, config, Omega0, n_paths=1)


def _run_toy(law, params, config, Omega0, n_paths):
    p = law.toy_params
    lo, hi = law.bounds
    n_steps = config.n_steps
    rec_every = config.decimate
    t_rec = _record_times(n_steps, rec_every, config.h)
    n_rec = len(t_rec)

    state = np.tile(_initial_system(params, Omega0), (n_paths, 1))
    acc = np.zeros((n_paths, _kernel.N_ACC))
    counts = np.zeros((n_paths, 2), dtype=np.int64)
    extrema = np.empty((n_paths, 2))
    extrema[:, 0] = state[:, 6]
    extrema[:, 1] = state[:, 6]
    out = np.empty((n_rec, n_paths, _kernel.N_REC))
    out[0] = _initial_record(state, n_paths)

    gens = [path_generator(config.seed, i) for i in range(n_paths)]
    step0 = 0
    while step0 < n_steps:
        bs = min(_BLOCK_STEPS, n_steps - step0)
        Z = np.empty((n_paths, bs))
        for i, g in enumerate(gens):
            Z[i] = g.standard_normal(bs)
        bad = _kernel.run_toy_block(
            state, acc, counts, extrema, Z, step0, n_steps, config.h,
            p.alpha, p.beta, p.gamma, lo, hi, params.mass, params.volume,
            config.truncation_k, config.policy_code, config.seed,
            rec_every, out)
        if bad >= 0:
            raise StepUnderflowError(
                f"sub-step underflow on path {bad} (seed {config.seed}) "
                f"near step {step0}; law not admissible in practice")
        step0 += bs

    return Trajectory(t=t_rec, data=out, oob_count=counts[:, 0].copy(),
                      boundary_events=counts[:, 1].copy(),
                      c_min=extrema[:, 0].copy(), c_max=extrema[:, 1].copy(),
                      config=config, params=params)


def _run_generic(law, params, config, Omega0, n_paths):
    """NumPy lockstep engine for arbitrary deformation laws.

    Same stepping semantics as the compiled kernel; used for laws outside
    the toy family (e.g. deliberately inadmissible ones) and as a
    cross-check of the kernel.
    """
    lo, hi = law.bounds
    M, V = params.mass, params.volume
    q = 3.0 * V / (4.0 * math.pi)
    pref = 2.0 * math.pi / V
    h = config.h
    k = config.truncation_k
    clamp = config.policy_code == _kernel.POLICY_CLAMP
    h_min = h * _kernel.MIN_STEP_FRACTION

    n_steps = config.n_steps
    rec_every = config.decimate
    t_rec = _record_times(n_steps, rec_every, h)
    n_rec = len(t_rec)

    state = np.tile(_initial_system(params, Omega0), (n_paths, 1))
    acc = np.zeros((n_paths, _kernel.N_ACC))
    oob = np.zeros(n_paths, dtype=np.int64)
    events = np.zeros(n_paths, dtype=np.int64)
    c_min = np.full(n_paths, state[0, 6])
    c_max = np.full(n_paths, state[0, 6])
    out = np.empty((n_rec, n_paths, _kernel.N_REC))
    out[0] = _initial_record(state, n_paths)

    gens = [path_generator(config.seed, i) for i in range(n_paths)]

    def substep(idx, hs, t, dB):
        """Apply one EM (sub-)step of size hs to paths `idx`."""
        w = state[idx, 0:3]
        I = state[idx, 3:6]
        c = state[idx, 6]
        f = np.asarray(law.drift(t, c), dtype=float)
        g = np.asarray(law.diffusion(t, c), dtype=float)
        c2 = c * c
        gg = g * g
        h1 = M / 5.0 * (-q * f / c2 + gg * (1.0 + q / c ** 3) + 2.0 * c * f)
        h3 = 3.0 * M * V / (10.0 * math.pi) * (-f / c2 + gg / c ** 3)
        m1 = M / 5.0 * g * (2.0 * c - q / c2)
        m3 = -3.0 * M * V / (10.0 * math.pi) * g / c2
        hh = np.stack([h1, h3, h3], axis=1)
        mm = np.stack([m1, m3, m3], axis=1)
        d13 = I[:, 0] - I[:, 2]
        l = np.stack([d13 * w[:, 1] * w[:, 2],
                      -d13 * w[:, 0] * w[:, 2],
                      np.zeros_like(d13)], axis=1)
        dBc = dB[:, None]
        dw = (l / I - w / I * hh + w / I ** 2 * mm * mm) * hs - w / I * mm * dBc
        dI = hh * hs + mm * dBc
        dc = f * hs + g * dB

        dH = -pref * (c2 * f + c * gg) * hs - pref * c2 * g * dB
        acc[idx, 0] += dH
        acc[idx, 1] += -0.4 * dH
        acc[idx, 2] += c2 * g * dB
        acc[idx, 3] += c2 * dc
        acc[idx, 4] += c * gg * hs

        state[idx, 0:3] = w + dw
        state[idx, 3:6] = I + dI
        state[idx, 6] = c + dc

    for n in range(n_steps):
        t = n * h
        z = np.empty(n_paths)
        for i, g_ in enumerate(gens):
            z[i] = g_.standard_normal()
        z = np.clip(z, -k, k)

        if clamp:
            substep(np.arange(n_paths), h, t, math.sqrt(h) * z)
        else:
            c = state[:, 6]
            f = np.abs(np.asarray(law.drift(t, c), dtype=float))
            g = np.abs(np.asarray(law.diffusion(t, c), dtype=float))
            move = f * h + k * math.sqrt(h) * g
            safe = (c - move >= lo) & (c + move <= hi)
            idx = np.nonzero(safe)[0]
            if idx.size:
                substep(idx, h, t, math.sqrt(h) * z[idx])
            for pi in np.nonzero(~safe)[0]:
                events[pi] += 1
                gen_r = np.random.Generator(np.random.Philox(
                    np.random.SeedSequence([config.seed, int(pi), n, 1])))
                remaining = h
                while remaining > 0.0:
                    ts = t + (h - remaining)
                    hs = remaining
                    ci = state[pi, 6]
                    fi = abs(float(law.drift(ts, ci)))
                    gi = abs(float(law.diffusion(ts, ci)))
                    while (ci - (fi * hs + k * math.sqrt(hs) * gi) < lo
                           or ci + (fi * hs + k * math.sqrt(hs) * gi) > hi):
                        hs *= 0.5
                        if hs < h_min:
                            raise StepUnderflowError(
                                f"sub-step underflow on path {pi} "
                                f"(seed {config.seed}) at step {n}")
                    zi = float(np.clip(gen_r.standard_normal(), -k, k))
                    substep(np.array([pi]), hs, ts, np.array([math.sqrt(hs) * zi]))
                    remaining -= hs
                    if remaining < h * 1e-12:
                        remaining = 0.0

        c = state[:, 6]
        bad = (c < lo) | (c > hi)
        oob += bad
        if clamp and bad.any():
            events += bad
            state[:, 6] = np.clip(c, lo, hi)
        np.minimum(c_min, state[:, 6], out=c_min)
        np.maximum(c_max, state[:, 6], out=c_max)

        n_done = n + 1
        rec_idx = -1
        if n_done % rec_every == 0:
            rec_idx = n_done // rec_every
        elif n_done == n_steps:
            rec_idx = n_rec - 1
        if 0 <= rec_idx < n_rec:
            out[rec_idx, :, 0] = state[:, 6]
            out[rec_idx, :, 1:4] = state[:, 0:3]
            out[rec_idx, :, 4:7] = state[:, 3:6]
            out[rec_idx, :, 7:] = acc

    return Trajectory(t=t_rec, data=out, oob_count=oob, boundary_events=events,
                      c_min=c_min, c_max=c_max, config=config, params=params)
