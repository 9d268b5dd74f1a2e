"""Compiled stepping kernel for the factored-polynomial deformation family.

The kernel advances all paths in lockstep over a block of base steps.
Gaussian increments for the base grid are pre-generated by the caller
(one standard normal per path per base step, always consumed); when the
shrink-step policy subdivides a step near a boundary, the sub-increments
come from a dedicated stream seeded per (seed, path, step) so results do
not depend on execution order.

State layout per path: [w1, w2, w3, I1, I2, I3, c].
Accumulator layout:    [H_int, J2_int, mart, int_c2dc, int_cg2ds].
Record layout:         [c, w1, w2, w3, I1, I2, I3] + accumulators.
"""
from __future__ import annotations

import numpy as np
from numba import njit

POLICY_SHRINK = 0
POLICY_CLAMP = 1

N_STATE = 7
N_ACC = 5
N_REC = 12

# Smallest allowed sub-step, as a fraction of the base step.
MIN_STEP_FRACTION = 2.0 ** -20


@njit(cache=True)
def _refinement_seed(seed, path, step):
    s = (np.uint64(seed) * np.uint64(2654435761)
         + np.uint64(path) * np.uint64(40503)
         + np.uint64(step) * np.uint64(2246822519)) & np.uint64(0xFFFFFFFF)
    return np.uint32(s)


@njit(cache=True)
def run_toy_block(state, acc, counts, extrema,
                  Z, step0, n_steps_total, h,
                  alpha, beta, gamma, lo, hi, M, V,
                  k_trunc, policy, seed,
                  rec_every, out):
    """Advance every path over one block of base steps.

    Returns -1 on success, otherwise the index of the first path whose
    sub-step underflowed (a law violating admissibility in practice).
    """
    n_paths = state.shape[0]
    bs = Z.shape[1]
    q = 3.0 * V / (4.0 * np.pi)          # a^2 c, conserved
    pref = 2.0 * np.pi / V
    h_min = h * MIN_STEP_FRACTION
    n_rec_rows = out.shape[0]

    for j in range(bs):
        n = step0 + j
        t0 = n * h
        for p in range(n_paths):
            w1 = state[p, 0]
            w2 = state[p, 1]
            w3 = state[p, 2]
            I1 = state[p, 3]
            I2 = state[p, 4]
            I3 = state[p, 5]
            c = state[p, 6]

            remaining = h
            first = True
            refined = False
            while remaining > 0.0:
                ts = t0 + (h - remaining)
                hs = remaining
                fb = (c - lo) * (hi - c)
                cosg = np.cos(gamma * ts)
                f = alpha * cosg * fb
                g = beta * fb

                if policy == POLICY_SHRINK:
                    move = abs(f) * hs + k_trunc * np.sqrt(hs) * abs(g)
                    while c - move < lo or c + move > hi:
                        hs *= 0.5
                        if hs < h_min:
                            return p
                        move = abs(f) * hs + k_trunc * np.sqrt(hs) * abs(g)
                    if hs < remaining and not refined:
                        refined = True
                        counts[p, 1] += 1
                        np.random.seed(_refinement_seed(seed, p, n))

                if first and not refined:
                    z = Z[p, j]
                else:
                    z = np.random.standard_normal()
                first = False
                if z > k_trunc:
                    z = k_trunc
                elif z < -k_trunc:
                    z = -k_trunc
                dB = np.sqrt(hs) * z

                c2 = c * c
                c3 = c2 * c
                gg = g * g
                h1 = M / 5.0 * (-q * f / c2 + gg * (1.0 + q / c3) + 2.0 * c * f)
                h3 = 3.0 * M * V / (10.0 * np.pi) * (-f / c2 + gg / c3)
                m1 = M / 5.0 * g * (2.0 * c - q / c2)
                m3 = -3.0 * M * V / (10.0 * np.pi) * g / c2
                d13 = I1 - I3
                l1 = d13 * w2 * w3
                l2 = -d13 * w1 * w3

                dw1 = (l1 / I1 - w1 / I1 * h1 + w1 / (I1 * I1) * m1 * m1) * hs \
                    - w1 / I1 * m1 * dB
                dw2 = (l2 / I2 - w2 / I2 * h3 + w2 / (I2 * I2) * m3 * m3) * hs \
                    - w2 / I2 * m3 * dB
                dw3 = (-w3 / I3 * h3 + w3 / (I3 * I3) * m3 * m3) * hs \
                    - w3 / I3 * m3 * dB
                dI1 = h1 * hs + m1 * dB
                dI23 = h3 * hs + m3 * dB
                dc = f * hs + g * dB

                dH = -pref * (c2 * f + c * gg) * hs - pref * c2 * g * dB
                acc[p, 0] += dH
                acc[p, 1] += -0.4 * dH
                acc[p, 2] += c2 * g * dB
                acc[p, 3] += c2 * dc
                acc[p, 4] += c * gg * hs

                w1 += dw1
                w2 += dw2
                w3 += dw3
                I1 += dI1
                I2 += dI23
                I3 += dI23
                c += dc
                remaining -= hs
                # Halved sub-steps need not sum exactly to h in floating
                # point; absorb any sub-ulp residue.
                if remaining < h * 1e-12:
                    remaining = 0.0

                if c < lo or c > hi:
                    counts[p, 0] += 1
                    if policy == POLICY_CLAMP:
                        counts[p, 1] += 1
                        if c < lo:
                            c = lo
                        else:
                            c = hi
                if c < extrema[p, 0]:
                    extrema[p, 0] = c
                if c > extrema[p, 1]:
                    extrema[p, 1] = c

            state[p, 0] = w1
            state[p, 1] = w2
            state[p, 2] = w3
            state[p, 3] = I1
            state[p, 4] = I2
            state[p, 5] = I3
            state[p, 6] = c

        n_done = n + 1
        rec_idx = -1
        if n_done % rec_every == 0:
            rec_idx = n_done // rec_every
        elif n_done == n_steps_total:
            rec_idx = n_rec_rows - 1
        if 0 <= rec_idx < n_rec_rows:
            for p in range(n_paths):
                out[rec_idx, p, 0] = state[p, 6]
                out[rec_idx, p, 1] = state[p, 0]
                out[rec_idx, p, 2] = state[p, 1]
                out[rec_idx, p, 3] = state[p, 2]
                out[rec_idx, p, 4] = state[p, 3]
                out[rec_idx, p, 5] = state[p, 4]
                out[rec_idx, p, 6] = state[p, 5]
                for k in range(N_ACC):
                    out[rec_idx, p, 7 + k] = acc[p, k]
    return -1
