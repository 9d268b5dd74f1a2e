import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from oblatesim import (DeformationLaw, ToyModelParams,
                       check_deterministic_admissible,
                       check_stochastic_admissible, toy_diffusion, toy_drift,
                       toy_law)

from conftest import REF_C0, REF_DMAX

T_GRID = np.linspace(0.0, 50.0, 101)


def test_toy_drift_vanishes_at_bounds(ref_toy):
    lo, hi = ref_toy.bounds
    for t in (0.0, 0.3, 17.0):
        assert toy_drift(ref_toy, t, lo) == 0.0
        assert toy_drift(ref_toy, t, hi) == 0.0


def test_toy_diffusion_vanishes_at_bounds(ref_toy):
    lo, hi = ref_toy.bounds
    assert toy_diffusion(ref_toy, lo) == 0.0
    assert toy_diffusion(ref_toy, hi) == 0.0


def test_toy_drift_midpoint_value(ref_toy):
    # At x = c0 with symmetric bounds both factors equal d_max, so
    # f(0, c0) = alpha * d_max^2.
    expected = 1e-3 * REF_DMAX * REF_DMAX
    assert toy_drift(ref_toy, 0.0, REF_C0) == pytest.approx(expected, rel=1e-14)
    assert expected == pytest.approx(1.1148e-8, rel=1e-3)


def test_toy_diffusion_midpoint_value(ref_toy):
    expected = 1e-4 * REF_DMAX * REF_DMAX
    assert toy_diffusion(ref_toy, REF_C0) == pytest.approx(expected, rel=1e-14)


def test_toy_diffusion_beta_zero_degenerates():
    p = ToyModelParams(alpha=1e-3, beta=0.0, gamma=10.0,
                       c0=REF_C0, d_min=-REF_DMAX, d_max=REF_DMAX)
    x = np.linspace(*p.bounds, 50)
    assert np.all(toy_diffusion(p, x) == 0.0)


@given(alpha=st.floats(0.0, 10.0), beta=st.floats(0.0, 10.0),
       gamma=st.floats(-100.0, 100.0))
def test_toy_law_always_admissible(alpha, beta, gamma):
    p = ToyModelParams(alpha=alpha, beta=beta, gamma=gamma,
                       c0=1.0, d_min=-0.3, d_max=0.4)
    report = check_stochastic_admissible(toy_law(p), [0.0, 1.0, 2.5])
    assert report.admissible
    assert report.structural


def test_deterministic_check_toy(ref_law):
    report = check_deterministic_admissible(ref_law, T_GRID)
    assert report.admissible
    assert not report.violations


def test_deterministic_check_constant_outward():
    law = DeformationLaw(drift=lambda t, x: 1.0 + 0.0 * np.asarray(x),
                         diffusion=lambda t, x: 0.0 * np.asarray(x),
                         bounds=(0.9, 1.1))
    report = check_deterministic_admissible(law, T_GRID)
    assert not report.admissible
    assert all(v[1] == "upper" and v[2] == "drift" for v in report.violations)


def test_deterministic_check_restoring():
    lo, hi = 0.9, 1.1
    law = DeformationLaw(drift=lambda t, x: 0.5 * (lo + hi) - np.asarray(x, float),
                         diffusion=lambda t, x: 0.0 * np.asarray(x),
                         bounds=(lo, hi))
    assert check_deterministic_admissible(law, T_GRID).admissible


def test_stochastic_check_toy(ref_law):
    report = check_stochastic_admissible(ref_law, T_GRID)
    assert report.admissible
    assert report.stochastic


def test_stochastic_check_constant_diffusion(ref_law):
    law = DeformationLaw(drift=ref_law.drift,
                         diffusion=lambda t, x: 1e-4 + 0.0 * np.asarray(x),
                         bounds=ref_law.bounds)
    report = check_stochastic_admissible(law, T_GRID)
    assert not report.admissible
    sides = {v[1] for v in report.violations if v[2] == "diffusion"}
    assert sides == {"lower", "upper"}


def test_stochastic_check_one_sided_root(ref_law):
    lo, hi = ref_law.bounds
    law = DeformationLaw(drift=ref_law.drift,
                         diffusion=lambda t, x: 1e-4 * (np.asarray(x, float) - lo),
                         bounds=(lo, hi))
    report = check_stochastic_admissible(law, T_GRID)
    assert not report.admissible
    sides = {v[1] for v in report.violations if v[2] == "diffusion"}
    assert sides == {"upper"}


def test_check_rejects_bad_grids(ref_law):
    with pytest.raises(ValueError):
        check_deterministic_admissible(ref_law, [])
    with pytest.raises(ValueError):
        check_stochastic_admissible(ref_law, [-1.0, 0.0])


def test_toy_params_validation():
    with pytest.raises(ValueError):
        ToyModelParams(alpha=-1.0, beta=0.0, gamma=0.0, c0=1.0,
                       d_min=-0.1, d_max=0.1)
    with pytest.raises(ValueError):
        ToyModelParams(alpha=0.0, beta=0.0, gamma=0.0, c0=0.05,
                       d_min=-0.1, d_max=0.1)
