import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from coopshift.errors import DomainError, IllConditionedSampleError, InvalidSampleError
from coopshift.spectro import (
    Lorentzian,
    ThreePointSample,
    estimate_center_approx,
    estimate_center_exact,
    estimate_centers,
    lorentzian_flux,
    photons_for_sigma,
    probe_detunings,
    shot_noise_sigma,
)

GAMMA = 24.63


def test_flux_values():
    line = Lorentzian(1.5, GAMMA, 3.0)
    assert lorentzian_flux(line, 1.5) == 3.0
    assert lorentzian_flux(line, 1.5 + GAMMA / 2) == pytest.approx(1.5, rel=1e-15)
    assert lorentzian_flux(line, 1.5 - GAMMA) == pytest.approx(3.0 / 5, rel=1e-15)


def test_probe_detunings():
    np.testing.assert_allclose(probe_detunings(2.0, 10.0), [2.0, 7.0, -3.0])


@pytest.mark.parametrize("f0", np.linspace(-0.4, 0.4, 50) * GAMMA / 2)
def test_exact_recovery(f0):
    line = Lorentzian(f0, GAMMA, 7.0)
    est = estimate_center_exact(ThreePointSample.from_line(line, 0.0, GAMMA))
    assert est == pytest.approx(f0, abs=1e-12 * GAMMA)


def test_exact_recovery_far_from_guess():
    line = Lorentzian(9.0, GAMMA)
    assert estimate_center_exact(ThreePointSample.from_line(line, 0.0, GAMMA)) == pytest.approx(9.0, rel=1e-12)


def test_symmetric_sample_returns_guess():
    s = ThreePointSample(3.25, GAMMA, 1.0, 0.5, 0.5)
    assert estimate_center_exact(s) == 3.25
    assert estimate_center_approx(s) == 3.25


def test_approximate_is_first_order():
    errs = []
    for f0 in (0.05, 0.1, 0.2, 0.4):
        s = ThreePointSample.from_line(Lorentzian(f0, GAMMA), 0.0, GAMMA)
        errs.append(abs(estimate_center_approx(s) - f0))
    assert errs[-1] > 1e-6
    # error falls off faster than the offset itself
    assert errs[0] / 0.05 < errs[-1] / 0.4
    s = ThreePointSample.from_line(Lorentzian(0.001, GAMMA), 0.0, GAMMA)
    assert estimate_center_approx(s) == pytest.approx(0.001, rel=1e-3)


@pytest.mark.parametrize("ratio", [0.5, 0.8, 1.3])
def test_exact_for_any_guess_width(ratio):
    # 1/L is quadratic in detuning, so three points fix its vertex whatever the spacing
    s = ThreePointSample.from_line(Lorentzian(1.0, GAMMA), 0.0, ratio * GAMMA)
    assert estimate_center_exact(s) == pytest.approx(1.0, rel=1e-12)
    assert abs(estimate_center_approx(s) - 1.0) > 1e-3


@settings(max_examples=100, deadline=None)
@given(
    f0=st.floats(-5, 5),
    shift=st.floats(-100, 100),
    amp=st.floats(0.1, 1e4),
)
def test_translation_and_scale_invariance(f0, shift, amp):
    base = estimate_center_exact(ThreePointSample.from_line(Lorentzian(f0, GAMMA), 0.0, GAMMA))
    moved = estimate_center_exact(ThreePointSample.from_line(Lorentzian(f0 + shift, GAMMA, amp), shift, GAMMA))
    assert moved - shift == pytest.approx(base, abs=1e-9)


def test_invalid_and_ill_conditioned():
    with pytest.raises(InvalidSampleError):
        estimate_center_exact(ThreePointSample(0.0, GAMMA, 0.0, 1.0, 1.0))
    with pytest.raises(InvalidSampleError):
        estimate_center_approx(ThreePointSample(0.0, GAMMA, 0.0, 1.0, 1.0))
    # 2(L+ + L-) = 4 L+ L- / L0
    with pytest.raises(IllConditionedSampleError):
        estimate_center_exact(ThreePointSample(0.0, GAMMA, 1.0, 1.0, 1.0))
    with pytest.raises(DomainError):
        ThreePointSample(0.0, GAMMA, 1.0, -1.0, 1.0)
    with pytest.raises(DomainError):
        ThreePointSample(0.0, 0.0, 1.0, 1.0, 1.0)
    with pytest.raises(DomainError):
        Lorentzian(0.0, -1.0)


def test_vectorized_matches_scalar():
    rng = np.random.default_rng(0)
    l0 = rng.uniform(50, 100, 200)
    lp = rng.uniform(20, 60, 200)
    lm = rng.uniform(20, 60, 200)
    l0[:3] = 0.0
    lp[5], lm[5], l0[5] = 1.0, 1.0, 1.0
    centers, status = estimate_centers(l0, lp, lm, 0.5, GAMMA)
    for i in range(200):
        s = ThreePointSample(0.5, GAMMA, l0[i], lp[i], lm[i])
        if status[i] == 0:
            assert centers[i] == pytest.approx(estimate_center_exact(s), rel=1e-12)
        elif status[i] == 1:
            assert np.isnan(centers[i])
            with pytest.raises(InvalidSampleError):
                estimate_center_exact(s)
        else:
            assert np.isnan(centers[i])
            with pytest.raises(IllConditionedSampleError):
                estimate_center_exact(s)
    assert list(status[:3]) == [1, 1, 1]
    assert status[5] == 2


def test_shot_noise():
    assert shot_noise_sigma(GAMMA, 662) == pytest.approx(0.4786, abs=1e-4)
    assert shot_noise_sigma(GAMMA, 4 * 662) == pytest.approx(shot_noise_sigma(GAMMA, 662) / 2)
    n = photons_for_sigma(GAMMA, 0.0024)
    assert n == pytest.approx(2.63e7, rel=0.01)
    assert shot_noise_sigma(GAMMA, n) == pytest.approx(0.0024)
    np.testing.assert_allclose(shot_noise_sigma(GAMMA, np.array([1.0, 4.0])), [GAMMA / 2, GAMMA / 4])
    with pytest.raises(DomainError):
        shot_noise_sigma(GAMMA, 0)


def test_poisson_estimator_noise_matches_shot_noise():
    """Monte Carlo with Poisson counts: N = expected counts at the two side points."""
    rng = np.random.default_rng(42)
    line = Lorentzian(0.0, GAMMA, 660.0)
    mu = lorentzian_flux(line, probe_detunings(0.0, GAMMA))
    counts = rng.poisson(mu, size=(40000, 3)).astype(float)
    c, st_ = estimate_centers(counts[:, 0], counts[:, 1], counts[:, 2], 0.0, GAMMA)
    assert np.all(st_ == 0)
    n_side = mu[1] + mu[2]
    assert np.std(c) == pytest.approx(shot_noise_sigma(GAMMA, n_side), rel=0.1)
