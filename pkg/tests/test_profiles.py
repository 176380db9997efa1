"""Warped-profile integration, asymptotics, serialization."""

import math

import numpy as np
import pytest

from solitonlab import profiles
from solitonlab.profiles import OdeConfig, asymptotic_exponents, integrate_profile


@pytest.fixture(scope="module")
def steady3():
    return integrate_profile(3, 0.0, 6.0, OdeConfig(max_radius=400.0))


@pytest.fixture(scope="module")
def expanding3():
    return integrate_profile(3, -0.5, 6.0, OdeConfig(max_radius=450.0))


def test_rhs_flat_solution():
    lam = -0.5
    for r in (0.5, 1.0, 4.0):
        wpp, fpp = profiles.soliton_ode_rhs(3, lam, (r, 1.0, lam * r))
        assert wpp == pytest.approx(0.0, abs=1e-14)
        assert fpp == pytest.approx(lam, abs=1e-14)


def test_rhs_rejects_collapsed_w():
    with pytest.raises(profiles.ProfileError):
        profiles.soliton_ode_rhs(3, 0.0, (0.0, 1.0, 0.0))


def test_rhs_finite_off_cylinder():
    # w' = 0 with w constant is not stationary: the spherical term forces
    # w'' != 0, and the right side is finite.
    wpp, fpp = profiles.soliton_ode_rhs(3, 0.0, (2.0, 0.0, -1.0))
    assert math.isfinite(wpp) and math.isfinite(fpp)
    assert wpp != 0.0


def test_gaussian_branch_is_exactly_flat():
    lam = -0.5
    prof = integrate_profile(3, lam, 0.0, OdeConfig(max_radius=120.0))
    r = prof.grid
    assert np.max(np.abs(prof.w_vals - r)) < 1e-9
    assert np.max(np.abs(prof.f_vals - 0.5 * lam * r**2)) < 1e-9
    # (1 - w'^2)/w^2 amplifies interpolation noise near the tip, so assess
    # curvature away from it
    away = r[r > 0.05]
    assert np.max(np.abs(prof.scalar_curvature(away))) < 1e-8


def test_steady_profile_positive_sectional(steady3):
    r = np.linspace(0.05, steady3.r_max * 0.999, 400)
    k_rad, k_sph = steady3.sectional(r)
    assert np.min(k_rad) > -1e-8
    assert np.min(k_sph) > -1e-8


def test_expanding_profile_positive_sectional(expanding3):
    r = np.linspace(0.05, expanding3.r_max * 0.999, 400)
    k_rad, k_sph = expanding3.sectional(r)
    assert np.min(k_rad) > -1e-8
    assert np.min(k_sph) > -1e-8


def test_steady_hamilton_constant_along_grid(steady3):
    r = np.linspace(0.05, 390.0, 300)
    vals = steady3.hamilton_quantity(r)
    assert np.max(np.abs(vals - vals.mean())) < 1e-6
    # with w'(0)=1, f'(0)=0 the constant is the origin scalar curvature
    assert vals.mean() == pytest.approx(6.0, abs=1e-6)


def test_expanding_hamilton_constant_along_grid(expanding3):
    r = np.linspace(0.05, 145.0, 300)
    vals = expanding3.hamilton_quantity(r)
    assert np.max(np.abs(vals - vals.mean())) < 1e-5


def test_steady_exponents(steady3):
    fit = asymptotic_exponents(steady3)
    assert not fit.curvature_decay_exponential
    assert fit.curvature_decay == pytest.approx(1.0, abs=0.15)
    assert fit.volume_growth == pytest.approx(2.0, abs=0.15)
    assert fit.potential_growth == pytest.approx(1.0, abs=0.15)


def test_expanding_exponents(expanding3):
    fit = asymptotic_exponents(expanding3)
    assert not fit.curvature_decay_exponential
    assert fit.curvature_decay == pytest.approx(2.0, abs=0.2)
    assert fit.volume_growth == pytest.approx(3.0, abs=0.2)
    assert fit.potential_growth == pytest.approx(2.0, abs=0.2)


def test_cigar_profile_exponents():
    prof = profiles.cigar_profile(r_max=300.0)
    assert prof.hamilton_quantity(np.array([0.5, 3.0, 10.0])) == pytest.approx(4.0, abs=1e-9)
    fit = asymptotic_exponents(prof)
    assert fit.curvature_decay_exponential  # log-log fit rejected
    assert fit.volume_growth == pytest.approx(1.0, abs=0.1)


def test_truncated_profile_rejected():
    prof = integrate_profile(3, 0.0, 6.0, OdeConfig(max_radius=40.0))
    with pytest.raises(profiles.ProfileError, match="insufficient range"):
        asymptotic_exponents(prof)


def test_csv_roundtrip_bit_exact(steady3):
    text = steady3.to_csv()
    back = profiles.WarpedProfile.from_csv(text)
    assert np.array_equal(back.grid, steady3.grid)
    assert np.array_equal(back.w_vals, steady3.w_vals)
    assert np.array_equal(back.f_vals, steady3.f_vals)
    assert back.lam == steady3.lam and back.n == steady3.n


def test_config_validation():
    with pytest.raises(profiles.ProfileError):
        OdeConfig(series_start_radius=0.0)
    with pytest.raises(profiles.ProfileError):
        OdeConfig(rtol=-1.0)
    with pytest.raises(profiles.ProfileError):
        integrate_profile(3, 0.0, -1.0)
