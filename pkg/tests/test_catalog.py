"""Catalog entries: residuals, Hamilton constants, pinching, flags."""

import json
import math

import numpy as np
import pytest

from solitonlab import catalog
from solitonlab.catalog import (
    FlatSolitonError,
    cigar,
    cigar_cylinder,
    gaussian,
    geodesic_radius_via_quadrature,
    hamilton_constant,
    make_soliton,
    perturbed_control,
    pinching_alpha,
    potential_quadratic_fit,
    sample_points,
    soliton_residual,
    sphere_shrinker,
    trace_identity_residual,
)


def pts(spec, m=12, seed=0, r_cap=None):
    return sample_points(spec, m, np.random.default_rng(seed), r_cap=r_cap)


def test_gaussian_residual_machine_zero():
    s = gaussian(3, -0.5)
    worst = max(soliton_residual(s, p) for p in pts(s, 50))
    assert worst < 1e-12


def test_cigar_residual_and_hamilton():
    s = cigar()
    sample = pts(s, 30)
    assert max(soliton_residual(s, p) for p in sample) < 1e-9
    rec = hamilton_constant(s, sample)
    assert rec.c == pytest.approx(4.0, abs=1e-8)
    assert rec.sample_spread < 1e-8


def test_cigar_residual_far_out():
    s = cigar()
    rho = math.sinh(3.0)
    assert soliton_residual(s, [rho, 0.0]) < 1e-9


def test_gaussian_hamilton_zero():
    s = gaussian(4, -0.5)
    rec = hamilton_constant(s, pts(s, 20))
    assert rec.c == pytest.approx(0.0, abs=1e-12)
    assert rec.sample_spread < 1e-12


def test_cigar_cylinder_residual_and_spectrum():
    s = cigar_cylinder(4)
    sample = pts(s, 15)
    assert max(soliton_residual(s, p) for p in sample) < 1e-9
    for p in sample[:5]:
        eig = catalog.ricci_eigenvalues(s, p)
        b_scalar = eig.sum()
        expected = np.array([0.0, 0.0, b_scalar / 2, b_scalar / 2])
        assert np.allclose(np.sort(eig), np.sort(expected), atol=1e-10)


def test_sphere_shrinker_is_einstein():
    s = sphere_shrinker(3)
    assert s.lam == pytest.approx(2.0)
    assert max(soliton_residual(s, p) for p in pts(s, 15)) < 1e-9


def test_trace_identity_all_entries():
    for name in ("gaussian_3", "cigar", "cigar_cylinder_3", "sphere_shrinker_3"):
        s = make_soliton(name)
        worst = max(trace_identity_residual(s, p) for p in pts(s, 10, seed=3))
        assert worst < 1e-9, name


def test_perturbed_control_fails_residual():
    s = perturbed_control()
    worst = max(soliton_residual(s, p) for p in pts(s, 25))
    assert worst > 1e-3


def test_pinching_cigar_finite_gaussian_flat():
    s = cigar()
    alpha = pinching_alpha(s, pts(s, 50, r_cap=10.0))
    assert math.isfinite(alpha) and alpha > 0
    with pytest.raises(FlatSolitonError, match="flat: pinching undefined"):
        pinching_alpha(gaussian(3), pts(gaussian(3), 5))


def test_pinching_sphere_constant():
    s = sphere_shrinker(2)
    sample = pts(s, 10)
    vals = [pinching_alpha(s, [p]) for p in sample]
    assert np.allclose(vals, vals[0], rtol=1e-9)


def test_bryant_steady_residual_tier():
    s = catalog.bryant_steady(3)
    sample = pts(s, 20)
    assert max(soliton_residual(s, p) for p in sample) < 1e-5
    rec = hamilton_constant(s, sample)
    assert rec.sample_spread < 1e-5
    fit = catalog.validate_spec(s, 10, seed=1)
    assert fit["min_sectional"] > -1e-8


def test_bryant_residual_at_named_radii():
    s = catalog.bryant_steady(3)
    for r in (1.0, 5.0, 20.0):
        p = np.array([r, math.pi / 2, math.pi])
        assert soliton_residual(s, p) < 1e-5


def test_bryant_expanding_potential_growth():
    s = catalog.bryant_expanding(3)
    fit = potential_quadratic_fit(s)
    assert fit["rel_dev"] < 0.10  # leading coefficient of -f/r^2 -> -lam/2
    gfit = potential_quadratic_fit(gaussian(3, -0.5))
    assert gfit["rel_dev"] < 1e-10


def test_expanding_potential_between_quadratic_bounds():
    s = catalog.bryant_expanding(3)
    prof = s.profile
    r = np.linspace(5.0, prof.r_max * 0.95, 60)
    minus_f = -prof.f(r)
    lam = s.lam
    # fitted-constant sandwich: -lam/2 (r - c1)^2 - c2 <= -f <= -lam/2 (r + c3)^2
    c1 = c3 = 5.0
    c2 = 50.0
    lower = -lam / 2 * (r - c1) ** 2 - c2
    upper = -lam / 2 * (r + c3) ** 2
    assert np.all(minus_f >= lower) and np.all(minus_f <= upper)


def test_descriptor_roundtrip():
    s = cigar_cylinder(3)
    d = json.loads(s.descriptor_json())
    assert d["name"] == "cigar_cylinder_3"
    assert d["dim"] == 3
    assert d["lambda"] == 0.0
    assert d["kind"] == "steady"


def test_make_soliton_dispatch_and_errors():
    assert make_soliton("gaussian_3").dim == 3
    assert make_soliton("cigar_cylinder_5").dim == 5
    with pytest.raises(catalog.CatalogError):
        make_soliton("nonsense_entry")
    with pytest.raises(catalog.CatalogError):
        cigar_cylinder(2)


def test_geodesic_radius_quadrature_matches_closed_form():
    s = cigar()
    for t in (0.5, 1.5, 3.0):
        rho = math.sinh(t)
        assert geodesic_radius_via_quadrature(s.chart, rho) == pytest.approx(t, abs=1e-9)


def test_radial_geometry_matches_chart_on_cigar():
    # closed-form radial data vs the chart machinery at the embedded points
    from solitonlab import curvature

    s = cigar()
    for t in (0.4, 1.0, 2.5, 6.0):
        p = s.radial.chart_point(t)
        b = curvature.curvature_bundle(s.chart, p)
        assert b.scalar == pytest.approx(float(s.radial.scalar(t)), rel=1e-9)
        assert s.potential.value(p) == pytest.approx(float(s.radial.f(t)), rel=1e-9)
        # circumference radius from the chart: rho * sqrt(phi)
        rho = p[0]
        w_chart = rho * math.sqrt(float(s.chart.conformal_factor(p)))
        assert w_chart == pytest.approx(float(s.radial.w(t)), rel=1e-12)


def test_validate_spec_all_closed_form():
    for name in ("gaussian_3", "cigar", "cigar_cylinder_3", "sphere_shrinker_3"):
        s = make_soliton(name)
        rep = catalog.validate_spec(s, 8, seed=5)
        assert rep["kind_matches_lambda"]
        assert rep["max_residual"] < s.residual_tol
        if "min_ricci_eig" in rep:
            assert rep["min_ricci_eig"] > -1e-9
