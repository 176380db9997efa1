"""Weighted Einstein tensor, Q, Weitzenboeck and soliton identities."""

import json
import math

import numpy as np
import pytest

from solitonlab import catalog, curvature, weitzenbock
from solitonlab.catalog import make_soliton, sample_points
from solitonlab.weitzenbock import (
    codazzi_residual_3d,
    einstein_norm_invariants,
    identity_tolerance,
    q_term,
    soliton_identity_residuals,
    weighted_einstein,
    weitzenbock_report,
    weitzenbock_residual,
)


def pts(spec, m=6, seed=0, r_cap=None):
    return sample_points(spec, m, np.random.default_rng(seed), r_cap=r_cap)


@pytest.fixture(scope="module")
def steady():
    return catalog.bryant_steady(3)


@pytest.fixture(scope="module")
def expanding():
    return catalog.bryant_expanding(3)


def test_weighted_einstein_gaussian_zero():
    s = make_soliton("gaussian_3")
    for p in pts(s, 5):
        we = weighted_einstein(s, p)
        assert we.norm < 1e-13
        assert np.allclose(we.components, 0.0, atol=1e-13)


def test_weighted_einstein_2sphere_zero():
    # dim-2 Einstein: Ric = (R/2) g, so E^ vanishes (with f = 0)
    s = catalog.sphere_shrinker(2)
    for p in pts(s, 4):
        assert weighted_einstein(s, p).norm < 1e-12


def test_weighted_einstein_cylinder_rank_one():
    s = make_soliton("cigar_cylinder_3")
    for p in pts(s, 5, seed=2):
        b = curvature.curvature_bundle(s.chart, p)
        we = weighted_einstein(s, p)
        eig = np.linalg.eigvalsh(we.components / we.weight)  # e^{f} E^ spectrum
        expected = np.sort([-b.scalar / 2.0, 0.0, 0.0])
        assert np.allclose(np.sort(eig), expected, atol=1e-9)


def test_weighted_einstein_invariants():
    for name in ("cigar", "cigar_cylinder_4", "sphere_shrinker_3"):
        s = make_soliton(name)
        for p in pts(s, 4, seed=1):
            res = einstein_norm_invariants(s, p)
            assert res["trace"] < 1e-9
            assert res["norm"] < 1e-9


def test_q_gaussian_zero():
    s = make_soliton("gaussian_3")
    for p in pts(s, 4):
        assert q_term(s, p) == pytest.approx(0.0, abs=1e-14)


def test_q_cylinder_equality_model():
    for n in (3, 4, 5):
        s = make_soliton(f"cigar_cylinder_{n}")
        for p in pts(s, 6, seed=4):
            assert abs(q_term(s, p)) < 1e-9, (n, p)


def test_q_sphere_matches_closed_form():
    # T = 0 on the round sphere, so Q = (n-2)^3/(4 n^2) R^3 (f = 0)
    for n in (3, 4):
        s = catalog.sphere_shrinker(n)
        p = pts(s, 1, seed=7)[0]
        R = n * (n - 1)
        expected = (n - 2) ** 3 / (4 * n * n) * R**3
        assert q_term(s, p) == pytest.approx(expected, rel=1e-9)


def test_q_variants_agree_in_dim3(steady):
    for name in ("gaussian_3", "cigar_cylinder_3", "sphere_shrinker_3"):
        s = make_soliton(name)
        for p in pts(s, 5, seed=3):
            qn = q_term(s, p, "ndim")
            q3 = q_term(s, p, "threedim")
            scale = max(1.0, abs(qn))
            assert abs(qn - q3) < 1e-9 * scale
    for p in pts(steady, 4, seed=3, r_cap=10.0):
        qn = q_term(steady, p, "ndim")
        q3 = q_term(steady, p, "threedim")
        assert abs(qn - q3) < 1e-9 * max(1.0, abs(qn))


def test_q_variant_dimension_guard():
    s = make_soliton("cigar_cylinder_4")
    with pytest.raises(weitzenbock.DimensionError):
        q_term(s, pts(s, 1)[0], "threedim")


def test_q_positive_on_bryant(steady):
    for r in (0.5, 1.0, 2.0, 5.0, 10.0):
        p = np.array([r, math.pi / 2, math.pi])
        assert q_term(steady, p) > 0.0


def test_weitzenbock_gaussian_trivial():
    s = make_soliton("gaussian_3")
    rep = weitzenbock_report(s, pts(s, 1)[0])
    assert rep["residual"] < 1e-12
    assert rep["residual_intermediate"] < 1e-12


def test_weitzenbock_closed_form_entries():
    for name in ("cigar", "cigar_cylinder_3", "sphere_shrinker_3"):
        s = make_soliton(name)
        for p in pts(s, 5, seed=6):
            rep = weitzenbock_report(s, p)
            assert rep["residual"] < 1e-7, (name, p, rep["residual"])
            assert rep["residual_intermediate"] < 1e-7, name
            assert rep["q_forms_gap"] < 1e-9


def test_weitzenbock_cylinder_20_points():
    s = make_soliton("cigar_cylinder_3")
    worst = max(weitzenbock_residual(s, p) for p in pts(s, 20, seed=8))
    assert worst < 1e-7


def test_weitzenbock_bryant_named_radii(steady):
    for r in (0.5, 2.0, 10.0):
        p = np.array([r, math.pi / 2, math.pi])
        rep = weitzenbock_report(steady, p)
        assert rep["residual"] < 1e-4, (r, rep["residual"])
        assert rep["residual_intermediate"] < 1e-4


def test_weitzenbock_expanding(expanding):
    for p in pts(expanding, 5, seed=9, r_cap=12.0):
        assert weitzenbock_residual(expanding, p) < 1e-4


def test_identity_suite_gaussian_zero():
    s = make_soliton("gaussian_4")
    rep = soliton_identity_residuals(s, pts(s, 1)[0])
    for key, val in rep.residuals.items():
        assert val < 1e-12, key


def test_identity_suite_cigar_tight():
    s = make_soliton("cigar")
    for p in pts(s, 4, seed=10):
        rep = soliton_identity_residuals(s, p)
        for key, val in rep.residuals.items():
            assert val < 1e-8, (key, val, p)


def test_identity_suite_closed_form_entries():
    for name in ("cigar_cylinder_3", "cigar_cylinder_5", "sphere_shrinker_3"):
        s = make_soliton(name)
        for p in pts(s, 4, seed=11):
            rep = soliton_identity_residuals(s, p)
            assert rep.passed, (name, rep.residuals)


def test_identity_suite_profiles(steady, expanding):
    for s in (steady, expanding):
        for p in pts(s, 4, seed=12, r_cap=10.0):
            rep = soliton_identity_residuals(s, p)
            assert rep.passed, (s.name, rep.residuals)


def test_identity_negative_control():
    s = catalog.perturbed_control()
    worst = 0.0
    for p in pts(s, 6, seed=13):
        rep = soliton_identity_residuals(s, p)
        worst = max(worst, max(rep.residuals.values()))
    assert worst > 1e-3


def test_identity_report_json_line():
    s = make_soliton("cigar")
    rep = soliton_identity_residuals(s, pts(s, 1)[0])
    rec = json.loads(rep.to_json_line())
    assert rec["soliton"] == "cigar"
    assert rec["passed"] is True
    assert set(rec["residuals"]) == {
        "ricci_laplacian",
        "scalar_laplacian",
        "trace",
        "scalar_gradient",
        "ricci_commutation",
        "ricci_drift_laplacian",
    }


def test_codazzi_3d_entries(steady):
    for name in ("gaussian_3", "cigar_cylinder_3", "sphere_shrinker_3"):
        s = make_soliton(name)
        for p in pts(s, 4, seed=14):
            assert codazzi_residual_3d(s, p) < identity_tolerance(s), name
    p = np.array([2.0, math.pi / 2, math.pi])
    assert codazzi_residual_3d(steady, p) < 1e-4


def test_codazzi_dimension_guard():
    s = make_soliton("cigar_cylinder_4")
    with pytest.raises(weitzenbock.DimensionError):
        codazzi_residual_3d(s, pts(s, 1)[0])


def test_drift_kernel_on_cylinder():
    s = make_soliton("cigar_cylinder_4")
    for p in pts(s, 3, seed=15):
        assert weitzenbock.drift_ricci_kernel_residual(s, p) < 1e-7
