"""Chart backends: exact derivatives vs the finite-difference oracle."""

import math

import numpy as np
import pytest
import sympy as sp

from solitonlab import charts


def polar_plane():
    r, th = sp.symbols("r theta", positive=True)
    return charts.SymbolicChart(
        (r, th), [[1, 0], [0, r**2]], name="polar plane",
        domain=lambda x: x[0] > 1e-3,
    )


def cigar_chart():
    x, y = sp.symbols("x y")
    u = 1 + x**2 + y**2
    return charts.ConformalChart(2, 1 / u, (x, y), name="cigar")


def sheared_cigar():
    # cigar metric pulled back through a linear shear; dense non-diagonal
    # components exercise every index path.
    u, v = sp.symbols("u v")
    J = sp.Matrix([[1, sp.Rational(1, 3)], [0, 1]])
    xy = J * sp.Matrix([u, v])
    w = 1 + xy[0] ** 2 + xy[1] ** 2
    g = (J.T * J) / w
    return charts.SymbolicChart((u, v), g, name="sheared cigar")


@pytest.mark.parametrize("chart_fn", [polar_plane, cigar_chart, sheared_cigar])
def test_derivative_oracle_closed_form(chart_fn):
    chart = chart_fn()
    rng = np.random.default_rng(7)
    for _ in range(10):
        p = rng.uniform(0.3, 2.0, size=chart.dim)
        errs = charts.derivative_oracle_errors(chart, p)
        for key, val in errs.items():
            assert val < 1e-7, (chart.name, key, val)


def test_diagonal_chart_matches_symbolic_polar():
    r_fac = charts.square_coord_factor()
    diag = charts.DiagonalChart(
        2,
        [{}, {0: r_fac}],
        name="polar-diagonal",
        domain=lambda x: x[0] > 1e-3,
    )
    sym = polar_plane()
    p = np.array([1.7, 0.4])
    assert np.allclose(diag.metric(p), sym.metric(p))
    assert np.allclose(diag.metric_d1(p), sym.metric_d1(p))
    assert np.allclose(diag.metric_d2(p), sym.metric_d2(p))
    assert np.allclose(diag.metric_d3(p), sym.metric_d3(p))


def test_warped_diagonal_chart_oracle():
    # dr^2 + sin(r)^2 (dth^2 + sin(th)^2 dphi^2): geodesic polar round 3-sphere
    w = charts.FuncFactor((math.sin, math.cos, lambda t: -math.sin(t), lambda t: -math.cos(t)))
    w2 = charts.SquaredFactor(w)
    chart = charts.DiagonalChart(
        3,
        [{}, {0: w2}, {0: w2, 1: charts.sin_squared_factor()}],
        name="round sphere polar",
        domain=lambda x: 0.05 < x[0] < 3.0 and 0.1 < x[1] < 3.0,
    )
    rng = np.random.default_rng(3)
    for _ in range(6):
        p = np.array([rng.uniform(0.4, 2.2), rng.uniform(0.5, 2.5), rng.uniform(0.2, 5.0)])
        errs = charts.derivative_oracle_errors(chart, p)
        for key, val in errs.items():
            assert val < 1e-7, (key, val)


def test_product_chart_blocks():
    flat = charts.DiagonalChart(1, [{}], name="line")
    prod = charts.ProductChart(flat, cigar_chart())
    p = np.array([0.3, 0.5, -0.2])
    g = prod.metric(p)
    assert g.shape == (3, 3)
    assert g[0, 0] == 1.0
    assert np.all(g[0, 1:] == 0)
    errs = charts.derivative_oracle_errors(prod, p)
    for key, val in errs.items():
        assert val < 1e-7


def test_scalar_field_oracle():
    x, y = sp.symbols("x y")
    f = charts.SymbolicScalarField(-sp.log(1 + x**2 + y**2), (x, y))
    errs = charts.scalar_oracle_errors(f, np.array([0.8, -1.1]))
    for key, val in errs.items():
        assert val < 1e-7


def test_orthonormal_frame_is_orthonormal():
    chart = sheared_cigar()
    p = np.array([1.2, 0.7])
    g = chart.metric(p)
    E = charts.orthonormal_frame(g)
    assert np.allclose(E @ g @ E.T, np.eye(2), atol=1e-12)


def test_degenerate_metric_reports_eigenvalue():
    with pytest.raises(charts.DegenerateMetricError, match="eigenvalue"):
        charts.check_positive_definite(np.diag([1.0, 0.0]))


def test_domain_violation():
    chart = polar_plane()
    with pytest.raises(charts.ChartDomainError):
        chart.check_point([-1.0, 0.0])
    with pytest.raises(charts.ChartDomainError):
        chart.check_point([1.0, np.nan])
