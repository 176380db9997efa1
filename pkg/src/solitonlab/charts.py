"""Coordinate charts with exact metric derivatives up to third order.

A chart exposes g_ij together with its first, second and third coordinate
partials.  Three backends cover every geometry in the catalog:

* ``SymbolicChart`` / ``ConformalChart`` -- closed-form metrics, with the
  derivative arrays generated symbolically once and evaluated numerically.
* ``DiagonalChart`` -- diagonal metrics whose entries are products of
  univariate factors (polar planes, warped products over round spheres);
  derivatives are assembled by the Leibniz rule from exact factor
  derivatives, which is what makes spline-backed warped metrics possible.
* ``ProductChart`` -- block-diagonal Riemannian products.

Scalar fields (soliton potentials, conformal factors) follow the same
pattern.  Everything is immutable after construction and evaluation is a
pure function of the point, so concurrent point sweeps are safe.
"""

from __future__ import annotations

import math
from collections.abc import Callable, Sequence

import numpy as np
import sympy as sp


class ChartError(ValueError):
    pass


class ChartDomainError(ChartError):
    """Point lies outside the chart's validity domain."""


class DegenerateMetricError(ChartError):
    """Metric failed the positive-definiteness check at a point."""


class DerivativeOrderError(ChartError):
    """A derivative of higher order than the backend provides was requested."""


# Recommended finite-difference bases per accuracy tier.  "closed" charts are
# exact to machine precision; "profile" charts carry spline interpolation
# noise, so derived-field stencils must take longer steps.
FD_BASES = {
    "closed": {"first": 1e-4, "second": 2e-3},
    "profile": {"first": 1e-3, "second": 3e-2},
}

EIG_FLOOR = 1e-12  # below this smallest eigenvalue the metric counts as degenerate


def as_point(x, dim: int) -> np.ndarray:
    p = np.asarray(x, dtype=float).reshape(-1)
    if p.size != dim:
        raise ChartDomainError(f"point has {p.size} coordinates, chart needs {dim}")
    if not np.all(np.isfinite(p)):
        raise ChartDomainError("point has non-finite coordinates")
    return p


class ChartMetric:
    """Base interface: metric components and exact partials to order 3."""

    dim: int
    name: str
    tier: str = "closed"

    def metric(self, x) -> np.ndarray:
        raise NotImplementedError

    def metric_d1(self, x) -> np.ndarray:  # [k, i, j] = d_k g_ij
        raise NotImplementedError

    def metric_d2(self, x) -> np.ndarray:  # [k, l, i, j]
        raise NotImplementedError

    def metric_d3(self, x) -> np.ndarray:  # [k, l, m, i, j]
        raise NotImplementedError

    def contains(self, x) -> bool:
        return True

    def check_point(self, x) -> np.ndarray:
        p = as_point(x, self.dim)
        if not self.contains(p):
            raise ChartDomainError(f"point {p} outside domain of chart '{self.name}'")
        return p

    def fd_base(self, order: str) -> float:
        return FD_BASES[self.tier][order]


def _lambdify_array(coords, expr_array):
    fn = sp.lambdify(coords, expr_array, modules="numpy")

    def wrapped(p):
        return np.asarray(fn(*p), dtype=float)

    return wrapped


class SymbolicScalar:
    """A sympy scalar expression with lambdified partials up to order 3."""

    def __init__(self, expr, coords):
        self.coords = tuple(coords)
        self.expr = sp.sympify(expr)
        n = len(self.coords)
        g1 = sp.derive_by_array(self.expr, self.coords)
        g2 = sp.derive_by_array(g1, self.coords)
        g3 = sp.derive_by_array(g2, self.coords)
        self._f = [
            _lambdify_array(self.coords, self.expr),
            _lambdify_array(self.coords, g1),
            _lambdify_array(self.coords, g2),
            _lambdify_array(self.coords, g3),
        ]
        self.dim = n

    def __call__(self, p, order=0):
        if order > 3:
            raise DerivativeOrderError("symbolic scalar provides derivatives up to order 3")
        return self._f[order](np.asarray(p, dtype=float))


class SymbolicChart(ChartMetric):
    """Arbitrary closed-form metric given as a sympy matrix."""

    def __init__(self, coords, g_matrix, name="symbolic", domain=None, box=None):
        self.coords = tuple(coords)
        self.dim = len(self.coords)
        self.name = name
        self._domain = domain
        self.box = box
        g = sp.ImmutableDenseNDimArray(sp.Matrix(g_matrix))
        d1 = sp.derive_by_array(g, self.coords)
        d2 = sp.derive_by_array(d1, self.coords)
        d3 = sp.derive_by_array(d2, self.coords)
        self._g = _lambdify_array(self.coords, g)
        self._d1 = _lambdify_array(self.coords, d1)
        self._d2 = _lambdify_array(self.coords, d2)
        self._d3 = _lambdify_array(self.coords, d3)

    def metric(self, x):
        return self._g(x).reshape(self.dim, self.dim)

    def metric_d1(self, x):
        return self._d1(x).reshape((self.dim,) * 3)

    def metric_d2(self, x):
        # derive_by_array stacks the newest derivative index first; partials
        # commute, so the layout already matches [k, l, i, j].
        return self._d2(x).reshape((self.dim,) * 4)

    def metric_d3(self, x):
        return self._d3(x).reshape((self.dim,) * 5)

    def contains(self, x):
        return self._domain(np.asarray(x, float)) if self._domain else True


class ConformalChart(ChartMetric):
    """g_ij = phi(x) * delta_ij for a positive closed-form factor phi."""

    def __init__(self, dim, phi_expr, coords, name="conformal", domain=None, box=None):
        self.dim = dim
        self.name = name
        self._domain = domain
        self.box = box
        self.phi = SymbolicScalar(phi_expr, coords)
        self._eye = np.eye(dim)

    def conformal_factor(self, x, order=0):
        return self.phi(x, order)

    def metric(self, x):
        return float(self.phi(x)) * self._eye

    def metric_d1(self, x):
        d = self.phi(x, 1)
        return np.einsum("k,ij->kij", d, self._eye)

    def metric_d2(self, x):
        d = self.phi(x, 2)
        return np.einsum("kl,ij->klij", d, self._eye)

    def metric_d3(self, x):
        d = self.phi(x, 3)
        return np.einsum("klm,ij->klmij", d, self._eye)

    def contains(self, x):
        return self._domain(np.asarray(x, float)) if self._domain else True


# ---------------------------------------------------------------------------
# Univariate factors for diagonal / warped charts
# ---------------------------------------------------------------------------


class Factor:
    """One-variable function with derivatives up to order 3."""

    def __call__(self, t: float, der: int = 0) -> float:
        raise NotImplementedError


class ConstFactor(Factor):
    def __init__(self, c: float):
        self.c = float(c)

    def __call__(self, t, der=0):
        return self.c if der == 0 else 0.0


class FuncFactor(Factor):
    """Factor from a tuple of callables (value, d1, d2, d3)."""

    def __init__(self, funcs: Sequence[Callable[[float], float]]):
        self.funcs = tuple(funcs)

    def __call__(self, t, der=0):
        if der >= len(self.funcs):
            raise DerivativeOrderError(f"factor provides {len(self.funcs) - 1} derivatives")
        return float(self.funcs[der](t))


class SquaredFactor(Factor):
    """w(t)^2 for a base factor w, by the chain rule."""

    def __init__(self, base: Factor):
        self.base = base

    def __call__(self, t, der=0):
        w = self.base
        if der == 0:
            return w(t) ** 2
        if der == 1:
            return 2.0 * w(t) * w(t, 1)
        if der == 2:
            return 2.0 * (w(t, 1) ** 2 + w(t) * w(t, 2))
        if der == 3:
            return 2.0 * (3.0 * w(t, 1) * w(t, 2) + w(t) * w(t, 3))
        raise DerivativeOrderError("squared factor provides derivatives up to order 3")


def sin_squared_factor() -> Factor:
    return FuncFactor(
        (
            lambda t: math.sin(t) ** 2,
            lambda t: math.sin(2.0 * t),
            lambda t: 2.0 * math.cos(2.0 * t),
            lambda t: -4.0 * math.sin(2.0 * t),
        )
    )


def square_coord_factor() -> Factor:
    return FuncFactor((lambda t: t * t, lambda t: 2.0 * t, lambda t: 2.0, lambda t: 0.0))


class DiagonalChart(ChartMetric):
    """Diagonal metric with entries that are products of univariate factors.

    ``entries[i]`` maps axis -> Factor; g_ii(x) = prod factor(x[axis]).
    Axes that do not appear leave the entry constant along them.
    """

    def __init__(self, dim, entries, name="diagonal", domain=None, tier="closed", box=None):
        self.dim = dim
        self.name = name
        self.tier = tier
        self._domain = domain
        self.box = box
        self.entries = [dict(e) for e in entries]
        if len(self.entries) != dim:
            raise ChartError("need one diagonal entry per coordinate")

    def _entry_partial(self, i, counts, x):
        val = 1.0
        for axis, cnt in enumerate(counts):
            fac = self.entries[i].get(axis)
            if fac is None:
                if cnt > 0:
                    return 0.0
                continue
            val *= fac(x[axis], cnt)
        return val

    def _array(self, x, order):
        n = self.dim
        out = np.zeros((n,) * order + (n, n))
        for i in range(n):
            if order == 0:
                out[i, i] = self._entry_partial(i, (0,) * n, x)
                continue
            for idx in np.ndindex(*(n,) * order):
                counts = [0] * n
                for a in idx:
                    counts[a] += 1
                out[idx + (i, i)] = self._entry_partial(i, counts, x)
        return out

    def metric(self, x):
        return self._array(np.asarray(x, float), 0)

    def metric_d1(self, x):
        return self._array(np.asarray(x, float), 1)

    def metric_d2(self, x):
        return self._array(np.asarray(x, float), 2)

    def metric_d3(self, x):
        return self._array(np.asarray(x, float), 3)

    def contains(self, x):
        return self._domain(np.asarray(x, float)) if self._domain else True


class ProductChart(ChartMetric):
    """Block-diagonal Riemannian product of two charts."""

    def __init__(self, a: ChartMetric, b: ChartMetric, name=None):
        self.a = a
        self.b = b
        self.dim = a.dim + b.dim
        self.name = name or f"{a.name} x {b.name}"
        self.tier = "profile" if "profile" in (a.tier, b.tier) else "closed"
        box_a = getattr(a, "box", None)
        box_b = getattr(b, "box", None)
        if box_a is not None and box_b is not None:
            self.box = (
                np.concatenate([box_a[0], box_b[0]]),
                np.concatenate([box_a[1], box_b[1]]),
            )
        else:
            self.box = None

    def split(self, x):
        x = np.asarray(x, float)
        return x[: self.a.dim], x[self.a.dim :]

    def _embed(self, arr_a, arr_b, order):
        n, na = self.dim, self.a.dim
        out = np.zeros((n,) * (order + 2))
        sl_a = (slice(0, na),) * (order + 2)
        sl_b = (slice(na, n),) * (order + 2)
        out[sl_a] = arr_a
        out[sl_b] = arr_b
        return out

    def metric(self, x):
        xa, xb = self.split(x)
        return self._embed(self.a.metric(xa), self.b.metric(xb), 0)

    def metric_d1(self, x):
        xa, xb = self.split(x)
        return self._embed(self.a.metric_d1(xa), self.b.metric_d1(xb), 1)

    def metric_d2(self, x):
        xa, xb = self.split(x)
        return self._embed(self.a.metric_d2(xa), self.b.metric_d2(xb), 2)

    def metric_d3(self, x):
        xa, xb = self.split(x)
        return self._embed(self.a.metric_d3(xa), self.b.metric_d3(xb), 3)

    def contains(self, x):
        xa, xb = self.split(x)
        return self.a.contains(xa) and self.b.contains(xb)


# ---------------------------------------------------------------------------
# Scalar fields
# ---------------------------------------------------------------------------


class ScalarField:
    dim: int

    def value(self, x) -> float:
        raise NotImplementedError

    def grad(self, x) -> np.ndarray:
        raise NotImplementedError

    def hess(self, x) -> np.ndarray:
        raise NotImplementedError

    def third(self, x) -> np.ndarray:
        raise NotImplementedError


class SymbolicScalarField(ScalarField):
    def __init__(self, expr, coords):
        self._s = SymbolicScalar(expr, coords)
        self.dim = self._s.dim

    def value(self, x):
        return float(self._s(x, 0))

    def grad(self, x):
        return self._s(x, 1).reshape(self.dim)

    def hess(self, x):
        return self._s(x, 2).reshape(self.dim, self.dim)

    def third(self, x):
        return self._s(x, 3).reshape((self.dim,) * 3)


class ConstantScalarField(ScalarField):
    def __init__(self, c, dim):
        self.c = float(c)
        self.dim = dim

    def value(self, x):
        return self.c

    def grad(self, x):
        return np.zeros(self.dim)

    def hess(self, x):
        return np.zeros((self.dim, self.dim))

    def third(self, x):
        return np.zeros((self.dim,) * 3)


class RadialScalarField(ScalarField):
    """f depending only on the coordinate along one axis (default axis 0)."""

    def __init__(self, factor: Factor, dim, axis=0):
        self.factor = factor
        self.dim = dim
        self.axis = axis

    def value(self, x):
        return float(self.factor(np.asarray(x, float)[self.axis]))

    def grad(self, x):
        out = np.zeros(self.dim)
        out[self.axis] = self.factor(np.asarray(x, float)[self.axis], 1)
        return out

    def hess(self, x):
        out = np.zeros((self.dim, self.dim))
        out[self.axis, self.axis] = self.factor(np.asarray(x, float)[self.axis], 2)
        return out

    def third(self, x):
        out = np.zeros((self.dim,) * 3)
        out[(self.axis,) * 3] = self.factor(np.asarray(x, float)[self.axis], 3)
        return out


class LiftedScalarField(ScalarField):
    """A scalar field on one product factor, pulled back to the product."""

    def __init__(self, base: ScalarField, total_dim, offset):
        self.base = base
        self.dim = total_dim
        self.offset = offset

    def _sub(self, x):
        return np.asarray(x, float)[self.offset : self.offset + self.base.dim]

    def value(self, x):
        return self.base.value(self._sub(x))

    def grad(self, x):
        out = np.zeros(self.dim)
        out[self.offset : self.offset + self.base.dim] = self.base.grad(self._sub(x))
        return out

    def hess(self, x):
        out = np.zeros((self.dim, self.dim))
        sl = slice(self.offset, self.offset + self.base.dim)
        out[sl, sl] = self.base.hess(self._sub(x))
        return out

    def third(self, x):
        out = np.zeros((self.dim,) * 3)
        sl = slice(self.offset, self.offset + self.base.dim)
        out[sl, sl, sl] = self.base.third(self._sub(x))
        return out


# ---------------------------------------------------------------------------
# Frames and metric checks
# ---------------------------------------------------------------------------


def check_positive_definite(g: np.ndarray, name="metric") -> np.ndarray:
    """Hard error on degenerate metrics; never clamps.

    The floor is relative to the largest eigenvalue so that uniformly small
    conformal metrics (g ~ rho^-2 at large chart radius) are not misflagged,
    while genuinely singular or indefinite matrices always fail.
    """
    eig = np.linalg.eigvalsh(g)
    if eig[0] <= 0.0 or eig[0] < EIG_FLOOR * eig[-1]:
        raise DegenerateMetricError(
            f"{name} not positive definite: smallest eigenvalue {eig[0]:.3e}"
        )
    return eig


def orthonormal_frame(g: np.ndarray) -> np.ndarray:
    """Gram-Schmidt of the coordinate basis, in coordinate order.

    Returns E with rows = frame vectors (up components); E g E^T = id.
    Equivalent to inverting the Cholesky factor, which is deterministic.
    """
    check_positive_definite(g)
    L = np.linalg.cholesky(g)
    return np.linalg.inv(L)


def to_frame(E: np.ndarray, T: np.ndarray, rank: int) -> np.ndarray:
    """Convert a fully covariant rank-1..4 tensor to frame components."""
    if rank == 1:
        return E @ T
    if rank == 2:
        return E @ T @ E.T
    if rank == 3:
        return np.einsum("ai,bj,ck,ijk->abc", E, E, E, T)
    if rank == 4:
        return np.einsum("ai,bj,ck,dl,ijkl->abcd", E, E, E, E, T)
    raise ValueError("rank must be 1..4")


# ---------------------------------------------------------------------------
# Oracle: exact derivatives vs finite differences, order by order
# ---------------------------------------------------------------------------


def derivative_oracle_errors(chart: ChartMetric, x, base: float = 1e-4) -> dict:
    """Relative deviation of each exact derivative order from a 4th-order
    central-difference (with one Richardson level) of the previous order.

    Differencing the exact next-lower order keeps every comparison in the
    regime where central stencils are reliable in double precision; a direct
    third difference of g would drown in rounding error.
    """
    from . import fd

    x = chart.check_point(x)
    levels = [
        (chart.metric, chart.metric_d1),
        (chart.metric_d1, chart.metric_d2),
        (chart.metric_d2, chart.metric_d3),
    ]
    out = {}
    for order, (lo, hi) in enumerate(levels, start=1):
        exact = hi(x)
        approx = fd.gradient(lo, x, base=base, richardson=True)
        scale = max(1.0, float(np.max(np.abs(exact))))
        out[f"g_order{order}"] = float(np.max(np.abs(exact - approx))) / scale
    return out


def scalar_oracle_errors(field: ScalarField, x, base: float = 1e-4) -> dict:
    from . import fd

    x = np.asarray(x, dtype=float)
    levels = [
        (lambda p: np.asarray(field.value(p)), field.grad),
        (field.grad, field.hess),
        (field.hess, field.third),
    ]
    out = {}
    for order, (lo, hi) in enumerate(levels, start=1):
        exact = np.asarray(hi(x))
        approx = fd.gradient(lo, x, base=base, richardson=True)
        scale = max(1.0, float(np.max(np.abs(exact))))
        out[f"f_order{order}"] = float(np.max(np.abs(exact - approx))) / scale
    return out
