"""Catalog of gradient Ricci solitons with structural validators.

Each entry bundles a chart, a potential f, the constant lam of
Ric + Hess f = lam * g, declared curvature flags, and (for rotationally
symmetric or product geometries) closed-form radial data used by the
integral layer.  Validation is always by residual, never by authority:
an entry is a soliton because |Ric + Hess f - lam g| vanishes at sampled
points, and a negative-control entry is kept around to prove the residual
can fail.
"""

from __future__ import annotations

import functools
import json
import math
from collections.abc import Callable
from dataclasses import dataclass, field

import numpy as np
import sympy as sp
from scipy.integrate import solve_ivp

from . import curvature
from .charts import (
    ChartMetric,
    ConformalChart,
    DiagonalChart,
    LiftedScalarField,
    ConstantScalarField,
    ProductChart,
    RadialScalarField,
    ScalarField,
    SquaredFactor,
    SymbolicScalarField,
    sin_squared_factor,
)
from .profiles import (
    OdeConfig,
    ProfilePotentialFactor,
    ProfileWarpFactor,
    WarpedProfile,
    cigar_profile,
    integrate_profile,
    sphere_area,
)


class CatalogError(ValueError):
    pass


class FlatSolitonError(CatalogError):
    """Raised where an operation is undefined on flat entries."""


# ---------------------------------------------------------------------------
# Radial geometry: closed 1-d reduction for rotationally symmetric entries
# ---------------------------------------------------------------------------


@dataclass
class RadialGeometry:
    """w, f, R as functions of the geodesic radius, plus a chart embedding."""

    n: int
    r_max: float
    w: Callable[[np.ndarray], np.ndarray]
    f: Callable[[np.ndarray], np.ndarray]
    scalar: Callable[[np.ndarray], np.ndarray]
    chart_point: Callable[[float], np.ndarray]
    df: Callable[[np.ndarray], np.ndarray] | None = None

    def area(self, r):
        return sphere_area(self.n - 1) * self.w(np.asarray(r, float)) ** (self.n - 1)


@dataclass
class ProductRadialGeometry:
    """R^k x (2-d rotationally symmetric factor); distances combine
    Pythagorean-style, exactly as for a Riemannian product."""

    flat_dim: int
    factor: RadialGeometry
    chart_point: Callable[[float, float], np.ndarray]  # (flat offset, factor radius)

    @property
    def n(self):
        return self.flat_dim + 2


# ---------------------------------------------------------------------------
# Soliton specification
# ---------------------------------------------------------------------------


@dataclass
class SolitonSpec:
    name: str
    kind: str  # expanding | steady | shrinking
    chart: ChartMetric
    potential: ScalarField
    lam: float
    origin: np.ndarray
    curvature_class: frozenset
    sample_radius: float
    radial: RadialGeometry | None = None
    product_radial: ProductRadialGeometry | None = None
    profile: WarpedProfile | None = None
    residual_tol: float = 1e-9
    meta: dict = field(default_factory=dict)

    @property
    def dim(self):
        return self.chart.dim

    @property
    def is_flat(self):
        return "flat" in self.curvature_class

    def descriptor(self) -> dict:
        box = getattr(self.chart, "box", None)
        return {
            "name": self.name,
            "dim": self.dim,
            "lambda": self.lam,
            "kind": self.kind,
            "normalization": self.meta.get("normalization"),
            "curvature_class": sorted(self.curvature_class),
            "residual_tol": self.residual_tol,
            "domain_bounds": None
            if box is None
            else {"lo": list(map(float, box[0])), "hi": list(map(float, box[1]))},
        }

    def descriptor_json(self) -> str:
        return json.dumps(self.descriptor(), sort_keys=True)


@dataclass
class HamiltonRecord:
    c: float
    lam: float
    sample_spread: float


def expected_kind(lam: float) -> str:
    if lam < 0:
        return "expanding"
    if lam > 0:
        return "shrinking"
    return "steady"


# ---------------------------------------------------------------------------
# Constructors
# ---------------------------------------------------------------------------


def gaussian(n: int, lam: float = -0.5) -> SolitonSpec:
    """Flat R^n with the quadratic potential f = lam |x|^2 / 2."""
    if n < 2:
        raise CatalogError("dimension must be >= 2")
    chart = DiagonalChart(n, [{} for _ in range(n)], name=f"R^{n}")
    chart.box = (np.full(n, -3.0), np.full(n, 3.0))
    xs = sp.symbols(f"x0:{n}")
    f = SymbolicScalarField(sp.Rational(1, 2) * lam * sum(c**2 for c in xs), xs)
    radial = RadialGeometry(
        n=n,
        r_max=math.inf,
        w=lambda r: np.asarray(r, float),
        f=lambda r: 0.5 * lam * np.asarray(r, float) ** 2,
        scalar=lambda r: np.zeros_like(np.asarray(r, float)),
        chart_point=lambda t: np.array([t] + [0.0] * (n - 1)),
        df=lambda r: lam * np.asarray(r, float),
    )
    return SolitonSpec(
        name=f"gaussian_{n}",
        kind=expected_kind(lam),
        chart=chart,
        potential=f,
        lam=lam,
        origin=np.zeros(n),
        curvature_class=frozenset({"flat", "nonneg_sectional", "nonneg_ricci"}),
        sample_radius=3.0,
        radial=radial,
        residual_tol=1e-12,
        meta={"normalization": 0.0},
    )


def _cigar_chart_and_potential():
    x, y = sp.symbols("x y")
    u = 1 + x**2 + y**2
    chart = ConformalChart(2, 1 / u, (x, y), name="cigar")
    chart.box = (np.array([-10.0, -10.0]), np.array([10.0, 10.0]))
    pot = SymbolicScalarField(-sp.log(u), (x, y))
    return chart, pot


def _cigar_radial(r_max: float = 400.0) -> RadialGeometry:
    # closed forms in the geodesic radius: w = tanh, f = -2 log cosh, R = 4 sech^2;
    # cross-checked against chart quadrature in the tests.
    def logcosh(r):
        r = np.asarray(r, float)
        return r + np.log1p(np.exp(-2.0 * r)) - math.log(2.0)

    return RadialGeometry(
        n=2,
        r_max=r_max,
        w=lambda r: np.tanh(np.asarray(r, float)),
        f=lambda r: -2.0 * logcosh(r),
        scalar=lambda r: 4.0 / np.cosh(np.asarray(r, float)) ** 2,
        chart_point=lambda t: np.array([math.sinh(t), 0.0]),
        df=lambda r: -2.0 * np.tanh(np.asarray(r, float)),
    )


def cigar() -> SolitonSpec:
    """Hamilton's 2-d steady soliton on the fixed chart g = (dx^2+dy^2)/(1+x^2+y^2),
    f = -log(1+x^2+y^2), lam = 0."""
    chart, pot = _cigar_chart_and_potential()
    return SolitonSpec(
        name="cigar",
        kind="steady",
        chart=chart,
        potential=pot,
        lam=0.0,
        origin=np.zeros(2),
        curvature_class=frozenset({"nonneg_sectional", "nonneg_ricci"}),
        sample_radius=5.0,
        radial=_cigar_radial(),
        residual_tol=1e-9,
        meta={"normalization": 4.0},
    )


def cigar_cylinder(n: int) -> SolitonSpec:
    """The product R^{n-2} x Sigma^2 with the cigar potential; the equality
    model for the cubic curvature term (Q vanishes identically)."""
    if n < 3:
        raise CatalogError("cigar cylinder needs dimension >= 3")
    k = n - 2
    flat = DiagonalChart(k, [{} for _ in range(k)], name=f"R^{k}")
    flat.box = (np.full(k, -3.0), np.full(k, 3.0))
    cig_chart, cig_pot = _cigar_chart_and_potential()
    chart = ProductChart(flat, cig_chart, name=f"R^{k} x cigar")
    pot = LiftedScalarField(cig_pot, n, offset=k)
    prod_radial = ProductRadialGeometry(
        flat_dim=k,
        factor=_cigar_radial(),
        chart_point=lambda ell, t: np.concatenate(
            [[ell], np.zeros(k - 1), [math.sinh(t), 0.0]]
        ),
    )
    return SolitonSpec(
        name=f"cigar_cylinder_{n}",
        kind="steady",
        chart=chart,
        potential=pot,
        lam=0.0,
        origin=np.zeros(n),
        curvature_class=frozenset({"nonneg_sectional", "nonneg_ricci"}),
        sample_radius=4.0,
        product_radial=prod_radial,
        residual_tol=1e-9,
        meta={"normalization": 4.0},
    )


def sphere_shrinker(n: int) -> SolitonSpec:
    """Round unit sphere with constant potential; lam = R/n = n-1."""
    if n < 2:
        raise CatalogError("dimension must be >= 2")
    xs = sp.symbols(f"x0:{n}")
    rho2 = sum(c**2 for c in xs)
    chart = ConformalChart(n, 4 / (1 + rho2) ** 2, xs, name=f"S^{n}")
    chart.box = (np.full(n, -2.0), np.full(n, 2.0))
    lam = float(n - 1)
    radial = RadialGeometry(
        n=n,
        r_max=math.pi - 0.15,
        w=lambda r: np.sin(np.asarray(r, float)),
        f=lambda r: np.zeros_like(np.asarray(r, float)),
        scalar=lambda r: np.full_like(np.asarray(r, float), n * (n - 1.0)),
        chart_point=lambda t: np.array([math.tan(t / 2.0)] + [0.0] * (n - 1)),
        df=lambda r: np.zeros_like(np.asarray(r, float)),
    )
    return SolitonSpec(
        name=f"sphere_shrinker_{n}",
        kind="shrinking",
        chart=chart,
        potential=ConstantScalarField(0.0, n),
        lam=lam,
        origin=np.zeros(n),
        curvature_class=frozenset({"nonneg_sectional", "nonneg_ricci", "einstein"}),
        sample_radius=2.4,
        radial=radial,
        residual_tol=1e-9,
        meta={"normalization": float(n * (n - 1))},
    )


def perturbed_control() -> SolitonSpec:
    """Deliberate non-soliton: the cigar metric rescaled by (1 + 0.01 |x|^2)
    while keeping the cigar potential.  Every residual check must fail here."""
    x, y = sp.symbols("x y")
    rho2 = x**2 + y**2
    u = 1 + rho2
    chart = ConformalChart(2, (1 + rho2 / 100) / u, (x, y), name="perturbed cigar")
    chart.box = (np.array([-6.0, -6.0]), np.array([6.0, 6.0]))
    pot = SymbolicScalarField(-sp.log(u), (x, y))
    return SolitonSpec(
        name="perturbed_control",
        kind="steady",
        chart=chart,
        potential=pot,
        lam=0.0,
        origin=np.zeros(2),
        curvature_class=frozenset(),
        sample_radius=3.0,
        residual_tol=math.inf,  # negative control: no tolerance claimed
        meta={"control": True, "normalization": None},
    )


def from_profile(profile: WarpedProfile, name: str | None = None) -> SolitonSpec:
    """Soliton backed by an integrated radial profile.

    Chart: g = dr^2 + w(r)^2 * (round sphere) in polar-style coordinates,
    valid on the annulus [series start, max radius]; derivative access comes
    from the profile's quintic interpolants.
    """
    n = profile.n
    w2 = SquaredFactor(ProfileWarpFactor(profile))
    entries = [{}]
    for j in range(1, n):
        e = {0: w2}
        for i in range(1, j):
            e[i] = sin_squared_factor()
        entries.append(e)
    r_lo = profile.r_min
    r_hi = profile.r_max
    margin = 0.25

    def domain(x):
        if not (r_lo <= x[0] <= r_hi):
            return False
        for i in range(1, n - 1):
            if not (margin < x[i] < math.pi - margin):
                return False
        return True

    chart = DiagonalChart(
        n, entries, name=name or f"warped_{n}d", domain=domain, tier="profile"
    )
    lo = np.array([r_lo] + [margin] * (n - 2) + [0.0])
    hi = np.array([r_hi] + [math.pi - margin] * (n - 2) + [2 * math.pi])
    chart.box = (lo, hi)
    pot = RadialScalarField(ProfilePotentialFactor(profile), n, axis=0)
    lam = profile.lam

    mid = [math.pi / 2.0] * (n - 2)
    radial = RadialGeometry(
        n=n,
        r_max=r_hi,
        w=lambda r: np.asarray(profile.w(r), float),
        f=lambda r: np.asarray(profile.f(r), float),
        scalar=lambda r: np.asarray(profile.scalar_curvature(r), float),
        chart_point=lambda t: np.array([t] + mid + [math.pi]),
        df=lambda r: np.asarray(profile.f(r, 1), float),
    )
    spec_name = name or f"profile_{expected_kind(lam)}_{n}"
    flags = {"nonneg_sectional", "nonneg_ricci"} if profile.normalization > 0 else {"flat"}
    return SolitonSpec(
        name=spec_name,
        kind=expected_kind(lam),
        chart=chart,
        potential=pot,
        lam=lam,
        origin=np.zeros(n),  # formal; the chart itself excludes r < series start
        curvature_class=frozenset(flags),
        sample_radius=min(10.0, r_hi / 4.0),
        radial=radial,
        profile=profile,
        residual_tol=1e-5,
        meta={"normalization": profile.normalization},
    )


@functools.lru_cache(maxsize=8)
def bryant_steady(n: int = 3, normalization: float = 6.0, r_max: float = 400.0) -> SolitonSpec:
    profile = integrate_profile(n, 0.0, normalization, OdeConfig(max_radius=r_max))
    return from_profile(profile, name=f"bryant_steady_{n}")


@functools.lru_cache(maxsize=8)
def bryant_expanding(
    n: int = 3, lam: float = -0.5, normalization: float = 6.0, r_max: float = 450.0
) -> SolitonSpec:
    profile = integrate_profile(n, lam, normalization, OdeConfig(max_radius=r_max))
    return from_profile(profile, name=f"bryant_expanding_{n}")


def make_soliton(name: str, **kwargs) -> SolitonSpec:
    """CLI-facing constructor: 'cigar', 'gaussian_3', 'cigar_cylinder_4',
    'sphere_shrinker_3', 'bryant_steady_3', 'bryant_expanding_3',
    'perturbed_control'."""
    parts = name.split("_")
    if name == "cigar":
        return cigar()
    if name == "perturbed_control":
        return perturbed_control()
    if parts[0] == "gaussian":
        return gaussian(int(parts[1]), **kwargs)
    if name.startswith("cigar_cylinder"):
        return cigar_cylinder(int(parts[-1]))
    if name.startswith("sphere_shrinker"):
        return sphere_shrinker(int(parts[-1]))
    if name.startswith("bryant_steady"):
        return bryant_steady(int(parts[-1]), **kwargs)
    if name.startswith("bryant_expanding"):
        return bryant_expanding(int(parts[-1]), **kwargs)
    raise CatalogError(f"unknown catalog entry '{name}'")


CATALOG_NAMES = (
    "gaussian_3",
    "cigar",
    "cigar_cylinder_3",
    "cigar_cylinder_4",
    "cigar_cylinder_5",
    "sphere_shrinker_3",
    "bryant_steady_3",
    "bryant_expanding_3",
)


# ---------------------------------------------------------------------------
# Sampling
# ---------------------------------------------------------------------------


def sample_points(spec: SolitonSpec, m: int, rng: np.random.Generator, r_cap=None):
    """Deterministic well-spread valid points for one entry."""
    r_cap = r_cap if r_cap is not None else spec.sample_radius
    pts = []
    for _ in range(m):
        pts.append(_sample_one(spec, rng, r_cap))
    return pts


def _sample_one(spec, rng, r_cap):
    chart = spec.chart
    if spec.product_radial is not None:
        k = spec.product_radial.flat_dim
        flat = rng.uniform(-r_cap / 2, r_cap / 2, size=k)
        t = rng.uniform(0.1, r_cap)
        ang = rng.uniform(0.0, 2 * math.pi)
        rho = math.sinh(t)
        return np.concatenate([flat, [rho * math.cos(ang), rho * math.sin(ang)]])
    if spec.profile is not None:
        n = chart.dim
        r = rng.uniform(max(0.3, chart.box[0][0]), r_cap)
        angles = [rng.uniform(0.7, math.pi - 0.7) for _ in range(n - 2)]
        return np.array([r] + angles + [rng.uniform(0.3, 5.9)])
    if spec.name.startswith("gaussian"):
        return rng.uniform(-r_cap, r_cap, size=chart.dim) * (1.0 / math.sqrt(chart.dim))
    if spec.name.startswith("sphere"):
        t = rng.uniform(0.1, min(r_cap, 2.6))
        v = rng.normal(size=chart.dim)
        v /= np.linalg.norm(v)
        return math.tan(t / 2.0) * v
    # conformal 2-d entries (cigar, perturbed control)
    t = rng.uniform(0.1, r_cap)
    ang = rng.uniform(0.0, 2 * math.pi)
    rho = math.sinh(t) if spec.name != "perturbed_control" else t
    return np.array([rho * math.cos(ang), rho * math.sin(ang)])


# ---------------------------------------------------------------------------
# Structural validators
# ---------------------------------------------------------------------------


def soliton_residual(spec: SolitonSpec, p) -> float:
    """|Ric + Hess f - lam g| in the metric norm at one point."""
    b = curvature.curvature_bundle(spec.chart, p)
    hess, _, _ = curvature.hessian_grad(spec.chart, spec.potential, p, bundle=b)
    T = b.ricci + hess - spec.lam * b.g
    return math.sqrt(max(curvature.tensor_norm2(b.g_inv, T, 2), 0.0))


def trace_identity_residual(spec: SolitonSpec, p) -> float:
    """|R + Delta f - n lam| at one point."""
    b = curvature.curvature_bundle(spec.chart, p)
    lap = curvature.laplacian_scalar_exact(spec.chart, spec.potential, p, bundle=b)
    return abs(b.scalar + lap - spec.dim * spec.lam)


def hamilton_constant(spec: SolitonSpec, points) -> HamiltonRecord:
    """Mean and spread of R + |grad f|^2 - 2 lam f over sample points."""
    if len(points) < 2:
        raise CatalogError("need at least two sample points")
    vals = []
    for p in points:
        b = curvature.curvature_bundle(spec.chart, p)
        _, _, grad_sq = curvature.hessian_grad(spec.chart, spec.potential, p, bundle=b)
        vals.append(b.scalar + grad_sq - 2.0 * spec.lam * spec.potential.value(p))
    vals = np.asarray(vals)
    c = float(np.mean(vals))
    return HamiltonRecord(c=c, lam=spec.lam, sample_spread=float(np.max(np.abs(vals - c))))


def pinching_alpha(spec: SolitonSpec, points) -> float:
    """max |Rm| / R over the sample; defined only where R > 0."""
    worst = 0.0
    for p in points:
        b = curvature.curvature_bundle(spec.chart, p)
        if b.scalar < 1e-12:
            raise FlatSolitonError("flat: pinching undefined")
        rm_norm = math.sqrt(max(curvature.tensor_norm2(b.g_inv, b.riemann, 4), 0.0))
        worst = max(worst, rm_norm / b.scalar)
    return worst


def ricci_eigenvalues(spec: SolitonSpec, p) -> np.ndarray:
    """Eigenvalues of Ric relative to g (ascending)."""
    import scipy.linalg

    b = curvature.curvature_bundle(spec.chart, p)
    return scipy.linalg.eigh(b.ricci, b.g, eigvals_only=True)


def min_sectional(spec: SolitonSpec, p, rng: np.random.Generator, planes: int = 6) -> float:
    """Smallest sectional curvature over frame planes plus random planes."""
    b = curvature.curvature_bundle(spec.chart, p)
    sig = curvature.sectional_matrix(b)
    n = spec.dim
    vals = [sig[i, j] for i in range(n) for j in range(i + 1, n)]
    for _ in range(planes):
        u = rng.normal(size=n)
        v = rng.normal(size=n)
        try:
            vals.append(curvature.sectional(spec.chart, p, u, v, bundle=b))
        except curvature.DegeneratePlaneError:
            continue
    return float(min(vals))


def potential_quadratic_fit(spec: SolitonSpec) -> dict:
    """Least-squares fit -f(r) ~ alpha r^2 + beta r + gamma on radial data.

    On expanding entries with nonnegative Ricci the leading coefficient must
    approach -lam/2 (the potential is trapped between two quadratics, hence
    proper); the relative deviation is reported.
    """
    if spec.radial is None:
        raise CatalogError(f"'{spec.name}' has no radial reduction")
    r_hi = min(spec.radial.r_max, 1e6)
    if not math.isfinite(spec.radial.r_max):
        r_hi = 60.0
    r = np.linspace(0.3 * r_hi, 0.98 * r_hi, 200)
    y = -spec.radial.f(r)
    A = np.stack([r**2, r, np.ones_like(r)], axis=1)
    coef, *_ = np.linalg.lstsq(A, y, rcond=None)
    alpha = float(coef[0])
    target = -spec.lam / 2.0
    rel = abs(alpha - target) / abs(target) if target != 0 else math.inf
    return {"alpha": alpha, "target": target, "rel_dev": rel, "window": (float(r[0]), float(r[-1]))}


def geodesic_radius_via_quadrature(chart: ConformalChart, rho: float) -> float:
    """Geodesic radius of the chart point (rho, 0, ...) by 1-d quadrature of
    the radial metric coefficient sqrt(phi)."""
    n = chart.dim

    def rhs(s, _y):
        p = np.zeros(n)
        p[0] = s
        return [math.sqrt(float(chart.conformal_factor(p)))]

    sol = solve_ivp(rhs, (0.0, rho), [0.0], rtol=1e-12, atol=1e-14)
    return float(sol.y[0, -1])


def validate_spec(spec: SolitonSpec, n_points: int, seed: int = 0, r_cap=None) -> dict:
    """Run every structural invariant of an entry; returns named residuals."""
    rng = np.random.default_rng(seed)
    pts = sample_points(spec, n_points, rng, r_cap=r_cap)
    residuals = [soliton_residual(spec, p) for p in pts]
    traces = [trace_identity_residual(spec, p) for p in pts]
    out = {
        "kind_matches_lambda": spec.kind == expected_kind(spec.lam),
        "max_residual": float(np.max(residuals)),
        "max_trace_residual": float(np.max(traces)),
    }
    if spec.kind == "steady":
        ham = hamilton_constant(spec, pts)
        out["hamilton_c"] = ham.c
        out["hamilton_spread"] = ham.sample_spread
    if "nonneg_sectional" in spec.curvature_class and not spec.is_flat:
        out["min_sectional"] = min(min_sectional(spec, p, rng) for p in pts)
    if "nonneg_ricci" in spec.curvature_class:
        out["min_ricci_eig"] = float(min(ricci_eigenvalues(spec, p)[0] for p in pts))
    return out
