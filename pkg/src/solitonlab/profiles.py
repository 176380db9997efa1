"""Rotationally symmetric soliton profiles by ODE integration.

The metric ansatz is g = dr^2 + w(r)^2 g_{S^{n-1}} with a radial potential
f(r).  The soliton equation reduces to

    f'' - (n-1) w''/w = lam                     (radial direction)
    f' w'/w - w''/w + (n-2)(1 - w'^2)/w^2 = lam (spherical directions)

solved for (w'', f'').  The origin r = 0 is a coordinate singularity; the
integration starts from a degree-5 Taylor expansion matched to the smooth
closure conditions w(0) = 0, w'(0) = 1, w''(0) = 0, f'(0) = 0.  The free
parameter pinning the one-parameter family is the scalar curvature at the
origin.

Steady (lam = 0) and expanding (lam < 0) branches with a positive curvature
seed produce the Bryant-type solitons whose decay/growth exponents the
asymptotics fitter extracts.
"""

from __future__ import annotations

import io
import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import cumulative_trapezoid, solve_ivp
from scipy.interpolate import make_interp_spline
from scipy.stats import linregress

from .charts import Factor


class ProfileError(ValueError):
    pass


@dataclass
class OdeConfig:
    series_start_radius: float = 1e-3
    rtol: float = 1e-10
    atol: float = 1e-12
    max_radius: float = 200.0
    max_step: float = np.inf

    def __post_init__(self):
        if self.series_start_radius <= 0:
            raise ProfileError("series start radius must be positive")
        if self.rtol <= 0 or self.atol <= 0:
            raise ProfileError("tolerances must be positive")


def soliton_ode_rhs(n: int, lam: float, state):
    """(w'', f'') from (w, w', f').  Requires w > 0."""
    w, wp, fp = state
    if w <= 0:
        raise ProfileError("coordinate singularity: w <= 0")
    wpp = fp * wp + (n - 2) * (1.0 - wp * wp) / w - lam * w
    fpp = lam + (n - 1) * wpp / w
    return wpp, fpp


def taylor_coefficients(n: int, lam: float, kappa0: float):
    """Degree-5 (w) / degree-4 (f) Taylor coefficients at the origin.

    w = r + a3 r^3 + a5 r^5, f = b2 r^2 + b4 r^4, with the origin sectional
    curvature kappa0 as the free parameter.
    """
    a3 = -kappa0 / 6.0
    b2 = (lam - (n - 1) * kappa0) / 2.0
    a5 = 0.3 * a3 * a3 + 6.0 * a3 * b2 / (5.0 * (n + 2))
    b4 = (n - 1) * (10.0 * a5 - 3.0 * a3 * a3) / 6.0
    return a3, a5, b2, b4


def _series_state(n, lam, kappa0, eps):
    a3, a5, b2, b4 = taylor_coefficients(n, lam, kappa0)
    w = eps + a3 * eps**3 + a5 * eps**5
    wp = 1.0 + 3 * a3 * eps**2 + 5 * a5 * eps**4
    f = b2 * eps**2 + b4 * eps**4
    fp = 2 * b2 * eps + 4 * b4 * eps**3
    return np.array([w, wp, f, fp])


def _graded_grid(eps, r_max):
    """Radial grid, dense near the origin and geometric outward."""
    pieces = [np.linspace(eps, min(1.0, r_max), 200)]
    if r_max > 1.0:
        pieces.append(np.linspace(1.0, min(5.0, r_max), 220)[1:])
    if r_max > 5.0:
        pieces.append(np.linspace(5.0, min(20.0, r_max), 170)[1:])
    if r_max > 20.0:
        r = 20.0
        tail = []
        while r < r_max:
            r = min(r * 1.02, r_max)
            tail.append(r)
        pieces.append(np.array(tail))
    return np.concatenate(pieces)


@dataclass
class WarpedProfile:
    """Integrated radial data with smooth (quintic-spline) interpolants."""

    n: int
    lam: float
    normalization: float  # scalar curvature at the origin
    grid: np.ndarray
    w_vals: np.ndarray
    wp_vals: np.ndarray
    f_vals: np.ndarray
    fp_vals: np.ndarray
    config: OdeConfig
    w_funcs: tuple | None = None  # optional closed forms (value, d1, d2, d3)
    f_funcs: tuple | None = None
    _wspl: list = field(default_factory=list, repr=False)
    _fspl: list = field(default_factory=list, repr=False)

    def __post_init__(self):
        if np.any(np.diff(self.grid) <= 0):
            raise ProfileError("grid radii must be strictly increasing")
        if np.any(self.w_vals <= 0):
            raise ProfileError("w must stay positive on the grid")
        if self.w_funcs is None:
            w0 = make_interp_spline(self.grid, self.w_vals, k=5)
            self._wspl = [w0] + [w0.derivative(m) for m in (1, 2, 3)]
        if self.f_funcs is None:
            f0 = make_interp_spline(self.grid, self.f_vals, k=5)
            self._fspl = [f0] + [f0.derivative(m) for m in (1, 2, 3)]

    # -- accessors ---------------------------------------------------------

    def w(self, r, der=0):
        if self.w_funcs is not None:
            return self.w_funcs[der](np.asarray(r, float))
        return self._wspl[der](r)

    def f(self, r, der=0):
        if self.f_funcs is not None:
            return self.f_funcs[der](np.asarray(r, float))
        return self._fspl[der](r)

    @property
    def closed_form(self):
        return self.w_funcs is not None

    @property
    def r_max(self):
        return float(self.grid[-1])

    @property
    def r_min(self):
        return float(self.grid[0])

    @property
    def kappa0(self):
        return self.normalization / (self.n * (self.n - 1))

    @property
    def curvature_scale(self):
        return 1.0 / math.sqrt(max(abs(self.kappa0), 1e-300))

    def sectional(self, r):
        """(radial, spherical) sectional curvatures at radius r."""
        w, wp, wpp = self.w(r), self.w(r, 1), self.w(r, 2)
        return -wpp / w, (1.0 - wp * wp) / (w * w)

    def scalar_curvature(self, r):
        k_rad, k_sph = self.sectional(r)
        n = self.n
        return 2 * (n - 1) * k_rad + (n - 1) * (n - 2) * k_sph

    def hamilton_quantity(self, r):
        """R + |grad f|^2 - 2 lam f; constant on an exact soliton."""
        fp = self.f(r, 1)
        return self.scalar_curvature(r) + fp * fp - 2.0 * self.lam * self.f(r)

    def volume_within(self, r_values):
        """Vol(B_r) at grid radii by cumulative quadrature of w^{n-1}."""
        r_values = np.asarray(r_values, float)
        omega = sphere_area(self.n - 1)
        integrand = self.w(r_values) ** (self.n - 1)
        vol = cumulative_trapezoid(integrand, r_values, initial=0.0)
        return omega * vol

    # -- serialization ------------------------------------------------------

    def to_csv(self) -> str:
        head = {
            "n": self.n,
            "lam": self.lam,
            "normalization": self.normalization,
            "rtol": self.config.rtol,
            "atol": self.config.atol,
            "series_start_radius": self.config.series_start_radius,
            "max_radius": self.config.max_radius,
        }
        buf = io.StringIO()
        buf.write("# " + json.dumps(head, sort_keys=True) + "\n")
        buf.write("r,w,wp,f,fp,R\n")
        R = self.scalar_curvature(self.grid)
        for k in range(self.grid.size):
            row = (
                self.grid[k],
                self.w_vals[k],
                self.wp_vals[k],
                self.f_vals[k],
                self.fp_vals[k],
                R[k],
            )
            buf.write(",".join(repr(float(v)) for v in row) + "\n")
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "WarpedProfile":
        lines = text.strip().splitlines()
        head = json.loads(lines[0].lstrip("# "))
        rows = np.array(
            [[float(tok) for tok in line.split(",")] for line in lines[2:]]
        )
        cfg = OdeConfig(
            series_start_radius=head["series_start_radius"],
            rtol=head["rtol"],
            atol=head["atol"],
            max_radius=head["max_radius"],
        )
        return cls(
            n=head["n"],
            lam=head["lam"],
            normalization=head["normalization"],
            grid=rows[:, 0],
            w_vals=rows[:, 1],
            wp_vals=rows[:, 2],
            f_vals=rows[:, 3],
            fp_vals=rows[:, 4],
            config=cfg,
        )


def sphere_area(k: int) -> float:
    """Area of the unit k-sphere (k = n-1 for the warped fiber)."""
    return 2.0 * math.pi ** ((k + 1) / 2.0) / math.gamma((k + 1) / 2.0)


def integrate_profile(n: int, lam: float, normalization: float, cfg: OdeConfig | None = None):
    """Integrate the warped soliton system out to cfg.max_radius.

    ``normalization`` is the scalar curvature at the origin (>= 0; zero
    selects the flat/Gaussian branch exactly).
    """
    if n < 2:
        raise ProfileError("dimension must be >= 2")
    if normalization < 0:
        raise ProfileError("normalization (origin scalar curvature) must be >= 0")
    cfg = cfg or OdeConfig()
    eps = cfg.series_start_radius
    kappa0 = normalization / (n * (n - 1))
    y0 = _series_state(n, lam, kappa0, eps)

    def rhs(r, y):
        w, wp, f, fp = y
        wpp, fpp = soliton_ode_rhs(n, lam, (w, wp, fp))
        return [wp, wpp, fp, fpp]

    def blow_up(r, y):
        return y[0]

    blow_up.terminal = True
    blow_up.direction = -1

    sol = solve_ivp(
        rhs,
        (eps, cfg.max_radius),
        y0,
        method="DOP853",
        rtol=cfg.rtol,
        atol=cfg.atol,
        max_step=cfg.max_step,
        dense_output=True,
        events=blow_up,
    )
    if not sol.success or sol.t[-1] < cfg.max_radius * (1 - 1e-9):
        raise ProfileError(
            f"integration stopped at r={sol.t[-1]:.3g} before max radius {cfg.max_radius}"
        )
    grid = _graded_grid(eps, cfg.max_radius)
    vals = sol.sol(grid)
    return WarpedProfile(
        n=n,
        lam=lam,
        normalization=normalization,
        grid=grid,
        w_vals=vals[0],
        wp_vals=vals[1],
        f_vals=vals[2],
        fp_vals=vals[3],
        config=cfg,
    )


def cigar_profile(r_max: float = 300.0) -> WarpedProfile:
    """The 2-d steady soliton in geodesic polar form, from closed forms:
    w = tanh r, f = -2 log cosh r (so R = 4 / cosh^2 r, R + |grad f|^2 = 4).

    tanh saturates to 1.0 in double precision near r ~ 20, so splines cannot
    resolve the exponential curvature tail; the accessors therefore use the
    closed forms directly (sech^2 stays representable out to r ~ 350).
    """
    cfg = OdeConfig(max_radius=r_max)
    grid = _graded_grid(cfg.series_start_radius, r_max)

    def sech2(r):
        return 1.0 / np.cosh(np.asarray(r, float)) ** 2

    def logcosh(r):
        r = np.asarray(r, float)
        return r + np.log1p(np.exp(-2.0 * r)) - math.log(2.0)

    w_funcs = (
        lambda r: np.tanh(r),
        sech2,
        lambda r: -2.0 * sech2(r) * np.tanh(r),
        lambda r: sech2(r) * (4.0 * np.tanh(r) ** 2 - 2.0 * sech2(r)),
    )
    f_funcs = (
        lambda r: -2.0 * logcosh(r),
        lambda r: -2.0 * np.tanh(r),
        lambda r: -2.0 * sech2(r),
        lambda r: 4.0 * sech2(r) * np.tanh(r),
    )
    return WarpedProfile(
        n=2,
        lam=0.0,
        normalization=4.0,
        grid=grid,
        w_vals=w_funcs[0](grid),
        wp_vals=w_funcs[1](grid),
        f_vals=f_funcs[0](grid),
        fp_vals=f_funcs[1](grid),
        config=cfg,
        w_funcs=w_funcs,
        f_funcs=f_funcs,
    )


# ---------------------------------------------------------------------------
# Asymptotics
# ---------------------------------------------------------------------------


@dataclass
class ExponentFit:
    curvature_decay: float        # R ~ r^{-a}
    volume_growth: float          # Vol(B_r) ~ r^{b}
    potential_growth: float       # -f ~ r^{c}
    decay_stderr: float
    volume_stderr: float
    potential_stderr: float
    decay_residual: float
    curvature_decay_exponential: bool
    window: tuple

    def as_dict(self):
        return {
            "curvature_decay": self.curvature_decay,
            "volume_growth": self.volume_growth,
            "potential_growth": self.potential_growth,
            "decay_stderr": self.decay_stderr,
            "volume_stderr": self.volume_stderr,
            "potential_stderr": self.potential_stderr,
            "decay_residual": self.decay_residual,
            "curvature_decay_exponential": self.curvature_decay_exponential,
            "window": list(self.window),
        }


def _loglog_fit(r, y):
    res = linregress(np.log(r), np.log(y))
    pred = res.intercept + res.slope * np.log(r)
    rms = float(np.sqrt(np.mean((np.log(y) - pred) ** 2)))
    return float(res.slope), float(res.stderr), rms


def asymptotic_exponents(profile: WarpedProfile) -> ExponentFit:
    """Log-log least-squares exponents over the outer radius decade.

    The fit window is [r_max/10, r_max], excluding the first ten curvature
    scales; a profile shorter than 100 curvature scales is rejected.  If the
    scalar curvature is better described by an exponential law the power fit
    is flagged as rejected.
    """
    r_max = profile.r_max
    scale = profile.curvature_scale
    if r_max < 100.0 * scale:
        raise ProfileError(
            f"insufficient range: max radius {r_max:.3g} < 100 curvature scales"
        )
    lo = max(r_max / 10.0, 10.0 * scale)
    mask = (profile.grid >= lo) & (profile.grid <= r_max)
    r = profile.grid[mask]
    if r.size < 16:
        raise ProfileError("insufficient range: too few grid nodes in the fit window")

    R = profile.scalar_curvature(r)
    if np.any(R <= 0) or np.any(np.diff(R) >= 0):
        nonmono = np.any(R <= 0)
        if nonmono:
            raise ProfileError("non-monotone data: curvature not positive on the window")
    slope_R, err_R, rms_pow = _loglog_fit(r, R)

    # exponential alternative: log R linear in r
    res_exp = linregress(r, np.log(R))
    pred = res_exp.intercept + res_exp.slope * r
    rms_exp = float(np.sqrt(np.mean((np.log(R) - pred) ** 2)))
    exponential = rms_exp < 0.1 * rms_pow

    vol = profile.volume_within(profile.grid)[mask]
    slope_V, err_V, _ = _loglog_fit(r, vol)

    minus_f = -profile.f(r)
    if np.any(minus_f <= 0):
        slope_f, err_f = float("nan"), float("nan")
    else:
        slope_f, err_f, _ = _loglog_fit(r, minus_f)

    return ExponentFit(
        curvature_decay=-slope_R,
        volume_growth=slope_V,
        potential_growth=slope_f,
        decay_stderr=err_R,
        volume_stderr=err_V,
        potential_stderr=err_f,
        decay_residual=rms_pow,
        curvature_decay_exponential=exponential,
        window=(float(lo), float(r_max)),
    )


# ---------------------------------------------------------------------------
# Factors feeding profile data into warped charts
# ---------------------------------------------------------------------------


class ProfileWarpFactor(Factor):
    """w(r) of a profile as a univariate factor with three derivatives."""

    def __init__(self, profile: WarpedProfile):
        self.profile = profile

    def __call__(self, t, der=0):
        return float(self.profile.w(t, der))


class ProfilePotentialFactor(Factor):
    def __init__(self, profile: WarpedProfile):
        self.profile = profile

    def __call__(self, t, der=0):
        return float(self.profile.f(t, der))


def to_soliton(profile: WarpedProfile):
    """Wrap the profile as a catalog soliton (chart + potential + lam)."""
    from .catalog import from_profile

    return from_profile(profile)
