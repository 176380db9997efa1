"""Chart-based curvature calculus.

Conventions (fixed package-wide):

* Christoffel symbols Gamma[k, i, j] = Gamma^k_ij.
* Riemann (1,3): R^r_{s m n} = d_m Gamma^r_{n s} - d_n Gamma^r_{m s}
  + Gamma^r_{m l} Gamma^l_{n s} - Gamma^r_{n l} Gamma^l_{m s}.
* Lowered tensor rm[i, j, k, l] = g_ia R^a_{jkl}; with this ordering
  rm[i, j, i, j] is the sectional curvature of the orthonormal plane (e_i, e_j)
  and the round sphere comes out positively curved.
* Ricci ric[i, j] = R^a_{i a j}; scalar = g^{ij} ric_ij.
* Covariant derivatives put the derivative index first:
  (cov_deriv T)[k, ...] = nabla_k T_...

Tensor norms and traces always use the metric at the evaluation point.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import fd
from .charts import (
    ChartMetric,
    ScalarField,
    check_positive_definite,
    orthonormal_frame,
)


class DegeneratePlaneError(ValueError):
    """The two vectors handed to `sectional` do not span a plane."""


@dataclass(frozen=True)
class CurvatureBundle:
    """All pointwise curvature data of a chart at one point."""

    point: np.ndarray
    g: np.ndarray
    g_inv: np.ndarray
    christoffel: np.ndarray      # [k, i, j]
    dchristoffel: np.ndarray     # [l, k, i, j] = d_l Gamma^k_ij
    riemann_up: np.ndarray       # [r, s, m, n]
    riemann: np.ndarray          # lowered [i, j, k, l]
    ricci: np.ndarray
    scalar: float
    frame: np.ndarray = field(repr=False)  # rows = orthonormal frame vectors


def christoffel(chart: ChartMetric, x) -> np.ndarray:
    """Levi-Civita connection coefficients Gamma^k_ij at a point."""
    p = chart.check_point(x)
    g = chart.metric(p)
    check_positive_definite(g, name=f"metric of '{chart.name}'")
    g_inv = np.linalg.inv(g)
    d1 = chart.metric_d1(p)
    return _christoffel_from(g_inv, d1)


def _christoffel_from(g_inv, d1):
    # B[m,i,j] = d_i g_mj + d_j g_mi - d_m g_ij
    B = np.einsum("imj->mij", d1) + np.einsum("jmi->mij", d1) - d1
    return 0.5 * np.einsum("km,mij->kij", g_inv, B)


def _dchristoffel_from(g_inv, d1, d2):
    B = np.einsum("imj->mij", d1) + np.einsum("jmi->mij", d1) - d1
    dB = (
        np.einsum("limj->lmij", d2)
        + np.einsum("ljmi->lmij", d2)
        - np.einsum("lmij->lmij", d2)
    )
    dg_inv = -np.einsum("ka,lab,bm->lkm", g_inv, d1, g_inv)
    return 0.5 * (
        np.einsum("lkm,mij->lkij", dg_inv, B) + np.einsum("km,lmij->lkij", g_inv, dB)
    )


def curvature_bundle(chart: ChartMetric, x) -> CurvatureBundle:
    """Connection, Riemann, Ricci and scalar curvature at one point."""
    p = chart.check_point(x)
    g = chart.metric(p)
    check_positive_definite(g, name=f"metric of '{chart.name}'")
    g_inv = np.linalg.inv(g)
    d1 = chart.metric_d1(p)
    d2 = chart.metric_d2(p)
    gamma = _christoffel_from(g_inv, d1)
    dgamma = _dchristoffel_from(g_inv, d1, d2)
    # R^r_{smn} = d_m Gamma^r_{ns} - d_n Gamma^r_{ms} + Gamma^r_{ml}Gamma^l_{ns}
    #             - Gamma^r_{nl}Gamma^l_{ms}
    r_up = (
        np.einsum("mrns->rsmn", dgamma)
        - np.einsum("nrms->rsmn", dgamma)
        + np.einsum("rml,lns->rsmn", gamma, gamma)
        - np.einsum("rnl,lms->rsmn", gamma, gamma)
    )
    rm = np.einsum("ia,ajkl->ijkl", g, r_up)
    ric = np.einsum("asan->sn", r_up)
    scal = float(np.einsum("ij,ij->", g_inv, ric))
    return CurvatureBundle(
        point=p,
        g=g,
        g_inv=g_inv,
        christoffel=gamma,
        dchristoffel=dgamma,
        riemann_up=r_up,
        riemann=rm,
        ricci=ric,
        scalar=scal,
        frame=orthonormal_frame(g),
    )


def bundle_invariant_errors(b: CurvatureBundle) -> dict:
    """Residuals of the algebraic Riemann symmetries and traces."""
    rm = b.riemann
    scale = max(1.0, float(np.max(np.abs(rm))))
    errs = {
        "antisym_first_pair": float(np.max(np.abs(rm + np.einsum("jikl->ijkl", rm)))),
        "antisym_last_pair": float(np.max(np.abs(rm + np.einsum("ijlk->ijkl", rm)))),
        "pair_symmetry": float(np.max(np.abs(rm - np.einsum("klij->ijkl", rm)))),
        "first_bianchi": float(
            np.max(
                np.abs(
                    rm + np.einsum("iklj->ijkl", rm) + np.einsum("iljk->ijkl", rm)
                )
            )
        ),
        "ricci_trace": float(
            np.max(np.abs(np.einsum("ij,ikjl->kl", b.g_inv, rm) - b.ricci))
        ),
        "scalar_trace": abs(float(np.einsum("ij,ij->", b.g_inv, b.ricci)) - b.scalar),
    }
    return {k: v / scale for k, v in errs.items()}


def sectional(chart: ChartMetric, x, u, v, bundle: CurvatureBundle | None = None) -> float:
    """Sectional curvature of the plane spanned by tangent vectors u, v."""
    b = bundle or curvature_bundle(chart, x)
    u = np.asarray(u, float)
    v = np.asarray(v, float)
    uu = float(u @ b.g @ u)
    vv = float(v @ b.g @ v)
    uv = float(u @ b.g @ v)
    gram = uu * vv - uv * uv
    if gram <= 1e-12 * max(uu * vv, 1e-300):
        raise DegeneratePlaneError("vectors do not span a nondegenerate 2-plane")
    num = float(np.einsum("ijkl,i,j,k,l->", b.riemann, u, v, u, v))
    return num / gram


def sectional_matrix(b: CurvatureBundle) -> np.ndarray:
    """Sectional curvatures of all orthonormal-frame coordinate planes."""
    rm_f = np.einsum("ai,bj,ck,dl,ijkl->abcd", b.frame, b.frame, b.frame, b.frame, b.riemann)
    n = b.g.shape[0]
    sig = np.zeros((n, n))
    for i in range(n):
        for j in range(n):
            if i != j:
                sig[i, j] = rm_f[i, j, i, j]
    return sig


# ---------------------------------------------------------------------------
# Tensor fields and covariant derivatives
# ---------------------------------------------------------------------------


class TensorField:
    """Fully covariant tensor field with (at least) first partials."""

    rank: int

    def eval(self, x) -> np.ndarray:
        raise NotImplementedError

    def partial(self, x) -> np.ndarray:  # [k, ...]
        raise NotImplementedError

    def partial2(self, x) -> np.ndarray:  # [k, l, ...]
        raise NotImplementedError


class NumericTensorField(TensorField):
    """Wraps a pointwise-computable tensor; partials by finite differences.

    This is the independence mechanism of the identity checks: curvature
    fields are differentiated numerically, never by hand-expanded product
    rules, so both sides of an identity come from separate code paths.
    """

    def __init__(self, func, rank, chart: ChartMetric):
        self.func = func
        self.rank = rank
        self._h1 = chart.fd_base("first")
        self._h2 = chart.fd_base("second")

    def eval(self, x):
        return np.asarray(self.func(x), float)

    def partial(self, x):
        return fd.gradient(self.func, x, base=self._h1, richardson=True)

    def partial2(self, x):
        return fd.hessian(self.func, x, base=self._h2)


class ScalarAsTensorField(TensorField):
    """Adapter: an exact ScalarField as a rank-0 TensorField."""

    rank = 0

    def __init__(self, f: ScalarField):
        self.f = f

    def eval(self, x):
        return np.asarray(self.f.value(x), float)

    def partial(self, x):
        return self.f.grad(x)

    def partial2(self, x):
        return self.f.hess(x)


class MetricTensorField(TensorField):
    rank = 2

    def __init__(self, chart: ChartMetric):
        self.chart = chart

    def eval(self, x):
        return self.chart.metric(x)

    def partial(self, x):
        return self.chart.metric_d1(x)

    def partial2(self, x):
        return self.chart.metric_d2(x)


def _gamma_terms(gamma, T, rank):
    """sum_a Gamma^m_{k i_a} T_{.. m ..} with the derivative slot leading."""
    if rank == 0:
        return 0.0
    if rank == 1:
        return np.einsum("mki,m->ki", gamma, T)
    if rank == 2:
        return np.einsum("mki,mj->kij", gamma, T) + np.einsum("mkj,im->kij", gamma, T)
    if rank == 3:
        return (
            np.einsum("mka,mij->kaij", gamma, T)
            + np.einsum("mki,amj->kaij", gamma, T)
            + np.einsum("mkj,aim->kaij", gamma, T)
        )
    raise ValueError("covariant derivative implemented for rank <= 3")


def cov_deriv(chart: ChartMetric, field_like, x, bundle: CurvatureBundle | None = None):
    """Covariant derivative of a covariant tensor field of rank <= 2.

    Returns components with the new (derivative) index first.
    """
    f = _as_field(field_like, chart)
    b = bundle or curvature_bundle(chart, x)
    dT = f.partial(x)
    return dT - _gamma_terms(b.christoffel, f.eval(x), f.rank)


def second_cov_deriv(chart: ChartMetric, field_like, x, bundle: CurvatureBundle | None = None):
    """(nabla^2 T)[k, l, ...] for a covariant field of rank <= 2.

    Assembled from exact connection data and finite-difference partials of
    the field; the first-derivative layer is reused so the two derivative
    indices are treated symmetrically up to curvature terms.
    """
    f = _as_field(field_like, chart)
    b = bundle or curvature_bundle(chart, x)
    p = b.point
    T = f.eval(p)
    dT = f.partial(p)
    d2T = f.partial2(p)
    gamma, dgamma = b.christoffel, b.dchristoffel
    rank = f.rank
    # nabla T with derivative index first
    nabla = dT - _gamma_terms(gamma, T, rank)
    # d_k (nabla_l T_I) = d2T[k,l,I] - sum_a [ dGamma[k,m,l,ia] T + Gamma^m_{l ia} dT[k,..] ]
    if rank == 0:
        d_nabla = d2T
    elif rank == 1:
        d_nabla = (
            d2T
            - np.einsum("kmli,m->kli", dgamma, T)
            - np.einsum("mli,km->kli", gamma, dT)
        )
    elif rank == 2:
        d_nabla = (
            d2T
            - np.einsum("kmli,mj->klij", dgamma, T)
            - np.einsum("kmlj,im->klij", dgamma, T)
            - np.einsum("mli,kmj->klij", gamma, dT)
            - np.einsum("mlj,kim->klij", gamma, dT)
        )
    else:
        raise ValueError("second covariant derivative implemented for rank <= 2")
    # correct the outer derivative: subtract Gamma terms for the l-slot and
    # for each original slot, acting on nabla T (rank+1).
    return d_nabla - _gamma_terms(gamma, nabla, rank + 1)


def rough_laplacian(chart, field_like, x, bundle=None):
    b = bundle or curvature_bundle(chart, x)
    dd = second_cov_deriv(chart, field_like, x, bundle=b)
    return np.einsum("kl,kl...->...", b.g_inv, dd)


def drift_laplacian(chart, field_like, X, x, bundle=None):
    """Delta_X T = Delta T - nabla_X T for a vector field X (up components).

    With X = 0 this is the rough Laplacian; the operator is linear in the
    field.  X may be an array (the vector at the point) or a callable.
    """
    b = bundle or curvature_bundle(chart, x)
    Xv = np.asarray(X(x) if callable(X) else X, float)
    lap = rough_laplacian(chart, field_like, x, bundle=b)
    nabla = cov_deriv(chart, field_like, x, bundle=b)
    return lap - np.einsum("k,k...->...", Xv, nabla)


def _as_field(field_like, chart) -> TensorField:
    if isinstance(field_like, TensorField):
        return field_like
    if isinstance(field_like, ScalarField):
        return ScalarAsTensorField(field_like)
    raise TypeError("expected a TensorField or ScalarField")


# ---------------------------------------------------------------------------
# Potentials: Hessian, gradient, drift data
# ---------------------------------------------------------------------------


def hessian_grad(chart: ChartMetric, f: ScalarField, x, bundle: CurvatureBundle | None = None):
    """(Hess f, grad f with the index up, |grad f|^2) at a point."""
    b = bundle or curvature_bundle(chart, x)
    df = f.grad(b.point)
    hess = f.hess(b.point) - np.einsum("kij,k->ij", b.christoffel, df)
    grad_up = b.g_inv @ df
    grad_sq = float(df @ b.g_inv @ df)
    return hess, grad_up, grad_sq


def laplacian_scalar_exact(chart, f: ScalarField, x, bundle=None) -> float:
    b = bundle or curvature_bundle(chart, x)
    hess, _, _ = hessian_grad(chart, f, x, bundle=b)
    return float(np.einsum("ij,ij->", b.g_inv, hess))


def tensor_norm2(g_inv: np.ndarray, T: np.ndarray, rank: int) -> float:
    """|T|^2 with every index raised by the metric."""
    if rank == 0:
        return float(T) ** 2
    if rank == 1:
        return float(np.einsum("ij,i,j->", g_inv, T, T))
    if rank == 2:
        return float(np.einsum("ia,jb,ij,ab->", g_inv, g_inv, T, T))
    if rank == 3:
        return float(np.einsum("ia,jb,kc,ijk,abc->", g_inv, g_inv, g_inv, T, T))
    if rank == 4:
        return float(
            np.einsum("ia,jb,kc,ld,ijkl,abcd->", g_inv, g_inv, g_inv, g_inv, T, T)
        )
    raise ValueError("rank must be 0..4")


def ricci_field(chart: ChartMetric) -> NumericTensorField:
    return NumericTensorField(lambda p: curvature_bundle(chart, p).ricci, 2, chart)


def scalar_curvature_field(chart: ChartMetric) -> NumericTensorField:
    return NumericTensorField(lambda p: np.asarray(curvature_bundle(chart, p).scalar), 0, chart)
