"""Central finite-difference stencils for array-valued functions of a point.

These stencils serve two roles: they are the oracle against which every
chart's exact derivatives are checked, and they provide the independent
numerical derivatives of computed fields (curvature tensors, norms of the
weighted Einstein tensor) used by the identity verifiers.  Keeping them in
one place guarantees the "oracle path" and the "identity path" share no
code with the analytic derivative path.
"""

from __future__ import annotations

from collections.abc import Callable

import numpy as np

# 4th-order central first derivative: f'(x) ~ sum(W1 * f(x + OFF1*h)) / h
OFF1 = np.array([-2.0, -1.0, 1.0, 2.0])
W1 = np.array([1.0, -8.0, 8.0, -1.0]) / 12.0

# 4th-order central second derivative (pure): includes the center point.
OFF2 = np.array([-2.0, -1.0, 0.0, 1.0, 2.0])
W2 = np.array([-1.0, 16.0, -30.0, 16.0, -1.0]) / 12.0

ArrayFunc = Callable[[np.ndarray], np.ndarray]


def steps(x: np.ndarray, base: float) -> np.ndarray:
    """Per-axis step h_i = base * max(1, |x_i|)."""
    x = np.asarray(x, dtype=float)
    return base * np.maximum(1.0, np.abs(x))


def _shift(x: np.ndarray, axis: int, delta: float) -> np.ndarray:
    y = np.array(x, dtype=float)
    y[axis] += delta
    return y


def diff1(func: ArrayFunc, x, axis: int, h: float, richardson: bool = True):
    """First partial along one axis; optionally with one Richardson level."""

    def d(hh):
        acc = None
        for off, w in zip(OFF1, W1):
            v = w * np.asarray(func(_shift(x, axis, off * hh)), dtype=float)
            acc = v if acc is None else acc + v
        return acc / hh

    if not richardson:
        return d(h)
    coarse = d(h)
    fine = d(h / 2.0)
    return (16.0 * fine - coarse) / 15.0


def gradient(func: ArrayFunc, x, base: float = 1e-4, richardson: bool = True):
    """All first partials, stacked along a new leading axis."""
    x = np.asarray(x, dtype=float)
    h = steps(x, base)
    return np.stack([diff1(func, x, k, h[k], richardson) for k in range(x.size)])


def diff2_pure(func: ArrayFunc, x, axis: int, h: float):
    acc = None
    for off, w in zip(OFF2, W2):
        v = w * np.asarray(func(_shift(x, axis, off * h)), dtype=float)
        acc = v if acc is None else acc + v
    return acc / (h * h)


def diff2_mixed(func: ArrayFunc, x, ax1: int, ax2: int, h1: float, h2: float):
    acc = None
    for o1, w1 in zip(OFF1, W1):
        for o2, w2 in zip(OFF1, W1):
            y = _shift(_shift(x, ax1, o1 * h1), ax2, o2 * h2)
            v = (w1 * w2) * np.asarray(func(y), dtype=float)
            acc = v if acc is None else acc + v
    return acc / (h1 * h2)


def hessian(func: ArrayFunc, x, base: float = 1e-3):
    """All second partials, stacked along two new leading axes (symmetric)."""
    x = np.asarray(x, dtype=float)
    n = x.size
    h = steps(x, base)
    probe = np.asarray(func(x), dtype=float)
    out = np.zeros((n, n) + probe.shape)
    for a in range(n):
        out[a, a] = diff2_pure(func, x, a, h[a])
        for b in range(a + 1, n):
            m = diff2_mixed(func, x, a, b, h[a], h[b])
            out[a, b] = m
            out[b, a] = m
    return out
