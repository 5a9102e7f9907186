"""Second-order centered stencils, vertical quadratures, and deterministic sums.

Stencil functions consume ghost-padded arrays (valid ghosts are the caller's
responsibility) and return interior-shaped arrays.  Vertical quadratures and
averages operate on interior arrays.

All reductions used for diagnostics and solver dot products go through
:func:`pairwise_sum`, a fixed-shape binary tree, so results do not depend on
thread count or summation chunking.
"""

from __future__ import annotations

import numpy as np

from .grid import Grid


def grad_h(fp: np.ndarray, g: Grid):
    """Horizontal gradient (d/dx, d/dy) of a padded 2D or 3D field."""
    if fp.ndim == 3:
        fx = (fp[2:, 1:-1, 1:-1] - fp[:-2, 1:-1, 1:-1]) / (2.0 * g.dx)
        fy = (fp[1:-1, 2:, 1:-1] - fp[1:-1, :-2, 1:-1]) / (2.0 * g.dy)
    else:
        fx = (fp[2:, 1:-1] - fp[:-2, 1:-1]) / (2.0 * g.dx)
        fy = (fp[1:-1, 2:] - fp[1:-1, :-2]) / (2.0 * g.dy)
    return fx, fy


def div_h(up: np.ndarray, vp: np.ndarray, g: Grid):
    """Horizontal divergence d(u)/dx + d(v)/dy of padded component fields."""
    if up.ndim == 3:
        return (up[2:, 1:-1, 1:-1] - up[:-2, 1:-1, 1:-1]) / (2.0 * g.dx) + (
            vp[1:-1, 2:, 1:-1] - vp[1:-1, :-2, 1:-1]
        ) / (2.0 * g.dy)
    return (up[2:, 1:-1] - up[:-2, 1:-1]) / (2.0 * g.dx) + (
        vp[1:-1, 2:] - vp[1:-1, :-2]
    ) / (2.0 * g.dy)


def lap_h(fp: np.ndarray, g: Grid):
    """Horizontal five-point Laplacian of a padded 2D or 3D field."""
    if fp.ndim == 3:
        return (fp[2:, 1:-1, 1:-1] - 2.0 * fp[1:-1, 1:-1, 1:-1] + fp[:-2, 1:-1, 1:-1]) / g.dx**2 + (
            fp[1:-1, 2:, 1:-1] - 2.0 * fp[1:-1, 1:-1, 1:-1] + fp[1:-1, :-2, 1:-1]
        ) / g.dy**2
    return (fp[2:, 1:-1] - 2.0 * fp[1:-1, 1:-1] + fp[:-2, 1:-1]) / g.dx**2 + (
        fp[1:-1, 2:] - 2.0 * fp[1:-1, 1:-1] + fp[1:-1, :-2]
    ) / g.dy**2


def d_dz(fp: np.ndarray, g: Grid):
    """Centered vertical derivative of a padded 3D field."""
    return (fp[1:-1, 1:-1, 2:] - fp[1:-1, 1:-1, :-2]) / (2.0 * g.dz)


def d2_dz2(fp: np.ndarray, g: Grid):
    """Centered second vertical derivative of a padded 3D field."""
    return (fp[1:-1, 1:-1, 2:] - 2.0 * fp[1:-1, 1:-1, 1:-1] + fp[1:-1, 1:-1, :-2]) / g.dz**2


def vertical_average(f: np.ndarray, g: Grid):
    """Depth average and fluctuation of an interior field.

    The average is the trapezoid rule with boundary-face values taken from
    the stress-free mirror, which collapses to uniform weights; the resulting
    split is an exact projection (the fluctuation depth-averages to zero to
    rounding).
    """
    fbar = f.mean(axis=2)
    return fbar, f - fbar[:, :, None]


def integrate_from_bottom(f: np.ndarray, g: Grid):
    """Cumulative vertical integral from z = -h to each cell center.

    Trapezoidal, with the bottom-face value mirrored from the first cell, so
    the top-face total matches h times the uniform depth mean exactly.
    """
    nz = f.shape[2]
    out = np.empty_like(f)
    out[:, :, 0] = 0.5 * g.dz * f[:, :, 0]
    if nz > 1:
        steps = 0.5 * g.dz * (f[:, :, 1:] + f[:, :, :-1])
        out[:, :, 1:] = out[:, :, 0][:, :, None] + np.cumsum(steps, axis=2)
    return out


def integrate_from_top(f: np.ndarray, g: Grid):
    """Cumulative vertical integral from each cell center up to z = 0.

    Trapezoidal; the surface-face value is linearly extrapolated from the two
    top cells, making the rule exact for integrands linear in z.
    """
    out = np.empty_like(f)
    out[:, :, -1] = g.dz * (5.0 * f[:, :, -1] - f[:, :, -2]) / 8.0
    steps = 0.5 * g.dz * (f[:, :, 1:] + f[:, :, :-1])
    rev = np.cumsum(steps[:, :, ::-1], axis=2)[:, :, ::-1]
    out[:, :, :-1] = out[:, :, -1][:, :, None] + rev
    return out


def pairwise_sum(a: np.ndarray) -> float:
    """Deterministic binary-tree sum of all entries of `a`.

    The tree shape depends only on the element count, so the result is
    bit-identical across runs, BLAS backends, and thread counts.
    """
    a = np.asarray(a, dtype=np.float64).ravel()
    if a.size == 0:
        return 0.0
    while a.size > 1:
        if a.size % 2:
            tail = a[-1:]
            a = a[:-1]
        else:
            tail = None
        a = a[0::2] + a[1::2]
        if tail is not None:
            a = np.concatenate((a, tail))
    return float(a[0])


def pairwise_dot(a: np.ndarray, b: np.ndarray) -> float:
    """Deterministic inner product built on :func:`pairwise_sum`."""
    return pairwise_sum(np.asarray(a).ravel() * np.asarray(b).ravel())
