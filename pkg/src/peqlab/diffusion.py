"""Backward-Euler solves for the stiff viscosity/diffusion operators.

The discrete operators are Kronecker sums of 1D symmetric tridiagonal
operators (one per axis, boundary closure folded into the end rows), so
(I + dt*L) can be inverted exactly through the 1D eigendecompositions.
That tensor path is the default engine.  A matrix-free Jacobi-preconditioned
conjugate-gradient engine over the same ghost-based stencils is kept as the
independently-checkable alternative; both produce the identical operator.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import operators as ops
from .bc import TEMPERATURE_BC, VELOCITY_BC, fill_ghosts, robin_ghost_factor
from .errors import SolveError
from .grid import INTERIOR, Grid
from .model import apply_L1, apply_L2
from .params import PhysParams


def tridiag_second_derivative(n: int, d: float, coef: float, gamma_lo: float, gamma_hi: float) -> np.ndarray:
    """Dense 1D operator for -coef * d2/dxi2 with ghost = gamma * adjacent cell."""
    a = np.zeros((n, n))
    idx = np.arange(n)
    a[idx, idx] = 2.0 * coef / d**2
    a[idx[:-1], idx[:-1] + 1] = -coef / d**2
    a[idx[1:], idx[1:] - 1] = -coef / d**2
    a[0, 0] = (2.0 - gamma_lo) * coef / d**2
    a[-1, -1] = (2.0 - gamma_hi) * coef / d**2
    return a


def axis_operators(p: PhysParams, g: Grid, kind: str):
    """The three 1D operators whose Kronecker sum is L1 (velocity) or L2 (temperature)."""
    if kind == "velocity":
        ax = tridiag_second_derivative(g.nx, g.dx, 1.0 / p.re1, -1.0, -1.0)
        ay = tridiag_second_derivative(g.ny, g.dy, 1.0 / p.re1, -1.0, -1.0)
        az = tridiag_second_derivative(g.nz, g.dz, 1.0 / p.re2, 1.0, 1.0)
    elif kind == "temperature":
        ax = tridiag_second_derivative(g.nx, g.dx, 1.0 / p.rt1, 1.0, 1.0)
        ay = tridiag_second_derivative(g.ny, g.dy, 1.0 / p.rt1, 1.0, 1.0)
        az = tridiag_second_derivative(g.nz, g.dz, 1.0 / p.rt2, 1.0, robin_ghost_factor(p, g))
    else:
        raise ValueError(f"unknown operator kind {kind!r}")
    return ax, ay, az


@dataclass
class ImplicitDiffusion:
    """Cached exact solver for (I + dt*L) u = b on interior fields."""

    p: PhysParams
    g: Grid
    dt: float
    kind: str

    def __post_init__(self):
        ax, ay, az = axis_operators(self.p, self.g, self.kind)
        self.wx, self.qx = np.linalg.eigh(ax)
        self.wy, self.qy = np.linalg.eigh(ay)
        self.wz, self.qz = np.linalg.eigh(az)
        lam = (
            self.wx[:, None, None] + self.wy[None, :, None] + self.wz[None, None, :]
        )
        self.denominator = 1.0 + self.dt * lam

    def solve(self, b: np.ndarray) -> np.ndarray:
        t = np.einsum("xi,xyz->iyz", self.qx, b)
        t = np.einsum("yj,iyz->ijz", self.qy, t)
        t = np.einsum("zk,ijz->ijk", self.qz, t)
        t /= self.denominator
        t = np.einsum("xi,ijk->xjk", self.qx, t)
        t = np.einsum("yj,xjk->xyk", self.qy, t)
        return np.einsum("zk,xyk->xyz", self.qz, t)


def helmholtz_apply(x: np.ndarray, p: PhysParams, g: Grid, dt: float, kind: str) -> np.ndarray:
    """(I + dt*L) x through the ghost-based stencils (interior in/out)."""
    pad = g.zeros()
    pad[INTERIOR] = x
    if kind == "velocity":
        fill_ghosts(pad, VELOCITY_BC, p, g)
        return x + dt * apply_L1(pad, p, g)
    fill_ghosts(pad, TEMPERATURE_BC, p, g)
    return x + dt * apply_L2(pad, p, g)


def _jacobi_diagonal(p: PhysParams, g: Grid, dt: float, kind: str) -> np.ndarray:
    ax, ay, az = axis_operators(p, g, kind)
    diag = (
        np.diag(ax)[:, None, None]
        + np.diag(ay)[None, :, None]
        + np.diag(az)[None, None, :]
    )
    return 1.0 + dt * diag


def cg_diffusion_solve(
    b: np.ndarray,
    p: PhysParams,
    g: Grid,
    dt: float,
    kind: str,
    tol: float = 1e-12,
    max_iter: int = 5000,
) -> np.ndarray:
    """Jacobi-preconditioned CG on (I + dt*L); deterministic reductions."""
    minv = 1.0 / _jacobi_diagonal(p, g, dt, kind)
    x = np.zeros_like(b)
    r = b.copy()
    norm_b = np.sqrt(ops.pairwise_dot(b, b))
    if norm_b == 0.0:
        return x
    z = minv * r
    d = z.copy()
    rz = ops.pairwise_dot(r, z)
    for _ in range(max_iter):
        ad = helmholtz_apply(d, p, g, dt, kind)
        alpha = rz / ops.pairwise_dot(d, ad)
        x += alpha * d
        r -= alpha * ad
        if np.sqrt(ops.pairwise_dot(r, r)) <= tol * norm_b:
            return x
        z = minv * r
        rz_new = ops.pairwise_dot(r, z)
        d = z + (rz_new / rz) * d
        rz = rz_new
    residual = np.sqrt(ops.pairwise_dot(r, r)) / norm_b
    raise SolveError(
        f"diffusion CG did not converge in {max_iter} iterations (relative residual {residual:.3e})"
    )
