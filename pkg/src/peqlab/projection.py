"""Surface-pressure Poisson solve and barotropic projection.

The depth-integrated incompressibility constraint div_h(vbar) = 0 is
enforced by a pressure-correction step: solve

    div_h(grad_h(phi)) = div_h(vbar*) / dt

with mirror (Neumann) closure on phi and the odd (Dirichlet) wall closure on
the corrected velocity, then subtract dt * grad_h(phi) at every depth.  The
composite operator is the Kronecker sum of 1D factors -Gx^T Gx and -Gy^T Gy
whose only null vector is the constant, so the zero-mean gauge falls out of
dropping that single mode.  Small grids use the exact eigen-tensor solve;
larger ones a Jacobi-preconditioned CG on the same operator.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import operators as ops
from .bc import SURFACE_PRESSURE_BC, VELOCITY_BC, fill_ghosts
from .errors import SolveError
from .grid import INTERIOR2D, Grid
from .params import PhysParams

#: unknown count at or below which the exact eigen-tensor path is used
DIRECT_LIMIT = 64 * 64


def centered_gradient_matrix(n: int, d: float) -> np.ndarray:
    """1D centered difference with mirror end closure (acts on phi)."""
    m = np.zeros((n, n))
    for i in range(n):
        if i == 0:
            m[0, 1] += 1.0
            m[0, 0] -= 1.0
        elif i == n - 1:
            m[i, i] += 1.0
            m[i, i - 1] -= 1.0
        else:
            m[i, i + 1] += 1.0
            m[i, i - 1] -= 1.0
    return m / (2.0 * d)


@dataclass(frozen=True)
class PoissonSolve:
    """Solver configuration; `kind` is auto, direct, or cg."""

    tolerance: float = 1e-12
    max_iter: int = 5000
    kind: str = "auto"

    def __post_init__(self):
        if not (0.0 < self.tolerance <= 1e-6):
            raise ValueError(f"tolerance must lie in (0, 1e-6], got {self.tolerance!r}")
        if self.max_iter < 1:
            raise ValueError("max_iter must be >= 1")
        if self.kind not in ("auto", "direct", "cg"):
            raise ValueError(f"unknown solver kind {self.kind!r}")


@lru_cache(maxsize=8)
def _poisson_factors(g: Grid):
    gx = centered_gradient_matrix(g.nx, g.dx)
    gy = centered_gradient_matrix(g.ny, g.dy)
    bx = gx.T @ gx
    by = gy.T @ gy
    wx, qx = np.linalg.eigh(bx)
    wy, qy = np.linalg.eigh(by)
    lam = wx[:, None] + wy[None, :]
    scale = lam.max()
    null = lam < 1e-12 * scale
    return qx, qy, lam, null, bx, by


def _direct_solve(rhs: np.ndarray, g: Grid) -> np.ndarray:
    qx, qy, lam, null, _, _ = _poisson_factors(g)
    r = qx.T @ (-rhs) @ qy
    r = np.where(null, 0.0, r / np.where(null, 1.0, lam))
    phi = qx @ r @ qy.T
    return phi - phi.mean()


def _cg_solve(rhs: np.ndarray, g: Grid, cfg: PoissonSolve) -> np.ndarray:
    _, _, _, _, bx, by = _poisson_factors(g)

    def apply_a(x):
        return bx @ x + x @ by.T

    b = -rhs
    b = b - b.mean()  # Neumann compatibility: remove the null component
    norm_b = np.sqrt(ops.pairwise_dot(b, b))
    x = np.zeros_like(b)
    if norm_b == 0.0:
        return x
    minv = 1.0 / (np.diag(bx)[:, None] + np.diag(by)[None, :])
    r = b.copy()
    z = minv * r
    d = z.copy()
    rz = ops.pairwise_dot(r, z)
    for _ in range(cfg.max_iter):
        ad = apply_a(d)
        alpha = rz / ops.pairwise_dot(d, ad)
        x += alpha * d
        r -= alpha * ad
        x -= x.mean()
        if np.sqrt(ops.pairwise_dot(r, r)) <= cfg.tolerance * norm_b:
            return x - x.mean()
        z = minv * r
        rz_new = ops.pairwise_dot(r, z)
        d = z + (rz_new / rz) * d
        rz = rz_new
    residual = np.sqrt(ops.pairwise_dot(r, r)) / norm_b
    raise SolveError(
        f"surface-pressure CG did not converge in {cfg.max_iter} iterations "
        f"(relative residual {residual:.3e})"
    )


def solve_surface_pressure(vbar_star, dt: float, g: Grid, cfg: PoissonSolve) -> np.ndarray:
    """Pressure increment phi from the padded depth-mean predictor velocity.

    Returns the interior 2D field with zero mean; the Neumann problem's
    right-hand side is compatible by construction (wall-normal velocity
    ghosts are odd, so the discrete divergence integrates to rounding).
    """
    v1bar_p, v2bar_p = vbar_star
    rhs = ops.div_h(v1bar_p, v2bar_p, g) / dt
    use_direct = cfg.kind == "direct" or (cfg.kind == "auto" and g.nx * g.ny <= DIRECT_LIMIT)
    if use_direct:
        return _direct_solve(rhs, g)
    return _cg_solve(rhs, g, cfg)


def depth_mean_divergence(v1p: np.ndarray, v2p: np.ndarray, g: Grid) -> np.ndarray:
    """div_h of the depth-averaged velocity (interior 2D array).

    The depth mean runs over interior layers only; the lateral ghosts of the
    padded input supply the wall closure of the divergence.
    """
    return ops.div_h(v1p[:, :, 1:-1].mean(axis=2), v2p[:, :, 1:-1].mean(axis=2), g)


def constraint_residual(v1p: np.ndarray, v2p: np.ndarray, g: Grid) -> float:
    """Depth-mean divergence residual relative to the advective velocity scale."""
    div = depth_mean_divergence(v1p, v2p, g)
    scale = np.abs(v1p).max() / g.dx + np.abs(v2p).max() / g.dy
    peak = float(np.abs(div).max())
    if scale == 0.0:
        return 0.0 if peak == 0.0 else float("inf")
    return peak / float(scale)


def project(s, dt: float, p: PhysParams, g: Grid, cfg: PoissonSolve) -> np.ndarray:
    """Project the state's velocity onto the constraint; returns the phi increment.

    The correction -dt * grad_h(phi) is depth-independent, so the baroclinic
    part of the velocity is untouched; p_s accumulates phi and keeps its zero
    mean.  Ghosts of the modified fields are refreshed.
    """
    v1bar = g.zeros2d()
    v2bar = g.zeros2d()
    v1bar[INTERIOR2D] = s.v1[1:-1, 1:-1, 1:-1].mean(axis=2)
    v2bar[INTERIOR2D] = s.v2[1:-1, 1:-1, 1:-1].mean(axis=2)
    fill_ghosts(v1bar, VELOCITY_BC, p, g)
    fill_ghosts(v2bar, VELOCITY_BC, p, g)
    phi = solve_surface_pressure((v1bar, v2bar), dt, g, cfg)

    pad = g.zeros2d()
    pad[INTERIOR2D] = phi
    fill_ghosts(pad, SURFACE_PRESSURE_BC, p, g)
    gx, gy = ops.grad_h(pad, g)
    s.v1[1:-1, 1:-1, 1:-1] -= dt * gx[:, :, None]
    s.v2[1:-1, 1:-1, 1:-1] -= dt * gy[:, :, None]
    s.p_s[INTERIOR2D] += phi
    s.p_s[INTERIOR2D] -= s.p_s[INTERIOR2D].mean()
    fill_ghosts(s.v1, VELOCITY_BC, p, g)
    fill_ghosts(s.v2, VELOCITY_BC, p, g)
    fill_ghosts(s.p_s, SURFACE_PRESSURE_BC, p, g)
    return phi
