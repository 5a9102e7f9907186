"""Dense-matrix oracles for the discrete operators.

Matrices are assembled by explicit index bookkeeping (loop over cells,
per-face ghost elimination written out long-hand), deliberately independent
of the vectorized stencil code they cross-check.  Sizes are capped at 4096
unknowns; these exist for verification only.
"""

from __future__ import annotations

import numpy as np

from .bc import BcKind, FieldBcs, TEMPERATURE_BC, VELOCITY_BC, robin_ghost_factor
from .grid import Grid
from .params import PhysParams

MAX_UNKNOWNS = 4096


def _ghost_gamma(kind: BcKind, p: PhysParams, g: Grid) -> float:
    if kind is BcKind.DIRICHLET:
        return -1.0
    if kind is BcKind.NEUMANN:
        return 1.0
    return robin_ghost_factor(p, g)


def dense_second_derivative_3d(g: Grid, p: PhysParams, bcs: FieldBcs, coefs) -> np.ndarray:
    """Dense matrix of -(cx d2/dx2 + cy d2/dy2 + cz d2/dz2) with ghost elimination."""
    n = g.nx * g.ny * g.nz
    if n > MAX_UNKNOWNS:
        raise ValueError(f"oracle size cap exceeded: {n} > {MAX_UNKNOWNS}")
    cx, cy, cz = coefs
    a = np.zeros((n, n))

    def row(i, j, k):
        return (i * g.ny + j) * g.nz + k

    spans = (
        (0, g.nx, g.dx, cx, bcs.xlo, bcs.xhi),
        (1, g.ny, g.dy, cy, bcs.ylo, bcs.yhi),
        (2, g.nz, g.dz, cz, bcs.zlo, bcs.zhi),
    )
    for i in range(g.nx):
        for j in range(g.ny):
            for k in range(g.nz):
                r = row(i, j, k)
                idx = [i, j, k]
                for axis, count, d, coef, lo, hi in spans:
                    w = coef / d**2
                    a[r, r] += 2.0 * w
                    for step, kind in ((-1, lo), (+1, hi)):
                        nb = idx.copy()
                        nb[axis] += step
                        if 0 <= nb[axis] < count:
                            a[r, row(*nb)] -= w
                        else:
                            # neighbor is a ghost: ghost = gamma * this cell
                            a[r, r] -= w * _ghost_gamma(kind, p, g)
    return a


def dense_operator_oracle(g: Grid, op: str, p: PhysParams, dt: float | None = None) -> np.ndarray:
    """Dense form of a named discrete operator on grid g.

    op: "L1" (momentum viscosity), "L2" (heat diffusion),
        "helmholtz_v"/"helmholtz_T" (I + dt*L, dt required).
    """
    if op == "L1":
        return dense_second_derivative_3d(g, p, VELOCITY_BC, (1 / p.re1, 1 / p.re1, 1 / p.re2))
    if op == "L2":
        return dense_second_derivative_3d(g, p, TEMPERATURE_BC, (1 / p.rt1, 1 / p.rt1, 1 / p.rt2))
    if op in ("helmholtz_v", "helmholtz_T"):
        if dt is None:
            raise ValueError("helmholtz oracle needs dt")
        base = dense_operator_oracle(g, "L1" if op.endswith("v") else "L2", p)
        return np.eye(base.shape[0]) + dt * base
    raise ValueError(f"unknown operator id {op!r}")


def dense_lap_h_2d(nx: int, ny: int, dx: float, dy: float, kind: BcKind) -> np.ndarray:
    """Dense horizontal Laplacian on an nx x ny layer with a uniform closure."""
    n = nx * ny
    if n > MAX_UNKNOWNS:
        raise ValueError(f"oracle size cap exceeded: {n} > {MAX_UNKNOWNS}")
    gamma = {BcKind.DIRICHLET: -1.0, BcKind.NEUMANN: 1.0}[kind]
    a = np.zeros((n, n))

    def row(i, j):
        return i * ny + j

    for i in range(nx):
        for j in range(ny):
            r = row(i, j)
            for (di, dj, d) in ((-1, 0, dx), (1, 0, dx), (0, -1, dy), (0, 1, dy)):
                a[r, r] -= 1.0 / d**2
                ii, jj = i + di, j + dj
                if 0 <= ii < nx and 0 <= jj < ny:
                    a[r, row(ii, jj)] += 1.0 / d**2
                else:
                    a[r, r] += gamma / d**2
    return a


def flatten(field: np.ndarray) -> np.ndarray:
    """Interior field to the oracle's unknown ordering."""
    return np.asarray(field).reshape(-1)


def unflatten(vec: np.ndarray, g: Grid) -> np.ndarray:
    return np.asarray(vec).reshape(g.nx, g.ny, g.nz)
