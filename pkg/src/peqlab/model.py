"""Continuous-model operators of the reformulated hydrostatic system.

The prognostic variables are the horizontal velocity (v1, v2) and the
temperature T.  The vertical velocity w is diagnosed from the horizontal
divergence, the pressure splits into a surface part p_s(x, y) plus the
hydrostatic integral of T, and the momentum/temperature tendencies assemble

  dv/dt = -adv(v) - grad p_s - (f/Ro) k x v + int_0^z grad T dz' - L1 v
  dT/dt = -adv(T) - L2 T + Q

with the advection in skew-symmetric split form so that its discrete energy
contribution cancels exactly.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import operators as ops
from .bc import SURFACE_PRESSURE_BC, TEMPERATURE_BC, VELOCITY_BC, W_BC, fill_ghosts
from .errors import NumericalError
from .grid import INTERIOR, Grid
from .params import PhysParams


def coriolis_f(y, p: PhysParams):
    """Beta-plane Coriolis parameter f0 + beta*y."""
    return p.f0 + p.beta * np.asarray(y, dtype=float)


@dataclass
class State:
    """Prognostic fields (padded), diagnosed fields, and the heat source."""

    v1: np.ndarray
    v2: np.ndarray
    T: np.ndarray
    w: np.ndarray
    p_s: np.ndarray
    Q: np.ndarray
    body_force: Optional[tuple] = None  # verification-only momentum forcing

    @classmethod
    def zeros(cls, g: Grid):
        return cls(
            v1=g.zeros(), v2=g.zeros(), T=g.zeros(), w=g.zeros(),
            p_s=g.zeros2d(), Q=np.zeros((g.nx, g.ny, g.nz)),
        )

    def copy(self):
        return State(
            v1=self.v1.copy(), v2=self.v2.copy(), T=self.T.copy(),
            w=self.w.copy(), p_s=self.p_s.copy(), Q=self.Q.copy(),
            body_force=self.body_force,
        )

    def fill_all_ghosts(self, p: PhysParams, g: Grid):
        fill_ghosts(self.v1, VELOCITY_BC, p, g)
        fill_ghosts(self.v2, VELOCITY_BC, p, g)
        fill_ghosts(self.T, TEMPERATURE_BC, p, g)
        fill_ghosts(self.w, W_BC, p, g)
        fill_ghosts(self.p_s, SURFACE_PRESSURE_BC, p, g)
        return self

    def refresh_w(self, p: PhysParams, g: Grid):
        """Re-diagnose w from the current velocity ghosts."""
        self.w[INTERIOR] = diagnose_w(self.v1, self.v2, g)
        fill_ghosts(self.w, W_BC, p, g)
        return self


@dataclass
class Tendency:
    """Right-hand sides for the prognostic fields (interior arrays)."""

    dv1: Optional[np.ndarray] = None
    dv2: Optional[np.ndarray] = None
    dT: Optional[np.ndarray] = None

    def validate(self):
        """Raise NumericalError at the first non-finite entry."""
        for name in ("dv1", "dv2", "dT"):
            arr = getattr(self, name)
            if arr is None:
                continue
            bad = ~np.isfinite(arr)
            if bad.any():
                idx = tuple(int(v) for v in np.argwhere(bad)[0])
                raise NumericalError(f"non-finite tendency {name} at interior index {idx}")
        return self


def diagnose_w(v1p: np.ndarray, v2p: np.ndarray, g: Grid) -> np.ndarray:
    """Vertical velocity from the continuity equation, zero at the bottom face.

    w(z) = -int_{-h}^{z} div_h(v) dz', accumulated by the trapezoid rule from
    the bottom, so the surface value equals -h times the uniform depth mean
    of the divergence.
    """
    return -ops.integrate_from_bottom(ops.div_h(v1p, v2p, g), g)


def reconstruct_pressure(T: np.ndarray, p_s: np.ndarray, g: Grid) -> np.ndarray:
    """Hydrostatic pressure p(x,y,z) = p_s(x,y) - int_0^z T dz' (interior arrays)."""
    return p_s[:, :, None] + ops.integrate_from_top(T, g)


def baroclinic_pressure_gradient(Tp: np.ndarray, g: Grid):
    """int_0^z grad T dz' as the pair of interior component fields."""
    tx, ty = ops.grad_h(Tp, g)
    return -ops.integrate_from_top(tx, g), -ops.integrate_from_top(ty, g)


def apply_L1(vp: np.ndarray, p: PhysParams, g: Grid) -> np.ndarray:
    """Momentum viscosity operator -(1/re1) lap_h - (1/re2) d2/dz2."""
    return -ops.lap_h(vp, g) / p.re1 - ops.d2_dz2(vp, g) / p.re2


def apply_L2(Tp: np.ndarray, p: PhysParams, g: Grid) -> np.ndarray:
    """Heat diffusion operator -(1/rt1) lap_h - (1/rt2) d2/dz2."""
    return -ops.lap_h(Tp, g) / p.rt1 - ops.d2_dz2(Tp, g) / p.rt2


def advect(u1p: np.ndarray, u2p: np.ndarray, wp: np.ndarray, fp: np.ndarray, g: Grid) -> np.ndarray:
    """Skew-symmetric advection 0.5 [ u.grad f + div(u f) ] (interior out).

    The flux products are formed on the padded arrays, so with the advecting
    normal component odd across each face the discrete inner product
    <advect(f), f> telescopes to zero.
    """
    I = INTERIOR
    conv = (
        u1p[I] * (fp[2:, 1:-1, 1:-1] - fp[:-2, 1:-1, 1:-1]) / (2.0 * g.dx)
        + u2p[I] * (fp[1:-1, 2:, 1:-1] - fp[1:-1, :-2, 1:-1]) / (2.0 * g.dy)
        + wp[I] * (fp[1:-1, 1:-1, 2:] - fp[1:-1, 1:-1, :-2]) / (2.0 * g.dz)
    )
    f1 = u1p * fp
    f2 = u2p * fp
    f3 = wp * fp
    dive = (
        (f1[2:, 1:-1, 1:-1] - f1[:-2, 1:-1, 1:-1]) / (2.0 * g.dx)
        + (f2[1:-1, 2:, 1:-1] - f2[1:-1, :-2, 1:-1]) / (2.0 * g.dy)
        + (f3[1:-1, 1:-1, 2:] - f3[1:-1, 1:-1, :-2]) / (2.0 * g.dz)
    )
    return 0.5 * (conv + dive)


def momentum_rhs(s: State, p: PhysParams, g: Grid, include_diffusion: bool = True) -> Tendency:
    """Momentum tendency; requires current ghosts, diagnosed w, and p_s."""
    f = coriolis_f(g.y(np.arange(g.ny)), p)[None, :, None] / p.ro
    bx, by = baroclinic_pressure_gradient(s.T, g)
    px, py = ops.grad_h(s.p_s, g)
    dv1 = -advect(s.v1, s.v2, s.w, s.v1, g) + f * s.v2[INTERIOR] - px[:, :, None] + bx
    dv2 = -advect(s.v1, s.v2, s.w, s.v2, g) - f * s.v1[INTERIOR] - py[:, :, None] + by
    if include_diffusion:
        dv1 -= apply_L1(s.v1, p, g)
        dv2 -= apply_L1(s.v2, p, g)
    if s.body_force is not None:
        dv1 = dv1 + s.body_force[0]
        dv2 = dv2 + s.body_force[1]
    return Tendency(dv1=dv1, dv2=dv2)


def temperature_rhs(s: State, p: PhysParams, g: Grid, include_diffusion: bool = True) -> Tendency:
    """Temperature tendency; requires current ghosts and diagnosed w."""
    dT = -advect(s.v1, s.v2, s.w, s.T, g) + s.Q
    if include_diffusion:
        dT -= apply_L2(s.T, p, g)
    return Tendency(dT=dT)
