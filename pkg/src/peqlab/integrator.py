"""IMEX time stepping: explicit transport, implicit diffusion, projection.

One step advances the prognostic fields by

  (i)   explicit tendencies (advection, Coriolis, surface-pressure gradient,
        baroclinic gradient, sources),
  (ii)  backward-Euler solve of (I + dt*L) per field with its boundary rows,
  (iii) barotropic projection onto the depth-integrated constraint,
  (iv)  re-diagnosis of w and a ghost refresh,

which keeps the discrete energy balance: transport is skew-neutral, the
implicit solves are contractions, and the projection removes energy.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Optional

import numpy as np

from . import diagnostics as diag
from .diffusion import ImplicitDiffusion, cg_diffusion_solve
from .errors import CheckError
from .grid import INTERIOR, Grid
from .model import State, momentum_rhs, temperature_rhs
from .params import PhysParams
from .projection import PoissonSolve, constraint_residual, project

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class StepConfig:
    dt: float = 0.01
    t_end: float = 1.0
    cfl_target: float = 0.5
    dt_max: float = 0.1
    diffusion_tol: float = 1e-12
    output_every: int = 10
    temperature_only: bool = False
    engine: str = "eigen"  # or "cg"

    def __post_init__(self):
        if not (self.dt > 0.0):
            raise ValueError("dt must be positive")
        if not (0.0 < self.cfl_target <= 1.0):
            raise ValueError("cfl_target must lie in (0, 1]")
        if self.output_every < 1:
            raise ValueError("output_every must be >= 1")
        if self.engine not in ("eigen", "cg"):
            raise ValueError(f"unknown diffusion engine {self.engine!r}")


@dataclass(frozen=True)
class RunChecks:
    """Inequality monitors evaluated during a run; violations abort it."""

    poincare_tol: float = 1e-2
    energy_slack: float = 1e-8
    gronwall_factor: float = 1.05
    div_tol: float = 1e-8
    check_poincare: bool = True
    check_constraint: bool = True
    check_energy: Optional[bool] = None  # None: enabled when Q is identically zero
    check_gronwall: bool = False


def cfl_dt(s: State, g: Grid, cfg: StepConfig) -> float:
    """Advisory advective time step, capped at cfg.dt_max."""
    suggestion = cfg.dt_max
    for vmax, d in (
        (float(np.abs(s.v1[INTERIOR]).max()), g.dx),
        (float(np.abs(s.v2[INTERIOR]).max()), g.dy),
        (float(np.abs(s.w[INTERIOR]).max()), g.dz),
    ):
        if vmax > 0.0:
            suggestion = min(suggestion, cfg.cfl_target * d / vmax)
    return suggestion


@lru_cache(maxsize=32)
def _cached_diffusion(p: PhysParams, g: Grid, dt: float, kind: str) -> ImplicitDiffusion:
    return ImplicitDiffusion(p=p, g=g, dt=dt, kind=kind)


def _implicit_solve(b, p, g, dt, kind, cfg: StepConfig):
    if cfg.engine == "eigen":
        return _cached_diffusion(p, g, dt, kind).solve(b)
    return cg_diffusion_solve(b, p, g, dt, kind, tol=cfg.diffusion_tol)


def step(
    s: State,
    dt: float,
    p: PhysParams,
    g: Grid,
    cfg: StepConfig,
    poisson: PoissonSolve = PoissonSolve(),
) -> State:
    """Advance a state (valid ghosts, diagnosed w) by one IMEX step in place."""
    I = INTERIOR
    tem = temperature_rhs(s, p, g, include_diffusion=False)
    if cfg.temperature_only:
        tem.validate()
        t_star = s.T[I] + dt * tem.dT
        s.T[I] = _implicit_solve(t_star, p, g, dt, "temperature", cfg)
    else:
        mom = momentum_rhs(s, p, g, include_diffusion=False)
        # single non-finite sweep for the whole step
        mom.dT = tem.dT
        mom.validate()
        v1_star = s.v1[I] + dt * mom.dv1
        v2_star = s.v2[I] + dt * mom.dv2
        t_star = s.T[I] + dt * tem.dT
        s.v1[I] = _implicit_solve(v1_star, p, g, dt, "velocity", cfg)
        s.v2[I] = _implicit_solve(v2_star, p, g, dt, "velocity", cfg)
        s.T[I] = _implicit_solve(t_star, p, g, dt, "temperature", cfg)
    s.fill_all_ghosts(p, g)
    if not cfg.temperature_only:
        project(s, dt, p, g, poisson)
    s.refresh_w(p, g)
    return s


def run(
    initial: State,
    p: PhysParams,
    g: Grid,
    cfg: StepConfig,
    poisson: PoissonSolve = PoissonSolve(),
    checks: Optional[RunChecks] = None,
    record_sink: Optional[Callable] = None,
    snapshot_sink: Optional[Callable] = None,
):
    """Advance to t_end, emitting a DiagRecord every output_every steps.

    Returns (final_state, records).  The initial state is projected onto the
    constraint before the first step; a failed step aborts with the last
    valid time in the exception message.
    """
    s = initial.copy()
    s.fill_all_ghosts(p, g)
    if not cfg.temperature_only:
        project(s, cfg.dt, p, g, poisson)
    s.refresh_w(p, g)

    checks = checks or RunChecks()
    l2_q = diag.l2sq(s.Q, g)
    check_energy = checks.check_energy
    if check_energy is None:
        check_energy = l2_q == 0.0
    kap = diag.kappa(p)
    l2_t0 = diag.l2sq(s.T[INTERIOR], g)

    n_steps = int(round(cfg.t_end / cfg.dt))
    suggestion = cfl_dt(s, g, cfg)
    if cfg.dt > suggestion:
        log.warning("dt=%g exceeds the advective CFL suggestion %g", cfg.dt, suggestion)

    records = []
    s_prev = None
    t = 0.0

    def emit(step_index):
        rec = diag.compute_record(s, s_prev, cfg.dt, p, g, t=t)
        _check_record(rec, checks, check_gronwall=checks.check_gronwall,
                      l2_t0=l2_t0, l2_q=l2_q, kap=kap)
        records.append(rec)
        if record_sink is not None:
            record_sink(rec)
        if snapshot_sink is not None:
            snapshot_sink(s, t, step_index)

    emit(0)
    energy = diag.l2sq(s.v1[INTERIOR], g) + diag.l2sq(s.v2[INTERIOR], g) + diag.l2sq(s.T[INTERIOR], g)
    for n in range(1, n_steps + 1):
        s_prev = s.copy()
        try:
            step(s, cfg.dt, p, g, cfg, poisson)
        except Exception as exc:
            raise type(exc)(f"{exc} (run aborted; last valid time t={t:.6g})") from exc
        t = n * cfg.dt
        if check_energy:
            energy_new = (
                diag.l2sq(s.v1[INTERIOR], g)
                + diag.l2sq(s.v2[INTERIOR], g)
                + diag.l2sq(s.T[INTERIOR], g)
            )
            slack = 0.0 if cfg.temperature_only else checks.energy_slack
            if energy_new > energy * (1.0 + slack):
                raise CheckError(
                    f"energy increased at t={t:.6g}: {energy:.17g} -> {energy_new:.17g}"
                )
            energy = energy_new
        if n % cfg.output_every == 0 or n == n_steps:
            emit(n)
    return s, records


def _check_record(rec, checks: RunChecks, check_gronwall, l2_t0, l2_q, kap):
    if checks.check_poincare:
        r_t = diag.check_poincare_T(rec)
        if r_t > 1.0 + checks.poincare_tol:
            raise CheckError(f"temperature Poincare ratio {r_t:.6g} > 1 + {checks.poincare_tol}")
        r_v = diag.check_poincare_v(rec)
        if r_v > 1.0 + checks.poincare_tol:
            raise CheckError(f"velocity Poincare ratio {r_v:.6g} > 1 + {checks.poincare_tol}")
    if checks.check_constraint and rec.constraint_residual > checks.div_tol:
        raise CheckError(
            f"constraint residual {rec.constraint_residual:.3e} > {checks.div_tol:.1e} at t={rec.t:.6g}"
        )
    if check_gronwall:
        bound = diag.gronwall_T_envelope(rec.t, l2_t0, l2_q, kap=kap) * checks.gronwall_factor
        if rec.l2_T > bound:
            raise CheckError(
                f"temperature energy {rec.l2_T:.6g} above decay envelope {bound:.6g} at t={rec.t:.6g}"
            )
