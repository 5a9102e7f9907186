"""Windowed tail energies, truncation studies, and the contraction probe.

A smooth cutoff of the squared stretched coordinate x^2/r^2 isolates the
temperature energy living beyond |x| ~ r.  The experiments here exhibit the
behavior that justifies truncating the unbounded channel: tail energy stays
a small fraction of the total once the window clears the heat source,
doubling the truncation half-length barely changes the solution on the
common subdomain, and paired trajectories contract.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable, List, Optional

import numpy as np

from .diagnostics import l2sq
from .errors import ConfigError
from .grid import INTERIOR, Grid, make_grid
from .integrator import StepConfig, step
from .model import State, apply_L1, apply_L2
from .params import PhysParams
from .projection import PoissonSolve, project


@dataclass(frozen=True)
class TailConfig:
    radii: tuple = (0.6, 0.8, 1.0)
    epsilon: float = 1e-3
    tau_probe: float = 1.0
    pair_seed: int = 0

    def validate(self, g: Grid):
        radii = tuple(self.radii)
        if not radii or any(r <= 0 for r in radii):
            raise ConfigError("tail radii must be positive")
        if any(b <= a for a, b in zip(radii, radii[1:])):
            raise ConfigError("tail radii must be strictly increasing")
        if max(radii) >= g.lx / 2:
            raise ConfigError(
                f"largest tail radius {max(radii)} must stay below lx/2 = {g.lx / 2}"
            )
        return self


def cutoff_eta(s):
    """Smooth window: 0 below 1, 1 above 2, quintic smoothstep between."""
    s = np.asarray(s, dtype=float)
    u = np.clip(s - 1.0, 0.0, 1.0)
    val = u * u * u * (10.0 + u * (-15.0 + 6.0 * u))
    return val if val.ndim else float(val)


def windowed_T_energy(T: np.ndarray, r: float, g: Grid) -> float:
    """Quadrature of eta(x^2/r^2)^2 |T|^2 over the grid (interior field)."""
    if r <= 0:
        raise ValueError("window radius must be positive")
    x = g.x(np.arange(g.nx))[:, None, None]
    w = cutoff_eta(x**2 / r**2) ** 2
    return g.cell_volume * float(np.sum(w * np.asarray(T) ** 2))


@dataclass
class TailReport:
    radii: tuple
    tau_probe: float
    epsilon: float
    times: List[float] = field(default_factory=list)
    totals: List[float] = field(default_factory=list)
    windowed: List[List[float]] = field(default_factory=list)  # [radius][time]
    sup_abs: List[float] = field(default_factory=list)
    sup_rel: List[float] = field(default_factory=list)
    r_star: Optional[float] = None
    passed: bool = False

    def finish(self):
        mask = [t >= self.tau_probe for t in self.times]
        if not any(mask):
            raise ConfigError("tau_probe lies beyond the simulated horizon")
        self.sup_abs = []
        self.sup_rel = []
        for series in self.windowed:
            vals = [w for w, m in zip(series, mask) if m]
            tot = [max(T, 1e-300) for T, m in zip(self.totals, mask) if m]
            self.sup_abs.append(max(vals))
            self.sup_rel.append(max(w / T for w, T in zip(vals, tot)))
        self.r_star = None
        for i, r in enumerate(self.radii):
            if all(s <= self.epsilon for s in self.sup_rel[i:]):
                self.r_star = r
                break
        self.passed = self.r_star is not None
        return self


def _q_support_radius(Q: np.ndarray, g: Grid) -> float:
    peak = np.abs(Q).max()
    if peak == 0.0:
        return 0.0
    x = np.abs(g.x(np.arange(g.nx)))
    occupied = np.abs(Q).max(axis=(1, 2)) > 1e-12 * peak
    return float(x[occupied].max()) if occupied.any() else 0.0


def tail_decay_experiment(
    tail: TailConfig,
    initial: State,
    p: PhysParams,
    g: Grid,
    cfg: StepConfig,
    poisson: PoissonSolve = PoissonSolve(),
) -> TailReport:
    """Run the simulation and track windowed tail energies per radius.

    The heat source must live well inside the smallest window radius.
    """
    tail.validate(g)
    support = _q_support_radius(initial.Q, g)
    if support > 0.75 * min(tail.radii):
        raise ConfigError(
            f"heat source support |x| <= {support:.3g} is not well inside the "
            f"smallest window radius {min(tail.radii)}"
        )
    report = TailReport(radii=tuple(tail.radii), tau_probe=tail.tau_probe, epsilon=tail.epsilon)
    report.windowed = [[] for _ in tail.radii]

    s = initial.copy()
    s.fill_all_ghosts(p, g)
    project(s, cfg.dt, p, g, poisson)
    s.refresh_w(p, g)

    def sample(t):
        report.times.append(t)
        report.totals.append(l2sq(s.T[INTERIOR], g))
        for i, r in enumerate(tail.radii):
            report.windowed[i].append(windowed_T_energy(s.T[INTERIOR], r, g))

    sample(0.0)
    n_steps = int(round(cfg.t_end / cfg.dt))
    for n in range(1, n_steps + 1):
        step(s, cfg.dt, p, g, cfg, poisson)
        if n % cfg.output_every == 0 or n == n_steps:
            sample(n * cfg.dt)
    return report.finish()


@dataclass
class TruncationReport:
    factor: int
    times: List[float] = field(default_factory=list)
    rel_diff: List[float] = field(default_factory=list)

    @property
    def max_rel_diff(self) -> float:
        return max(self.rel_diff) if self.rel_diff else float("nan")


def truncation_convergence(
    p: PhysParams,
    counts: tuple,
    cfg: StepConfig,
    q_fn: Callable,
    factor: int = 2,
    factor_base: int = 1,
    ic_fn: Optional[Callable] = None,
    poisson: PoissonSolve = PoissonSolve(),
) -> TruncationReport:
    """Compare runs of the same physics on channels widened by two factors.

    The default pairs the base half-length with factor times it.  Both grids
    keep the spacing (nx scales with the factor), so the narrow domain's
    cells are a subset of the wide one's; the report holds the relative L2
    difference of (v1, v2, T) on the narrow domain at every output time.
    """
    nx, ny, nz = counts
    fa, fb = int(factor_base), int(factor)
    if fa != factor_base or fb != factor or fa < 1 or fb <= fa:
        raise ConfigError("truncation factors must be integers with factor > factor_base >= 1")
    offset, rem = divmod(nx * (fb - fa), 2)
    if rem:
        raise ConfigError(f"nx * {fb - fa} must be even for aligned grids")

    def build(pp, counts_):
        gg = make_grid(pp, *counts_)
        s = State.zeros(gg)
        x, y, z = gg.coords()
        s.Q[...] = q_fn(x, y, z) * np.ones((gg.nx, gg.ny, gg.nz))
        if ic_fn is not None:
            s.T[INTERIOR] = ic_fn(x, y, z) * np.ones((gg.nx, gg.ny, gg.nz))
        s.fill_all_ghosts(pp, gg)
        project(s, cfg.dt, pp, gg, poisson)
        s.refresh_w(pp, gg)
        return gg, s

    p_a = replace(p, lx=fa * p.lx)
    p_b = replace(p, lx=fb * p.lx)
    g_a, s_a = build(p_a, (fa * nx, ny, nz))
    g_b, s_b = build(p_b, (fb * nx, ny, nz))
    na = fa * nx
    if not np.allclose(g_a.x(np.arange(na)), g_b.x(np.arange(offset, offset + na))):
        raise ConfigError("incompatible grids: cell centers do not align")

    report = TruncationReport(factor=fb)
    narrow = np.s_[1:1 + na, 1:-1, 1:-1]
    sl = np.s_[1 + offset:1 + offset + na, 1:-1, 1:-1]

    def sample(t):
        num = 0.0
        den = 0.0
        for wide, base in ((s_b.v1, s_a.v1), (s_b.v2, s_a.v2), (s_b.T, s_a.T)):
            d = wide[sl] - base[narrow]
            num += float(np.sum(d * d))
            den += float(np.sum(base[narrow] ** 2))
        report.times.append(t)
        report.rel_diff.append(math.sqrt(num) / math.sqrt(den) if den > 0 else math.sqrt(num))

    sample(0.0)
    n_steps = int(round(cfg.t_end / cfg.dt))
    for n in range(1, n_steps + 1):
        step(s_a, cfg.dt, p_a, g_a, cfg, poisson)
        step(s_b, cfg.dt, p_b, g_b, cfg, poisson)
        if n % cfg.output_every == 0 or n == n_steps:
            sample(n * cfg.dt)
    return report


@dataclass
class ContractionReport:
    times: List[float] = field(default_factory=list)
    dist_v: List[float] = field(default_factory=list)
    dist_T: List[float] = field(default_factory=list)
    dist_l2: List[float] = field(default_factory=list)
    v_proxy: List[float] = field(default_factory=list)


def _h2_level(s: State, p: PhysParams, g: Grid) -> float:
    return math.sqrt(
        l2sq(apply_L1(s.v1, p, g), g)
        + l2sq(apply_L1(s.v2, p, g), g)
        + l2sq(apply_L2(s.T, p, g), g)
    )


def two_trajectory_contraction(
    s_a: State,
    s_b: State,
    p: PhysParams,
    g: Grid,
    cfg: StepConfig,
    poisson: PoissonSolve = PoissonSolve(),
) -> ContractionReport:
    """Integrate two states side by side and track their separation.

    Emits the L2 distances and a V-level proxy sqrt(d_L2) * sqrt(H2_a + H2_b)
    from the interpolation form with constant one (reported, never asserted
    against an analytic value).  Both states must share the heat source.
    """
    if not np.array_equal(s_a.Q, s_b.Q):
        raise ConfigError("contraction probe requires identical heat sources")
    a, b = s_a.copy(), s_b.copy()
    for s in (a, b):
        s.fill_all_ghosts(p, g)
        if not cfg.temperature_only:
            project(s, cfg.dt, p, g, poisson)
        s.refresh_w(p, g)

    report = ContractionReport()

    def sample(t):
        dv = math.sqrt(
            l2sq(a.v1[INTERIOR] - b.v1[INTERIOR], g)
            + l2sq(a.v2[INTERIOR] - b.v2[INTERIOR], g)
        )
        dT = math.sqrt(l2sq(a.T[INTERIOR] - b.T[INTERIOR], g))
        dist = math.hypot(dv, dT)
        proxy = math.sqrt(dist) * math.sqrt(_h2_level(a, p, g) + _h2_level(b, p, g))
        report.times.append(t)
        report.dist_v.append(dv)
        report.dist_T.append(dT)
        report.dist_l2.append(dist)
        report.v_proxy.append(proxy)

    sample(0.0)
    n_steps = int(round(cfg.t_end / cfg.dt))
    for n in range(1, n_steps + 1):
        step(a, cfg.dt, p, g, cfg, poisson)
        step(b, cfg.dt, p, g, cfg, poisson)
        if n % cfg.output_every == 0 or n == n_steps:
            sample(n * cfg.dt)
    return report
