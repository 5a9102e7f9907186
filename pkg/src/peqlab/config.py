"""Flat key=value run configuration.

The format is deliberately tiny: one `section.key = value` per line, `#`
comments, nothing nested.  Unknown keys, duplicates, and malformed lines are
hard errors with line numbers; physical values are validated through the
same invariants the library enforces.  Serialization writes every key with
17 significant digits so parse -> serialize -> parse is the identity.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError
from .grid import INTERIOR, Grid, make_grid
from .integrator import RunChecks, StepConfig
from .model import State
from .params import PhysParams
from .projection import PoissonSolve
from .tail import TailConfig


def _parse_bool(text: str) -> bool:
    if text == "true":
        return True
    if text == "false":
        return False
    raise ValueError(f"expected true/false, got {text!r}")


def _parse_float_list(text: str):
    return tuple(float(tok.strip()) for tok in text.split(",") if tok.strip())


def _parse_int_list(text: str):
    return tuple(int(tok.strip()) for tok in text.split(",") if tok.strip())


def _fmt(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return f"{value:.17g}"
    if isinstance(value, tuple):
        return ",".join(_fmt(v) for v in value)
    return str(value)


# key -> (parser, default); declaration order defines the serialized order
KEY_SPEC = {
    "physics.re1": (float, 1.0),
    "physics.re2": (float, 1.0),
    "physics.rt1": (float, 1.0),
    "physics.rt2": (float, 1.0),
    "physics.ro": (float, 1.0),
    "physics.f0": (float, 1.0),
    "physics.beta": (float, 0.5),
    "physics.alpha": (float, 2.0),
    "physics.h": (float, 0.5),
    "physics.l": (float, 1.0),
    "physics.lx": (float, 2.0),
    "grid.nx": (int, 32),
    "grid.ny": (int, 16),
    "grid.nz": (int, 8),
    "step.dt": (float, 0.01),
    "step.t_end": (float, 2.0),
    "step.cfl_target": (float, 0.5),
    "step.dt_max": (float, 0.1),
    "step.diffusion_tol": (float, 1e-12),
    "step.output_every": (int, 10),
    "step.temperature_only": (_parse_bool, False),
    "step.engine": (str, "eigen"),
    "init.kind": (str, "zero"),
    "init.center_x": (float, 0.0),
    "init.center_y": (float, 0.25),
    "init.center_z": (float, -0.25),
    "init.width": (float, 0.25),
    "init.t_amplitude": (float, 1.0),
    "init.v_amplitude": (float, 0.0),
    "q.kind": (str, "zero"),
    "q.center_x": (float, 0.0),
    "q.center_y": (float, 0.25),
    "q.center_z": (float, -0.25),
    "q.width": (float, 0.12),
    "q.amplitude": (float, 0.5),
    "q.path": (str, ""),
    "poisson.tolerance": (float, 1e-12),
    "poisson.max_iter": (int, 5000),
    "poisson.kind": (str, "auto"),
    "output.dir": (str, "out"),
    "output.snapshots": (_parse_bool, False),
    "check.poincare_tol": (float, 1e-2),
    "check.energy_slack": (float, 1e-8),
    "check.gronwall_factor": (float, 1.05),
    "check.div_tol": (float, 1e-8),
    "check.poincare": (_parse_bool, True),
    "check.constraint": (_parse_bool, True),
    "check.energy": (str, "auto"),
    "check.gronwall": (_parse_bool, False),
    "tail.radii": (_parse_float_list, (1.2, 1.6, 1.9)),
    "tail.epsilon": (float, 1e-3),
    "tail.tau_probe": (float, 2.0),
    "tail.pair_seed": (int, 0),
    "truncate.factor": (int, 2),
    "truncate.max_rel": (float, 0.0),
    "contract.t_scale": (float, 1.5),
    "contract.shift_x": (float, 0.2),
    "mms.sizes": (_parse_int_list, (8, 16, 32)),
    "mms.dt": (float, 2e-3),
    "mms.horizon": (float, 0.1),
    "accept.radius_sq": (float, 0.0),
    "accept.entry_gap": (float, 0.0),
}


@dataclass
class RunConfig:
    values: dict = field(default_factory=dict)

    def __post_init__(self):
        merged = {key: default for key, (_, default) in KEY_SPEC.items()}
        merged.update(self.values)
        self.values = merged
        self.validate()

    def __getitem__(self, key):
        return self.values[key]

    def validate(self):
        try:
            self.params()
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        if self["init.kind"] not in ("zero", "gaussian", "mms"):
            raise ConfigError(f"unknown init.kind {self['init.kind']!r}")
        if self["q.kind"] not in ("zero", "gaussian", "file"):
            raise ConfigError(f"unknown q.kind {self['q.kind']!r}")
        if self["q.kind"] == "file" and not self["q.path"]:
            raise ConfigError("q.kind = file requires q.path")
        if self["check.energy"] not in ("auto", "on", "off"):
            raise ConfigError("check.energy must be auto, on, or off")
        try:
            self.step_config()
            self.poisson()
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        return self

    # builders ---------------------------------------------------------------
    def params(self) -> PhysParams:
        v = self.values
        return PhysParams(
            re1=v["physics.re1"], re2=v["physics.re2"],
            rt1=v["physics.rt1"], rt2=v["physics.rt2"],
            ro=v["physics.ro"], f0=v["physics.f0"], beta=v["physics.beta"],
            alpha=v["physics.alpha"], h=v["physics.h"], l=v["physics.l"],
            lx=v["physics.lx"],
        )

    def grid(self) -> Grid:
        try:
            return make_grid(self.params(), self["grid.nx"], self["grid.ny"], self["grid.nz"])
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc

    def step_config(self) -> StepConfig:
        v = self.values
        return StepConfig(
            dt=v["step.dt"], t_end=v["step.t_end"], cfl_target=v["step.cfl_target"],
            dt_max=v["step.dt_max"], diffusion_tol=v["step.diffusion_tol"],
            output_every=v["step.output_every"],
            temperature_only=v["step.temperature_only"], engine=v["step.engine"],
        )

    def poisson(self) -> PoissonSolve:
        return PoissonSolve(
            tolerance=self["poisson.tolerance"],
            max_iter=self["poisson.max_iter"],
            kind=self["poisson.kind"],
        )

    def checks(self) -> RunChecks:
        v = self.values
        energy = {"auto": None, "on": True, "off": False}[v["check.energy"]]
        return RunChecks(
            poincare_tol=v["check.poincare_tol"], energy_slack=v["check.energy_slack"],
            gronwall_factor=v["check.gronwall_factor"], div_tol=v["check.div_tol"],
            check_poincare=v["check.poincare"], check_constraint=v["check.constraint"],
            check_energy=energy, check_gronwall=v["check.gronwall"],
        )

    def tail_config(self) -> TailConfig:
        v = self.values
        return TailConfig(
            radii=v["tail.radii"], epsilon=v["tail.epsilon"],
            tau_probe=v["tail.tau_probe"], pair_seed=v["tail.pair_seed"],
        )

    def q_field(self, g: Grid, p: PhysParams) -> np.ndarray:
        kind = self["q.kind"]
        if kind == "zero":
            return np.zeros((g.nx, g.ny, g.nz))
        if kind == "gaussian":
            x, y, z = g.coords()
            return self._blob(x, y, z, "q") * np.ones((g.nx, g.ny, g.nz))
        data = np.load(self["q.path"])
        if data.shape != (g.nx, g.ny, g.nz):
            raise ConfigError(
                f"q file shape {data.shape} does not match grid {(g.nx, g.ny, g.nz)}"
            )
        return np.asarray(data, dtype=float)

    def _blob(self, x, y, z, section):
        v = self.values
        w = v[f"{section}.width"]
        amp = v[f"{section}.amplitude"] if section == "q" else 1.0
        return amp * np.exp(
            -((x - v[f"{section}.center_x"]) ** 2) / (2 * w * w)
            - ((y - v[f"{section}.center_y"]) ** 2) / (2 * w * w)
            - ((z - v[f"{section}.center_z"]) ** 2) / (2 * w * w)
        )

    def initial_state(self, p: PhysParams, g: Grid) -> State:
        s = State.zeros(g)
        kind = self["init.kind"]
        if kind == "gaussian":
            x, y, z = g.coords()
            blob = self._blob(x, y, z, "init") * np.ones((g.nx, g.ny, g.nz))
            s.T[INTERIOR] = self["init.t_amplitude"] * blob
            s.v1[INTERIOR] = self["init.v_amplitude"] * blob
            s.v2[INTERIOR] = -self["init.v_amplitude"] * blob
        elif kind == "mms":
            from .mms import MmsSpec, mms_forcing

            spec = MmsSpec(p)
            s = spec.state(g)
            f1, f2, q = mms_forcing(spec, p, g)
            s.body_force = (f1, f2)
            s.Q = q
            return s
        s.Q = self.q_field(g, p)
        s.fill_all_ghosts(p, g)
        s.refresh_w(p, g)
        return s


def parse_config(text: str) -> RunConfig:
    """Strict parse of the flat sectioned key=value format."""
    values = {}
    seen_lines = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key = value, got {raw.strip()!r}")
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        if key not in KEY_SPEC:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        if key in seen_lines:
            raise ConfigError(
                f"line {lineno}: duplicate key {key!r} (first set on line {seen_lines[key]})"
            )
        seen_lines[key] = lineno
        parser, _ = KEY_SPEC[key]
        try:
            values[key] = parser(value)
        except ValueError as exc:
            raise ConfigError(f"line {lineno}: bad value for {key}: {exc}") from exc
    return RunConfig(values)


def parse_config_file(path) -> RunConfig:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return parse_config(fh.read())
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc


def serialize_config(cfg: RunConfig) -> str:
    lines = [f"{key} = {_fmt(cfg.values[key])}" for key in KEY_SPEC]
    return "\n".join(lines) + "\n"
