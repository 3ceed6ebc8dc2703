"""Run configuration: a YAML file with ``system``, ``schedule`` and ``command`` sections.

Unknown keys are rejected everywhere.  Validation errors name the offending
field and, when it can be located, its line in the file.
"""
from __future__ import annotations

import copy
import math
from pathlib import Path
from typing import Annotated, Literal, Union

import numpy as np
import yaml
from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from .errors import ConfigError
from .model import SystemParams
from .protocol import PhotonState, design_phase_schedule
from .schedules import CycleDesign, PulseSchedule, SampledSchedule, constant_schedule, cycle_for_margin


class Strict(BaseModel):
    model_config = ConfigDict(extra="forbid")


class SystemConfig(Strict):
    g_sqrt_N: float = Field(1.0, gt=0)
    delta_p: float = 0.0
    delta_1: float = 0.0
    delta_2: float = 0.0


class CycleSchedule(Strict):
    """Write / rotate / read loops; durations follow from ``max_margin`` unless all are given."""

    kind: Literal["cycle"] = "cycle"
    omega_max: float = Field(100.0, gt=0)
    omega_min: float = Field(0.01, gt=0)
    sweep: float = 1.0
    loops: int = Field(1, ge=1)
    kappa_start: float = Field(0.0, ge=0, le=math.pi / 2)
    hold_time: float = Field(0.0, ge=0)
    close: bool = True
    max_margin: float | None = Field(1e-3, gt=0)
    ramp_time: float | None = Field(None, gt=0)
    sweep_time: float | None = Field(None, gt=0)
    return_time: float | None = Field(None, gt=0)

    @model_validator(mode="after")
    def _durations(self):
        explicit = [self.ramp_time, self.sweep_time, self.return_time]
        if self.max_margin is None and any(x is None for x in explicit):
            raise ValueError("without max_margin, ramp_time, sweep_time and return_time are required")
        return self


class DesignSchedule(Strict):
    """Cycle whose kappa sweep is bisected so that phi(T) = target_phi."""

    kind: Literal["design"]
    target_phi: float
    max_margin: float = Field(1e-3, gt=0)
    omega_max: float = Field(100.0, gt=0)
    omega_min: float = Field(0.01, gt=0)
    hold_time: float = Field(0.0, ge=0)
    loops: int | None = Field(None, ge=1)


class ConstantSchedule(Strict):
    kind: Literal["constant"]
    omega_1: float = Field(ge=0)
    omega_2: float = Field(ge=0)
    duration: float = Field(gt=0)


class SampledScheduleConfig(Strict):
    kind: Literal["sampled"]
    times: list[float] = Field(min_length=2)
    omega_1: list[float]
    omega_2: list[float]


ScheduleConfig = Annotated[
    Union[CycleSchedule, DesignSchedule, ConstantSchedule, SampledScheduleConfig],
    Field(discriminator="kind"),
]


class InputConfig(Strict):
    kind: Literal["fock", "random", "coefficients"] = "fock"
    l: int = Field(1, ge=0)
    l_max: int = Field(2, ge=0)
    coefficients: list[tuple[float, float]] | None = None

    @model_validator(mode="after")
    def _coefficients(self):
        if self.kind == "coefficients" and not self.coefficients:
            raise ValueError("kind 'coefficients' needs a non-empty coefficients list of [re, im] pairs")
        return self


class HolonomyOptions(Strict):
    sectors: list[int] = Field(default_factory=lambda: [1, 2], min_length=1)
    samples: int = Field(201, ge=2)
    tol: float = Field(1e-13, gt=0)


class ProtocolOptions(Strict):
    input: InputConfig = Field(default_factory=InputConfig)
    samples: int = Field(201, ge=2)
    ratio: float = Field(10.0, gt=1)


class FiniteNOptions(Strict):
    atoms: list[int] = Field(default_factory=lambda: [2, 3, 4, 5, 6])
    n_max: int = Field(1, ge=1)


SUITES = ("darkness", "connection", "unitarity", "closed_form", "finite_n")


class VerifyOptions(Strict):
    suites: list[Literal["darkness", "connection", "unitarity", "closed_form", "finite_n"]] = \
        Field(default_factory=lambda: list(SUITES))
    samples: int = Field(50, ge=1)
    sectors: list[int] = Field(default_factory=lambda: [0, 1, 2, 3])
    finite_n: FiniteNOptions = Field(default_factory=FiniteNOptions)


class Knob(Strict):
    path: str
    values: list[float]


class SweepOptions(Strict):
    knobs: list[Knob] = Field(default_factory=list, max_length=2)
    metric: Literal["fidelity", "deviation", "path_dependence", "phi"] = "fidelity"
    sector: int = Field(1, ge=1)
    companion_hold: float = Field(100.0, gt=0)
    workers: int = Field(1, ge=1)


class CommandConfig(Strict):
    mode: Literal["adiabatic", "exact", "both"] = "adiabatic"
    seed: int | None = Field(None, ge=0, lt=2 ** 64)
    holonomy: HolonomyOptions = Field(default_factory=HolonomyOptions)
    protocol: ProtocolOptions = Field(default_factory=ProtocolOptions)
    verify: VerifyOptions = Field(default_factory=VerifyOptions)
    sweep: SweepOptions = Field(default_factory=SweepOptions)


class RunConfig(Strict):
    system: SystemConfig = Field(default_factory=SystemConfig)
    schedule: ScheduleConfig = Field(default_factory=CycleSchedule)
    command: CommandConfig = Field(default_factory=CommandConfig)


def _line_of(root, loc) -> int | None:
    """1-based line of the deepest node along ``loc`` in a composed YAML tree."""
    node, line = root, None
    for key in loc:
        if node is None:
            break
        line = node.start_mark.line + 1
        if isinstance(node, yaml.MappingNode):
            node = next((v for k, v in node.value if k.value == str(key)), None)
        elif isinstance(node, yaml.SequenceNode) and isinstance(key, int) and key < len(node.value):
            node = node.value[key]
        else:
            node = None
    if node is not None:
        line = node.start_mark.line + 1
    return line


def _describe(err: ValidationError, root) -> str:
    lines = []
    for e in err.errors():
        # drop discriminator tags pydantic inserts into the location
        loc = [x for x in e["loc"] if x not in ("cycle", "design", "constant", "sampled")]
        field = ".".join(str(x) for x in loc) or "<root>"
        where = _line_of(root, loc) if root is not None else None
        at = f" (line {where})" if where else ""
        lines.append(f"{field}{at}: {e['msg']}")
    return "invalid configuration:\n  " + "\n  ".join(lines)


def parse_config(text: str) -> RunConfig:
    try:
        data = yaml.safe_load(text) or {}
        root = yaml.compose(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        at = f" at line {mark.line + 1}, column {mark.column + 1}" if mark else ""
        raise ConfigError(f"YAML syntax error{at}: {getattr(exc, 'problem', exc)}") from None
    if not isinstance(data, dict):
        raise ConfigError("configuration must be a mapping with system / schedule / command sections")
    try:
        return RunConfig.model_validate(data)
    except ValidationError as exc:
        raise ConfigError(_describe(exc, root)) from None


def load_config(path) -> RunConfig:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
    return parse_config(text)


def with_value(cfg: RunConfig, path: str, value) -> RunConfig:
    """Copy of ``cfg`` with the dotted ``path`` set to ``value`` and re-validated."""
    data = copy.deepcopy(cfg.model_dump())
    keys = path.split(".")
    node = data
    for k in keys[:-1]:
        if not isinstance(node, dict) or k not in node:
            raise ConfigError(f"sweep knob {path!r}: no section {k!r}")
        node = node[k]
    if not isinstance(node, dict) or keys[-1] not in node:
        raise ConfigError(f"sweep knob {path!r}: unknown field {keys[-1]!r}")
    node[keys[-1]] = value
    try:
        return RunConfig.model_validate(data)
    except ValidationError as exc:
        raise ConfigError(_describe(exc, None)) from None


def system_params(cfg: RunConfig) -> SystemParams:
    return SystemParams(**cfg.system.model_dump())


def build_schedule(cfg: RunConfig, p: SystemParams | None = None) -> PulseSchedule:
    p = p or system_params(cfg)
    sc = cfg.schedule
    g = p.g_sqrt_N
    if isinstance(sc, CycleSchedule):
        if sc.max_margin is not None and None in (sc.ramp_time, sc.sweep_time, sc.return_time):
            design = cycle_for_margin(sc.max_margin, g, omega_max=sc.omega_max, omega_min=sc.omega_min,
                                      sweep=sc.sweep, loops=sc.loops, kappa_start=sc.kappa_start,
                                      hold_time=sc.hold_time, close=sc.close)
        else:
            design = CycleDesign(omega_max=sc.omega_max, omega_min=sc.omega_min, sweep=sc.sweep,
                                 loops=sc.loops, kappa_start=sc.kappa_start, ramp_time=sc.ramp_time,
                                 sweep_time=sc.sweep_time, return_time=sc.return_time,
                                 hold_time=sc.hold_time, close=sc.close)
        return design.build(g)
    if isinstance(sc, DesignSchedule):
        family = CycleDesign(omega_max=sc.omega_max, omega_min=sc.omega_min, hold_time=sc.hold_time)
        return design_phase_schedule(p, sc.target_phi, family, max_margin_bound=sc.max_margin,
                                     loops=sc.loops)
    if isinstance(sc, ConstantSchedule):
        return constant_schedule(sc.omega_1, sc.omega_2, sc.duration)
    return SampledSchedule(sc.times, sc.omega_1, sc.omega_2)


def photon_input(cfg: RunConfig, rng: np.random.Generator) -> PhotonState:
    inp = cfg.command.protocol.input
    if inp.kind == "fock":
        return PhotonState.fock(inp.l)
    if inp.kind == "random":
        return PhotonState.random(inp.l_max, rng)
    c = np.array([complex(re, im) for re, im in inp.coefficients])
    return PhotonState(c)
