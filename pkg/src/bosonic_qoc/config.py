"""Experiment configuration: TOML files with explicit units, parsed into dataclasses.

Frequencies are linear and carry a unit suffix ("0.6 MHz", "5 GHz"); durations
are in ns; gate angles are in units of pi. Unknown keys are rejected and every
diagnostic names the offending field.
"""

from __future__ import annotations

import hashlib
import math
import sys
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

from .fockspace import ModeSpec
from .model import FRAMES, SystemSpec, build_multimode, preset
from .optimizer import OptimizerConfig
from .targets import LAYER_ALIASES
from .units import TWO_PI, parse_frequency

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

PRESET_NAMES = ("A", "B")

_SCHEMA = {
    "system": {"preset", "guard_control", "guard_cavity", "frame", "modes", "cross_kerr", "name"},
    "pulse": {"splines", "duration_ns", "steps", "method", "expected_carriers"},
    "gate": {"layer", "angles_over_pi", "graph"},
    "optimizer": {"max_iterations", "max_iterations_range", "target_fidelity", "restarts", "memory",
                  "seed", "bound_MHz", "gradient_tol"},
    "output": {"directory"},
}
_MODE_KEYS = {"label", "essential", "guard", "frequency", "self_kerr"}


class ConfigError(ValueError):
    """Invalid configuration; the message starts with the dotted field name."""

    def __init__(self, field_name: str, message: str):
        super().__init__(f"{field_name}: {message}")
        self.field = field_name


@dataclass
class PulseConfig:
    splines: int = 10
    durations_ns: list = field(default_factory=lambda: [500.0])
    steps: int | None = None
    method: str = "split"
    expected_carriers: int | None = None


@dataclass
class GateConfig:
    layer: str = "mix"
    angles_over_pi: list = field(default_factory=lambda: [0.2])
    graph: list | None = None

    @property
    def angles(self) -> list[float]:
        return [a * math.pi for a in self.angles_over_pi]


@dataclass
class ExperimentConfig:
    system: SystemSpec
    frame: str
    pulse: PulseConfig
    gate: GateConfig
    optimizer: OptimizerConfig
    output_dir: Path
    max_iterations_range: tuple | None = None
    source_text: str = ""

    @property
    def config_hash(self) -> str:
        return hashlib.sha256(self.source_text.encode()).hexdigest()[:16]


def _require(table: dict, key: str, where: str):
    if key not in table:
        raise ConfigError(f"{where}.{key}", "missing required field")
    return table[key]


def _check_keys(table: dict, allowed: set, where: str):
    if not isinstance(table, dict):
        raise ConfigError(where, "expected a table")
    unknown = sorted(set(table) - allowed)
    if unknown:
        raise ConfigError(f"{where}.{unknown[0]}", f"unknown key (allowed: {', '.join(sorted(allowed))})")


def _int(value, where: str, minimum: int | None = None) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(where, f"expected an integer, got {value!r}")
    if minimum is not None and value < minimum:
        raise ConfigError(where, f"must be >= {minimum}")
    return value


def _number(value, where: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(where, f"expected a number, got {value!r}")
    return float(value)


def _frequency(value, where: str) -> float:
    try:
        return parse_frequency(value)
    except ValueError as exc:
        raise ConfigError(where, str(exc)) from None


def _system(table: dict) -> tuple[SystemSpec, str]:
    _check_keys(table, _SCHEMA["system"], "system")
    frame = table.get("frame", "rotating")
    if frame not in FRAMES:
        raise ConfigError("system.frame", f"must be one of {FRAMES}")
    if "preset" in table:
        if "modes" in table:
            raise ConfigError("system.modes", "give either a preset or explicit modes, not both")
        name = table["preset"]
        if name not in PRESET_NAMES:
            raise ConfigError("system.preset", f"unknown preset {name!r}; choose from {PRESET_NAMES}")
        gc = _int(table.get("guard_control", 3), "system.guard_control", 0)
        gm = _int(table.get("guard_cavity", 2), "system.guard_cavity", 0)
        return preset(name, gc, gm), frame

    raw = _require(table, "modes", "system")
    if not isinstance(raw, list) or len(raw) < 2:
        raise ConfigError("system.modes", "need a control mode followed by at least one cavity mode")
    modes = []
    for i, m in enumerate(raw):
        where = f"system.modes[{i}]"
        _check_keys(m, _MODE_KEYS, where)
        modes.append(ModeSpec(
            label=str(_require(m, "label", where)),
            essential_levels=_int(_require(m, "essential", where), f"{where}.essential", 1),
            guard_levels=_int(m.get("guard", 0), f"{where}.guard", 0),
            frequency=_frequency(_require(m, "frequency", where), f"{where}.frequency"),
            self_kerr=_frequency(_require(m, "self_kerr", where), f"{where}.self_kerr"),
        ))
    labels = [m.label for m in modes]
    cross = {}
    for key, value in table.get("cross_kerr", {}).items():
        pair = tuple(key.split("-"))
        if len(pair) != 2 or any(p not in labels for p in pair):
            raise ConfigError(f"system.cross_kerr.{key}", f"expected 'a-b' with a, b in {labels}")
        cross[pair] = _frequency(value, f"system.cross_kerr.{key}")
    try:
        spec = build_multimode(modes[0], modes[1:], cross_kerr=cross, name=table.get("name", "custom"))
    except ValueError as exc:
        raise ConfigError("system", str(exc)) from None
    return spec, frame


def _pulse(table: dict) -> PulseConfig:
    _check_keys(table, _SCHEMA["pulse"], "pulse")
    taus = _require(table, "duration_ns", "pulse")
    if not isinstance(taus, list):
        taus = [taus]
    if not taus:
        raise ConfigError("pulse.duration_ns", "grid is empty")
    taus = [_number(t, "pulse.duration_ns") for t in taus]
    if any(t <= 0 for t in taus):
        raise ConfigError("pulse.duration_ns", "durations must be positive")
    steps = table.get("steps")
    method = table.get("method", "split")
    if method not in ("split", "expm"):
        raise ConfigError("pulse.method", "must be 'split' or 'expm'")
    expected = table.get("expected_carriers")
    return PulseConfig(
        splines=_int(table.get("splines", 10), "pulse.splines", 3),
        durations_ns=taus,
        steps=None if steps in (None, 0) else _int(steps, "pulse.steps", 1),
        method=method,
        expected_carriers=None if expected is None else _int(expected, "pulse.expected_carriers", 0),
    )


def _gate(table: dict) -> GateConfig:
    _check_keys(table, _SCHEMA["gate"], "gate")
    layer = table.get("layer", "mix")
    if layer not in LAYER_ALIASES:
        raise ConfigError("gate.layer", f"must be one of {sorted(LAYER_ALIASES)}")
    angles = table.get("angles_over_pi", [0.0])
    if not isinstance(angles, list):
        angles = [angles]
    if not angles:
        raise ConfigError("gate.angles_over_pi", "grid is empty")
    angles = [_number(a, "gate.angles_over_pi") for a in angles]
    graph = table.get("graph")
    if graph is not None:
        if not all(isinstance(e, list) and len(e) == 2 for e in graph):
            raise ConfigError("gate.graph", "expected a list of [i, j] edges")
        graph = [tuple(_int(v, "gate.graph", 0) for v in e) for e in graph]
    return GateConfig(layer, angles, graph)


def _optimizer(table: dict, seed_override: int | None) -> tuple[OptimizerConfig, tuple | None]:
    _check_keys(table, _SCHEMA["optimizer"], "optimizer")
    rng = table.get("max_iterations_range")
    if rng is not None:
        if not (isinstance(rng, list) and len(rng) == 2):
            raise ConfigError("optimizer.max_iterations_range", "expected [low, high]")
        rng = tuple(_int(v, "optimizer.max_iterations_range", 1) for v in rng)
    bound = table.get("bound_MHz")
    kwargs = dict(
        max_iterations=_int(table.get("max_iterations", 100), "optimizer.max_iterations", 1),
        target_fidelity=_number(table.get("target_fidelity", 0.99), "optimizer.target_fidelity"),
        restarts=_int(table.get("restarts", 10), "optimizer.restarts", 1),
        memory=_int(table.get("memory", 10), "optimizer.memory", 1),
        seed=_int(table.get("seed", 0), "optimizer.seed", 0),
        bound=None if bound is None else TWO_PI * 1e6 * _number(bound, "optimizer.bound_MHz"),
    )
    if "gradient_tol" in table:
        kwargs["gradient_tol"] = _number(table["gradient_tol"], "optimizer.gradient_tol")
    if seed_override is not None:
        kwargs["seed"] = seed_override
    if rng is not None and not rng[0] <= kwargs["max_iterations"] <= rng[1]:
        raise ConfigError("optimizer.max_iterations", f"outside max_iterations_range {list(rng)}")
    try:
        return OptimizerConfig(**kwargs), rng
    except ValueError as exc:
        raise ConfigError("optimizer", str(exc)) from None


def parse_config(text: str, seed: int | None = None, base_dir: Path | None = None) -> ExperimentConfig:
    try:
        doc = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError("<file>", f"not valid TOML: {exc}") from None
    _check_keys(doc, set(_SCHEMA), "<root>")
    system, frame = _system(_require(doc, "system", "<root>"))
    pulse = _pulse(_require(doc, "pulse", "<root>"))
    gate = _gate(doc.get("gate", {}))
    optimizer, rng = _optimizer(doc.get("optimizer", {}), seed)
    out = doc.get("output", {})
    _check_keys(out, _SCHEMA["output"], "output")
    directory = Path(out.get("directory", "runs"))
    if base_dir is not None and not directory.is_absolute():
        directory = base_dir / directory
    return ExperimentConfig(system, frame, pulse, gate, optimizer, directory, rng, text)


def load_config(path, seed: int | None = None) -> ExperimentConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError("<file>", f"cannot read {path}: {exc.strerror}") from None
    return parse_config(text, seed)


def preset_config_text(name: str) -> str:
    if name not in PRESET_NAMES:
        raise ValueError(f"unknown preset {name!r}")
    return resources.files("bosonic_qoc").joinpath(f"presets/{name}.toml").read_text()


def load_preset(name: str, seed: int | None = None) -> ExperimentConfig:
    """The shipped configuration for preset "A" or "B"."""
    return parse_config(preset_config_text(name), seed)
