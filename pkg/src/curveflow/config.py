"""Run configuration: strict JSON parsing, validation, and built-in presets."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Optional

from .errors import ConfigError

__all__ = [
    "EnergySpec",
    "NewtonSpec",
    "EliminationSpec",
    "SteadySpec",
    "InitialSpec",
    "OutputSpec",
    "RunConfig",
    "parse_config",
    "builtin_presets",
    "preset_config",
]

LINE_ELEMENTS = ("mid", "old", "new")


@dataclass(frozen=True)
class EnergySpec:
    kind: str
    epsilon: Optional[float] = None


@dataclass(frozen=True)
class NewtonSpec:
    tol: float = 1e-10
    max_iter: int = 50
    retry_max: int = 8


@dataclass(frozen=True)
class EliminationSpec:
    enabled: bool = False
    factor: float = 0.1
    floor: float = 0.05


@dataclass(frozen=True)
class SteadySpec:
    tol: float = 1e-6
    steps: int = 10


@dataclass(frozen=True)
class InitialSpec:
    preset: Optional[str] = None
    scale: float = 1.0
    control_points: Optional[tuple] = None
    samples: Optional[tuple] = None


@dataclass(frozen=True)
class OutputSpec:
    frames: Optional[str] = None
    energy_csv: Optional[str] = None
    svg_dir: Optional[str] = None
    svg_every: int = 10


@dataclass(frozen=True)
class RunConfig:
    energy: EnergySpec
    degree: int
    spans: int
    tau: float
    t_end: float
    quadrature_points: int = 5
    newton: NewtonSpec = field(default_factory=NewtonSpec)
    elimination: EliminationSpec = field(default_factory=EliminationSpec)
    line_element: str = "mid"
    initial: InitialSpec = field(default_factory=InitialSpec)
    steady: SteadySpec = field(default_factory=SteadySpec)
    outputs: OutputSpec = field(default_factory=OutputSpec)

    def energy_density(self):
        from .energy import make_energy

        return make_energy(self.energy.kind, self.energy.epsilon)


def _check_keys(section: dict, allowed: tuple, where: str):
    unknown = set(section) - set(allowed)
    if unknown:
        raise ConfigError(f"unknown key {sorted(unknown)[0]!r} in {where}")


def _number(section, key, where, *, positive=False, nonneg=False, default=None):
    if key not in section:
        if default is None:
            raise ConfigError(f"missing required key {where}.{key}")
        return default
    value = section[key]
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{where}.{key} must be a number, got {value!r}")
    value = float(value)
    if positive and not value > 0:
        raise ConfigError(f"{where}.{key} must be > 0, got {value}")
    if nonneg and value < 0:
        raise ConfigError(f"{where}.{key} must be >= 0, got {value}")
    return value


def _integer(section, key, where, *, minimum=None, default=None):
    if key not in section:
        if default is None:
            raise ConfigError(f"missing required key {where}.{key}")
        return default
    value = section[key]
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(f"{where}.{key} must be an integer, got {value!r}")
    if minimum is not None and value < minimum:
        raise ConfigError(f"{where}.{key} must be >= {minimum}, got {value}")
    return value


def _point_list(value, where):
    if not isinstance(value, (list, tuple)) or not value:
        raise ConfigError(f"{where} must be a non-empty list of [x, y] pairs")
    points = []
    for entry in value:
        if (
            not isinstance(entry, (list, tuple))
            or len(entry) != 2
            or any(isinstance(c, bool) or not isinstance(c, (int, float)) for c in entry)
        ):
            raise ConfigError(f"{where} must contain [x, y] number pairs, got {entry!r}")
        points.append((float(entry[0]), float(entry[1])))
    return tuple(points)


def parse_config(document) -> RunConfig:
    """Parse and validate a configuration document (JSON text or dict).

    Parsing is strict: unknown keys are rejected, and every structural
    invariant (degree vs. energy order, spans vs. degree, positivity of the
    increments) is checked here so a parsed config is always runnable.
    """
    if isinstance(document, (str, bytes)):
        try:
            raw = json.loads(document)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config is not valid JSON: {exc}") from exc
    else:
        raw = document
    if not isinstance(raw, dict):
        raise ConfigError(f"config must be a JSON object, got {type(raw).__name__}")

    _check_keys(
        raw,
        (
            "energy",
            "degree",
            "spans",
            "tau",
            "t_end",
            "quadrature_points",
            "newton",
            "elimination",
            "line_element",
            "initial",
            "steady",
            "outputs",
        ),
        "config",
    )

    energy_raw = raw.get("energy")
    if not isinstance(energy_raw, dict):
        raise ConfigError("missing or malformed required section 'energy'")
    _check_keys(energy_raw, ("kind", "epsilon"), "energy")
    kind = energy_raw.get("kind")
    if kind not in ("length", "elastic"):
        raise ConfigError(f"energy.kind must be 'length' or 'elastic', got {kind!r}")
    epsilon = None
    if kind == "elastic":
        epsilon = _number(energy_raw, "epsilon", "energy", positive=True)
    elif "epsilon" in energy_raw:
        raise ConfigError("energy.epsilon is only meaningful for kind 'elastic'")
    energy = EnergySpec(kind=kind, epsilon=epsilon)
    order = 2 if kind == "elastic" else 1

    degree = _integer(raw, "degree", "config", minimum=1, default=3)
    if degree < order + 1:
        raise ConfigError(
            f"degree must be >= {order + 1} for {kind} energy, got degree={degree}"
        )
    spans = _integer(raw, "spans", "config", minimum=2)
    if spans <= degree:
        raise ConfigError(f"spans must exceed degree, got spans={spans}, degree={degree}")
    tau = _number(raw, "tau", "config", positive=True)
    t_end = _number(raw, "t_end", "config", positive=True)
    quadrature_points = _integer(raw, "quadrature_points", "config", minimum=1, default=5)
    if quadrature_points > 32:
        raise ConfigError(f"quadrature_points must be <= 32, got {quadrature_points}")

    newton_raw = raw.get("newton", {})
    if not isinstance(newton_raw, dict):
        raise ConfigError("'newton' must be an object")
    _check_keys(newton_raw, ("tol", "max_iter", "retry_max"), "newton")
    newton = NewtonSpec(
        tol=_number(newton_raw, "tol", "newton", positive=True, default=1e-10),
        max_iter=_integer(newton_raw, "max_iter", "newton", minimum=1, default=50),
        retry_max=_integer(newton_raw, "retry_max", "newton", minimum=0, default=8),
    )

    elim_raw = raw.get("elimination", {})
    if not isinstance(elim_raw, dict):
        raise ConfigError("'elimination' must be an object")
    _check_keys(elim_raw, ("enabled", "factor", "floor"), "elimination")
    enabled = elim_raw.get("enabled", False)
    if not isinstance(enabled, bool):
        raise ConfigError(f"elimination.enabled must be a boolean, got {enabled!r}")
    elimination = EliminationSpec(
        enabled=enabled,
        factor=_number(elim_raw, "factor", "elimination", positive=True, default=0.1),
        floor=_number(elim_raw, "floor", "elimination", nonneg=True, default=0.05),
    )

    line_element = raw.get("line_element", "mid")
    if line_element not in LINE_ELEMENTS:
        raise ConfigError(
            f"line_element must be one of {LINE_ELEMENTS}, got {line_element!r}"
        )

    initial_raw = raw.get("initial")
    if not isinstance(initial_raw, dict):
        raise ConfigError("missing or malformed required section 'initial'")
    _check_keys(initial_raw, ("preset", "scale", "control_points", "samples"), "initial")
    modes = [k for k in ("preset", "control_points", "samples") if k in initial_raw]
    if len(modes) != 1:
        raise ConfigError(
            "initial must specify exactly one of 'preset', 'control_points', 'samples'"
        )
    if "scale" in initial_raw and modes != ["preset"]:
        raise ConfigError("initial.scale only applies to preset initial curves")
    if modes == ["preset"]:
        preset = initial_raw["preset"]
        from .shapes import SHAPES

        if preset not in SHAPES:
            raise ConfigError(
                f"initial.preset must be one of {sorted(SHAPES)}, got {preset!r}"
            )
        initial = InitialSpec(
            preset=preset,
            scale=_number(initial_raw, "scale", "initial", positive=True, default=1.0),
        )
    elif modes == ["control_points"]:
        points = _point_list(initial_raw["control_points"], "initial.control_points")
        if len(points) != spans:
            raise ConfigError(
                f"initial.control_points must have exactly spans={spans} points, "
                f"got {len(points)}"
            )
        initial = InitialSpec(control_points=points)
    else:
        points = _point_list(initial_raw["samples"], "initial.samples")
        if len(points) < spans:
            raise ConfigError(
                f"initial.samples needs at least spans={spans} points, got {len(points)}"
            )
        initial = InitialSpec(samples=points)

    steady_raw = raw.get("steady", {})
    if not isinstance(steady_raw, dict):
        raise ConfigError("'steady' must be an object")
    _check_keys(steady_raw, ("tol", "steps"), "steady")
    steady = SteadySpec(
        tol=_number(steady_raw, "tol", "steady", positive=True, default=1e-6),
        steps=_integer(steady_raw, "steps", "steady", minimum=1, default=10),
    )

    outputs_raw = raw.get("outputs", {})
    if not isinstance(outputs_raw, dict):
        raise ConfigError("'outputs' must be an object")
    _check_keys(outputs_raw, ("frames", "energy_csv", "svg_dir", "svg_every"), "outputs")
    for key in ("frames", "energy_csv", "svg_dir"):
        if key in outputs_raw and not isinstance(outputs_raw[key], str):
            raise ConfigError(f"outputs.{key} must be a path string")
    outputs = OutputSpec(
        frames=outputs_raw.get("frames"),
        energy_csv=outputs_raw.get("energy_csv"),
        svg_dir=outputs_raw.get("svg_dir"),
        svg_every=_integer(outputs_raw, "svg_every", "outputs", minimum=1, default=10),
    )

    return RunConfig(
        energy=energy,
        degree=degree,
        spans=spans,
        tau=tau,
        t_end=t_end,
        quadrature_points=quadrature_points,
        newton=newton,
        elimination=elimination,
        line_element=line_element,
        initial=initial,
        steady=steady,
        outputs=outputs,
    )


def builtin_presets() -> dict:
    """Ready-to-run configurations for the bundled experiments.

    circle        unit circle shrinking to the steady circle of radius eps.
    figure_eight  lemniscate relaxing to the eight-shaped steady curve.
    double_loop   cardioid-like curve converging to a double-covered circle.
    limacon       small-loop limacon; with elimination on, the loop collapses
                  and the curve changes topology to a single circle.
    petal         three-petal self-crossing curve, more intricate evolution.
    counter_curl  two opposite curls, turning number one, crossings resolve.
    """
    return {
        "circle": {
            "energy": {"kind": "elastic", "epsilon": 0.1},
            "degree": 3,
            "spans": 6,
            "tau": 0.01,
            "t_end": 1.2,
            "quadrature_points": 5,
            "initial": {"preset": "circle", "scale": 1.0},
        },
        "figure_eight": {
            "energy": {"kind": "elastic", "epsilon": 0.2},
            "degree": 3,
            "spans": 12,
            "tau": 0.01,
            "t_end": 2.5,
            "quadrature_points": 5,
            "initial": {"preset": "figure_eight", "scale": 1.0},
        },
        "double_loop": {
            "energy": {"kind": "elastic", "epsilon": 0.1},
            "degree": 3,
            "spans": 12,
            "tau": 0.005,
            "t_end": 1.5,
            "quadrature_points": 5,
            "initial": {"preset": "double_loop", "scale": 0.65},
        },
        "limacon": {
            "energy": {"kind": "elastic", "epsilon": 0.2},
            "degree": 3,
            "spans": 20,
            "tau": 0.005,
            "t_end": 3.0,
            "quadrature_points": 5,
            # Factor tuned so the crowding-driven eliminations fire inside the
            # loop-absorption phase, where the energy plunges.
            "elimination": {"enabled": True, "factor": 0.45},
            "initial": {"preset": "limacon", "scale": 1.2},
        },
        "petal": {
            "energy": {"kind": "elastic", "epsilon": 0.1},
            "degree": 3,
            "spans": 24,
            "tau": 0.005,
            "t_end": 2.0,
            "quadrature_points": 5,
            "elimination": {"enabled": True},
            "initial": {"preset": "petal", "scale": 1.0},
        },
        "counter_curl": {
            "energy": {"kind": "elastic", "epsilon": 0.2},
            "degree": 3,
            "spans": 20,
            "tau": 0.005,
            "t_end": 2.5,
            "quadrature_points": 5,
            "elimination": {"enabled": True},
            "initial": {"preset": "counter_curl", "scale": 1.0},
        },
    }


def preset_config(name: str, **overrides) -> RunConfig:
    """Parse a built-in preset, optionally overriding top-level keys."""
    presets = builtin_presets()
    if name not in presets:
        raise ConfigError(f"unknown preset {name!r}; available: {', '.join(sorted(presets))}")
    doc = dict(presets[name])
    doc.update(overrides)
    return parse_config(doc)
