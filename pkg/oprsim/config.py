"""Experiment configuration for opr-sim.

A configuration is a single JSON document with the sections `model`,
`attack`, `detector`, `nominal`, `planner`, `recovery`, `sweep` and
`output`. Missing keys take their defaults; unknown keys are rejected.
"""

import hashlib
import json
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Any, Optional

import numpy as np

from . import __version__
from .dynamics import LinearModel, build_default_drone_model
from .errors import ConfigError
from .planner import PlannerContext
from .recovery.controllers import CONTROLLERS, RecoverySettings
from .recovery.nominal import NominalController
from .recovery.plan import InputBounds
from .sensing import AttackKind, AttackScenario

PLANNER_KINDS = ("rule-based", "external")


@dataclass(frozen=True)
class ModelConfig:
    dt: float = 0.02
    sigma_gps: float = 0.1
    sigma_vel: float = 0.05
    q_alt: float = 1e-6
    q_vel: float = 1e-4


@dataclass(frozen=True)
class AttackConfig:
    kind: str = "bias"
    sensor: int = 0
    start_step: int = 500
    magnitude: float = 3.0
    slope: float = 0.0


@dataclass(frozen=True)
class DetectorConfig:
    drift: float = 0.2
    threshold: float = 3.0
    window: int = 60
    buffer: int = 200
    sensor: int = 0


@dataclass(frozen=True)
class NominalConfig:
    k_p: float = 2.0
    k_d: float = 2.0
    setpoint: float = 10.0


@dataclass(frozen=True)
class PlannerConfig:
    kind: str = "rule-based"
    command: Optional[str] = None
    width: float = 1.0
    z_min: float = 0.0
    z_max: float = 50.0
    history: int = 10
    timeout: float = 10.0
    p_min: float = 0.8


@dataclass(frozen=True)
class RecoveryConfig:
    controllers: tuple[str, ...] = ("opr-ol", "opr-pcl", "rtr-lqr", "vs")
    p_target: float = 0.95
    k_max: int = 500
    u_min: float = -5.0
    u_max: float = 5.0
    rho: float = 1e-6
    horizon: int = 400
    lqr_state_cost: tuple[tuple[float, ...], ...] = ((10.0, 0.0), (0.0, 1.0))
    lqr_input_cost: tuple[tuple[float, ...], ...] = ((0.1,),)


@dataclass(frozen=True)
class SweepConfig:
    noise: tuple[float, ...] = (0.5, 1.0, 2.0, 4.0, 8.0)
    seeds: int = 200
    base_seed: int = 0
    episode_length: int = 2000
    workers: int = 1


@dataclass(frozen=True)
class OutputConfig:
    results: str = "results.csv"
    db: Optional[str] = None
    plots: str = "plots"


SECTIONS: dict[str, type] = {
    "model": ModelConfig,
    "attack": AttackConfig,
    "detector": DetectorConfig,
    "nominal": NominalConfig,
    "planner": PlannerConfig,
    "recovery": RecoveryConfig,
    "sweep": SweepConfig,
    "output": OutputConfig,
}


@dataclass(frozen=True)
class ExperimentConfig:
    model: ModelConfig = field(default_factory=ModelConfig)
    attack: AttackConfig = field(default_factory=AttackConfig)
    detector: DetectorConfig = field(default_factory=DetectorConfig)
    nominal: NominalConfig = field(default_factory=NominalConfig)
    planner: PlannerConfig = field(default_factory=PlannerConfig)
    recovery: RecoveryConfig = field(default_factory=RecoveryConfig)
    sweep: SweepConfig = field(default_factory=SweepConfig)
    output: OutputConfig = field(default_factory=OutputConfig)

    def to_dict(self) -> dict[str, Any]:
        data = asdict(self)
        data["version"] = __version__
        return _listify(data)

    def digest(self) -> str:
        """SHA-256 of the canonical JSON form, ignoring the version tag and output paths."""
        data = self.to_dict()
        data.pop("version")
        data.pop("output")
        return hashlib.sha256(json.dumps(data, sort_keys=True).encode()).hexdigest()

    def build_model(self, sigma: float = 1.0) -> LinearModel:
        m = self.model
        base = build_default_drone_model(m.dt, m.sigma_gps, m.sigma_vel, m.q_alt, m.q_vel)
        return base.scaled(sigma)

    def attack_scenario(self) -> AttackScenario:
        a = self.attack
        return AttackScenario(AttackKind(a.kind), a.sensor, a.start_step, a.magnitude, a.slope)

    def bounds(self) -> InputBounds:
        return InputBounds(np.array([self.recovery.u_min]), np.array([self.recovery.u_max]))

    def nominal_controller(self) -> NominalController:
        n = self.nominal
        return NominalController(n.k_p, n.k_d, n.setpoint, self.bounds())

    def planner_context(self) -> PlannerContext:
        p = self.planner
        return PlannerContext(self.nominal.setpoint, p.z_min, p.z_max, p.width)

    def recovery_settings(self, model: LinearModel) -> RecoverySettings:
        r = self.recovery
        trusted = tuple(i for i in range(model.p) if i != self.detector.sensor)
        return RecoverySettings(
            bounds=self.bounds(),
            p_target=r.p_target,
            k_max=r.k_max,
            rho=r.rho,
            horizon=r.horizon,
            Q_c=np.array(r.lqr_state_cost, dtype=float),
            R_c=np.array(r.lqr_input_cost, dtype=float),
            trusted=trusted,
            nominal=self.nominal_controller(),
        )


def _listify(value: Any) -> Any:
    if isinstance(value, dict):
        return {k: _listify(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_listify(v) for v in value]
    return value


def _tupleify(value: Any) -> Any:
    if isinstance(value, list):
        return tuple(_tupleify(v) for v in value)
    return value


def _type_ok(value: Any, default: Any) -> bool:
    if default is None:
        return value is None or isinstance(value, str)
    if isinstance(default, bool):
        return isinstance(value, bool)
    if isinstance(default, int):
        return isinstance(value, int) and not isinstance(value, bool)
    if isinstance(default, float):
        return isinstance(value, (int, float)) and not isinstance(value, bool)
    if isinstance(default, str):
        return isinstance(value, str)
    if isinstance(default, tuple):
        return isinstance(value, (list, tuple))
    return True


def _build_section(name: str, cls: type, data: Any, problems: list[str]):
    if data is None:
        return cls()
    if not isinstance(data, dict):
        problems.append(f"{name}: expected an object")
        return cls()
    known = {f.name: f for f in fields(cls)}
    defaults = cls()
    values = {}
    for key, value in data.items():
        if key not in known:
            problems.append(f"{name}.{key}: unknown key")
            continue
        default = getattr(defaults, key)
        if not _type_ok(value, default):
            problems.append(f"{name}.{key}: expected {type(default).__name__ if default is not None else 'string or null'}")
            continue
        if isinstance(default, float):
            value = float(value)
        values[key] = _tupleify(value)
    return cls(**values)


def _validate(config: ExperimentConfig) -> list[str]:
    problems = []
    m, a, d, p, r, s = config.model, config.attack, config.detector, config.planner, config.recovery, config.sweep

    if not m.dt > 0:
        problems.append("model.dt: must be > 0")
    for key in ("sigma_gps", "sigma_vel", "q_alt", "q_vel"):
        if getattr(m, key) < 0:
            problems.append(f"model.{key}: must be >= 0")

    if a.kind not in {k.value for k in AttackKind}:
        problems.append(f"attack.kind: must be one of {', '.join(k.value for k in AttackKind)}")
    if not 0 <= a.sensor < 2:
        problems.append("attack.sensor: must be 0 (gps_alt) or 1 (velocity)")
    if a.start_step < 0:
        problems.append("attack.start_step: must be >= 0")

    if not d.threshold > 0:
        problems.append("detector.threshold: must be > 0")
    if d.drift < 0:
        problems.append("detector.drift: must be >= 0")
    if d.window < 0:
        problems.append("detector.window: must be >= 0")
    if d.buffer < 1:
        problems.append("detector.buffer: must be >= 1")
    if not 0 <= d.sensor < 2:
        problems.append("detector.sensor: must be 0 (gps_alt) or 1 (velocity)")

    if not (config.nominal.k_p > 0 and config.nominal.k_d > 0):
        problems.append("nominal: k_p and k_d must be > 0")

    if p.kind not in PLANNER_KINDS:
        problems.append(f"planner.kind: must be one of {', '.join(PLANNER_KINDS)}")
    if p.kind == "external" and not p.command:
        problems.append("planner.command: required when planner.kind is external")
    if not p.z_min < p.z_max:
        problems.append("planner: z_min must be < z_max")
    if not p.width > 0:
        problems.append("planner.width: must be > 0")
    elif p.z_min < p.z_max and p.width > p.z_max - p.z_min:
        problems.append("planner.width: must be <= z_max - z_min")
    if p.history < 1:
        problems.append("planner.history: must be >= 1")
    if not p.timeout > 0:
        problems.append("planner.timeout: must be > 0")
    if not 0.0 <= p.p_min <= 1.0:
        problems.append("planner.p_min: must be in [0, 1]")

    if not r.controllers:
        problems.append("recovery.controllers: must not be empty")
    for name in r.controllers:
        if name not in CONTROLLERS:
            problems.append(f"recovery.controllers: unknown controller '{name}'")
    if not 0.0 < r.p_target <= 1.0:
        problems.append("recovery.p_target: must be in (0, 1]")
    if r.k_max < 1:
        problems.append("recovery.k_max: must be >= 1")
    if r.horizon < 1:
        problems.append("recovery.horizon: must be >= 1")
    if not r.u_min <= r.u_max:
        problems.append("recovery: u_min must be <= u_max")
    if not r.rho > 0:
        problems.append("recovery.rho: must be > 0")
    if np.shape(r.lqr_state_cost) != (2, 2):
        problems.append("recovery.lqr_state_cost: must be 2x2")
    if np.shape(r.lqr_input_cost) != (1, 1):
        problems.append("recovery.lqr_input_cost: must be 1x1")

    if not s.noise:
        problems.append("sweep.noise: must not be empty")
    if not all(isinstance(x, (int, float)) and not isinstance(x, bool) for x in s.noise):
        problems.append("sweep.noise: multipliers must be numbers")
    elif any(not np.isfinite(x) or x < 0 for x in s.noise):
        problems.append("sweep.noise: multipliers must be finite and >= 0")
    if s.seeds < 1:
        problems.append("sweep.seeds: must be >= 1")
    if s.workers < 1:
        problems.append("sweep.workers: must be >= 1")
    if a.kind != AttackKind.NONE.value and s.episode_length <= a.start_step:
        problems.append("sweep.episode_length: must exceed attack.start_step")
    if s.episode_length < 1:
        problems.append("sweep.episode_length: must be >= 1")
    return problems


def get_default_config() -> dict:
    """Return the default configuration as a JSON-ready dict."""
    return ExperimentConfig().to_dict()


def config_from_dict(data: dict) -> ExperimentConfig:
    """Build and validate a configuration, collecting every problem before raising."""
    if not isinstance(data, dict):
        raise ConfigError(["configuration must be a JSON object"])
    problems = []
    sections = {}
    for key, value in data.items():
        if key == "version":
            continue
        if key not in SECTIONS:
            problems.append(f"{key}: unknown section")
            continue
        sections[key] = _build_section(key, SECTIONS[key], value, problems)
    config = ExperimentConfig(**sections)
    problems.extend(_validate(config))
    if problems:
        raise ConfigError(problems)
    return config


def load_config(config_path: Path) -> ExperimentConfig:
    """
    Load and validate an experiment configuration.

    Args:
        config_path: Path to the JSON document

    Returns:
        The validated configuration

    Raises:
        ConfigError: if the file is not valid JSON or any value is invalid
    """
    try:
        with open(config_path, "r") as f:
            data = json.load(f)
    except json.JSONDecodeError as e:
        raise ConfigError([f"{config_path}: invalid JSON ({e})"])
    return config_from_dict(data)


def save_config(config: ExperimentConfig, config_path: Path) -> Path:
    config_path = Path(config_path)
    config_path.parent.mkdir(parents=True, exist_ok=True)
    with open(config_path, "w") as f:
        json.dump(config.to_dict(), f, indent=2)
        f.write("\n")
    return config_path
