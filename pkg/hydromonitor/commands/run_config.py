"""
Run configuration shared by every subcommand.

A run-config file is flat text with one `section.key=value` per line; `#`
starts a comment line. Tuples are comma separated and `none` clears an
optional value. Unknown sections or keys are rejected. `dump_config` writes
the resolved configuration back in the same format, so a manifest can be
fed to `--config` again.
"""

from contextlib import contextmanager
from enum import Enum
from pathlib import Path
from typing import Dict, Iterable, Iterator, Mapping, Optional, Tuple, Type, Union, get_args, get_origin

from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from hydromonitor.dsac.agent import AgentConfig
from hydromonitor.errors import ConfigError
from hydromonitor.evaluation.trials import EvalConfig
from hydromonitor.parallel.training import TrainRunConfig
from hydromonitor.sim.arena import ArenaSpec, EnvId
from hydromonitor.sim.dynamics import Domain, DomainParams, OUParams
from hydromonitor.sim.env import EnvConfig
from hydromonitor.sim.reward import RewardWeights
from hydromonitor.sim.sensors import SensorSpec
from hydromonitor.sim.targets import MonitoringParams

RawConfig = Dict[str, Dict[str, str]]


@contextmanager
def _invalid_as_config_error(what: str) -> Iterator[None]:
    try:
        yield
    except ValidationError as e:
        raise ConfigError(f"invalid {what} configuration: {e}") from e


class SimSection(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    env_id: EnvId = EnvId.ENV1
    dt: float = 0.05
    horizon: int = 5000
    collision_radius: float = 0.3
    max_placement_draws: int = 1000
    sectors: int = 36
    obstacle_radius: float = 0.4
    obstacle_offset: float = 2.5


class DomainSection(BaseModel):
    """Per-medium dynamics and disturbance; the sensor follows the medium."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    tau_v: float
    tau_w: float
    v_max: float
    w_max: float
    ou_theta: float = 0.5
    ou_sigma: float
    ou_mu: Tuple[float, float] = (0.0, 0.0)
    ou_enabled: bool = True

    @classmethod
    def from_params(cls, params: DomainParams) -> "DomainSection":
        return cls(tau_v=params.tau_v, tau_w=params.tau_w, v_max=params.v_max, w_max=params.w_max,
                   ou_theta=params.ou.theta, ou_sigma=params.ou.sigma, ou_mu=params.ou.mu,
                   ou_enabled=params.ou.enabled)


class TrainSection(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    domain: Domain = Domain.AIR
    workers: int = 5
    episodes_total: int = 2500
    snapshot_interval: int = 100
    seed: int = 0
    queue_size: int = 64
    lockstep: Optional[bool] = None


class PolicyKind(str, Enum):
    DSAC_CHECKPOINT = "dsac_checkpoint"
    BUG2 = "bug2"
    STATIONARY = "stationary"


class PolicyConfig(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    kind: PolicyKind = PolicyKind.DSAC_CHECKPOINT
    checkpoint: Optional[str] = None


class RunConfig(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    sim: SimSection = Field(default_factory=SimSection)
    monitoring: MonitoringParams = Field(default_factory=MonitoringParams)
    reward: RewardWeights = Field(default_factory=RewardWeights)
    air: DomainSection = Field(default_factory=lambda: DomainSection.from_params(DomainParams.air()))
    water: DomainSection = Field(default_factory=lambda: DomainSection.from_params(DomainParams.water()))
    agent: AgentConfig = Field(default_factory=AgentConfig)
    train: TrainSection = Field(default_factory=TrainSection)
    eval: EvalConfig = Field(default_factory=EvalConfig)
    policy: PolicyConfig = Field(default_factory=PolicyConfig)

    @model_validator(mode="after")
    def _check_media(self) -> "RunConfig":
        if self.water.tau_v <= self.air.tau_v:
            raise ValueError("water tau_v must exceed air tau_v")
        return self

    def domain_params(self, domain: Domain) -> DomainParams:
        """
        Raises:
            ConfigError: the sensor or medium values fail validation
        """
        domain = Domain(domain)
        section = self.air if domain == Domain.AIR else self.water
        with _invalid_as_config_error(f"{domain.value} domain"):
            sensor = SensorSpec.lidar(self.sim.sectors) if domain == Domain.AIR else SensorSpec.sonar(self.sim.sectors)
            return DomainParams(
                domain=domain, dt=self.sim.dt, tau_v=section.tau_v, tau_w=section.tau_w,
                v_max=section.v_max, w_max=section.w_max, sensor=sensor,
                ou=OUParams(theta=section.ou_theta, mu=section.ou_mu, sigma=section.ou_sigma,
                            enabled=section.ou_enabled),
            )

    def env_config(self, env_id: Optional[EnvId] = None, domain: Optional[Domain] = None) -> EnvConfig:
        """
        Raises:
            ConfigError: the arena layout or environment values fail validation
        """
        sim = self.sim
        dom = self.domain_params(domain or self.train.domain)
        with _invalid_as_config_error("environment"):
            arena = ArenaSpec.preset(env_id or sim.env_id, sim.obstacle_radius, sim.obstacle_offset)
            return EnvConfig(
                arena=arena,
                domain=dom,
                monitoring=self.monitoring,
                reward=self.reward,
                horizon=sim.horizon,
                collision_radius=sim.collision_radius,
                max_placement_draws=sim.max_placement_draws,
            )

    def train_run(self) -> TrainRunConfig:
        t = self.train
        with _invalid_as_config_error("training run"):
            return TrainRunConfig(workers=t.workers, episodes_total=t.episodes_total, horizon=self.sim.horizon,
                                  snapshot_interval=t.snapshot_interval, seed=t.seed, queue_size=t.queue_size,
                                  lockstep=t.lockstep)


SECTIONS: Dict[str, Type[BaseModel]] = {
    name: info.annotation for name, info in RunConfig.model_fields.items()
}


def _parse_line(line: str, where: str) -> Optional[Tuple[str, str, str]]:
    line = line.strip()
    if not line or line.startswith("#"):
        return None
    if "=" not in line:
        raise ConfigError(f"{where}: expected section.key=value, got {line!r}")
    dotted, value = (part.strip() for part in line.split("=", 1))
    if "." not in dotted:
        raise ConfigError(f"{where}: key {dotted!r} has no section")
    section, key = dotted.split(".", 1)
    if section not in SECTIONS:
        raise ConfigError(f"{where}: unknown section {section!r}")
    if key not in SECTIONS[section].model_fields:
        raise ConfigError(f"{where}: unknown key {dotted!r}")
    return section, key, value


def parse_config_text(text: str, source: str = "<config>") -> RawConfig:
    raw: RawConfig = {}
    for number, line in enumerate(text.splitlines(), start=1):
        parsed = _parse_line(line, f"{source}:{number}")
        if parsed is not None:
            section, key, value = parsed
            raw.setdefault(section, {})[key] = value
    return raw


def apply_overrides(raw: RawConfig, overrides: Iterable[str]) -> RawConfig:
    """Return a copy of raw with `section.key=value` items applied in order."""
    merged = {section: dict(values) for section, values in raw.items()}
    for item in overrides:
        parsed = _parse_line(item, "--set")
        if parsed is None:
            continue
        section, key, value = parsed
        merged.setdefault(section, {})[key] = value
    return merged


def _coerce(annotation, raw: str):
    if get_origin(annotation) is Union:
        if raw.lower() in ("none", ""):
            return None
        annotation = next(a for a in get_args(annotation) if a is not type(None))
    if get_origin(annotation) in (tuple, list):
        return [part.strip() for part in raw.split(",") if part.strip()]
    return raw


def build_config(raw: Mapping[str, Mapping[str, str]]) -> RunConfig:
    """
    Raises:
        ConfigError: unknown keys or values that fail validation
    """
    sections = {}
    for section, values in raw.items():
        if section not in SECTIONS:
            raise ConfigError(f"unknown section {section!r}")
        model = SECTIONS[section]
        fields = {}
        for key, value in values.items():
            if key not in model.model_fields:
                raise ConfigError(f"unknown key {section}.{key}")
            fields[key] = _coerce(model.model_fields[key].annotation, value)
        sections[section] = fields
    try:
        defaults = RunConfig()
        resolved = {}
        for section, fields in sections.items():
            base = getattr(defaults, section).model_dump()
            base.update(fields)
            resolved[section] = SECTIONS[section](**base)
        return RunConfig(**resolved)
    except ValidationError as e:
        raise ConfigError(f"invalid configuration: {e}")


def load_config(path: Optional[Union[str, Path]] = None, overrides: Iterable[str] = ()) -> RunConfig:
    raw: RawConfig = {}
    if path is not None:
        try:
            text = Path(path).read_text(encoding="utf-8")
        except OSError as e:
            raise ConfigError(f"cannot read config {path}: {e}")
        raw = parse_config_text(text, str(path))
    return build_config(apply_overrides(raw, overrides))


def _format_value(value) -> str:
    if value is None:
        return "none"
    if isinstance(value, Enum):
        return str(value.value)
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (tuple, list)):
        return ",".join(_format_value(v) for v in value)
    if isinstance(value, float):
        return repr(value)
    return str(value)


def dump_config(config: RunConfig) -> str:
    lines = []
    for section in sorted(SECTIONS):
        record = getattr(config, section)
        for key in sorted(type(record).model_fields):
            lines.append(f"{section}.{key}={_format_value(getattr(record, key))}")
    return "\n".join(lines) + "\n"
