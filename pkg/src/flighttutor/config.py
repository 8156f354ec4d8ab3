"""Plain-text configuration: INI sections mapped onto the parameter
dataclasses, with every key addressable as section.key for overrides.

Sections: sim, expert, train, tutor, session, eval. Unknown sections
or keys are errors so typos fail loudly, and every run prints the
fully-resolved configuration before doing anything.
"""

from __future__ import annotations

import configparser
from dataclasses import dataclass, field, fields

from .autopilot import ExpertGains
from .evaluation import GATE_MAX_ACTION_DISTANCE, GATE_MAX_AVG_HEADING_ERROR
from .session import MODE_LIVE
from .simulator import SimParams
from .training import TrainConfig
from .tutor import TutorThresholds


class ConfigError(Exception):
    pass


@dataclass
class SessionSettings:
    """Flat, file-friendly view of a session; the CLI assembles the
    full SessionConfig (with its TaskSpec) from these plus flags."""

    mode: str = MODE_LIVE
    tick_hz: float = 20.0
    host: str = "127.0.0.1"
    port: int = 8070
    udp_port: int = 0      # 0 = not used
    http_port: int = 0     # 0 = no web UI listener
    static_dir: str = ""
    target_heading: float = 0.0
    target_altitude: float = 1000.0
    target_airspeed: float = 60.0
    initial_heading: float = 0.0
    duration: float = 30.0
    task_seed: int = 0
    real_time: bool = True
    trajectory_path: str = ""  # replay mode: the flight to play back


@dataclass
class EvalSettings:
    trials: int = 10
    duration: float = 30.0
    max_avg_heading_error: float = GATE_MAX_AVG_HEADING_ERROR
    max_action_distance: float = GATE_MAX_ACTION_DISTANCE


@dataclass
class CliConfig:
    sim: SimParams = field(default_factory=SimParams)
    expert: ExpertGains = field(default_factory=ExpertGains)
    train: TrainConfig = field(default_factory=TrainConfig)
    tutor: TutorThresholds = field(default_factory=TutorThresholds)
    session: SessionSettings = field(default_factory=SessionSettings)
    eval: EvalSettings = field(default_factory=EvalSettings)

    def sections(self) -> dict:
        return {
            "sim": self.sim,
            "expert": self.expert,
            "train": self.train,
            "tutor": self.tutor,
            "session": self.session,
            "eval": self.eval,
        }


def _parse_value(raw: str, current, where: str):
    raw = raw.strip()
    try:
        if isinstance(current, bool):
            low = raw.lower()
            if low in ("true", "yes", "on", "1"):
                return True
            if low in ("false", "no", "off", "0"):
                return False
            raise ValueError(f"not a boolean: {raw!r}")
        if isinstance(current, int):
            return int(raw)
        if isinstance(current, float):
            return float(raw)
        return raw
    except ValueError as exc:
        raise ConfigError(f"{where}: {exc}") from None


def _apply(config: CliConfig, section: str, key: str, raw: str) -> None:
    sections = config.sections()
    if section not in sections:
        raise ConfigError(f"unknown config section [{section}]")
    target = sections[section]
    names = {f.name for f in fields(target)}
    if key not in names:
        raise ConfigError(f"unknown config key {section}.{key}")
    value = _parse_value(raw, getattr(target, key), f"{section}.{key}")
    setattr(target, key, value)


def load_config(path: str | None = None, overrides: list[str] | None = None) -> CliConfig:
    """Defaults, then the file (if given), then section.key=value overrides."""
    config = CliConfig()
    if path is not None:
        parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
        read = parser.read(path)
        if not read:
            raise ConfigError(f"config file not found: {path}")
        for section in parser.sections():
            for key, raw in parser.items(section):
                _apply(config, section, key, raw)
    for item in overrides or []:
        if "=" not in item or "." not in item.split("=", 1)[0]:
            raise ConfigError(f"override must look like section.key=value, got {item!r}")
        dotted, raw = item.split("=", 1)
        section, key = dotted.split(".", 1)
        _apply(config, section.strip(), key.strip(), raw)
    return config


def format_resolved(config: CliConfig) -> str:
    """Deterministic dump of every key, one `section.key = value` per line."""
    lines = ["# resolved configuration"]
    for section, target in config.sections().items():
        for f in fields(target):
            lines.append(f"{section}.{f.name} = {getattr(target, f.name)!r}")
    return "\n".join(lines)
