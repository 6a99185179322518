"""Pipeline configuration loaded from YAML with environment substitutions."""

from __future__ import annotations

import os
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Optional

import yaml

from .exceptions import ConfigError

CONFIG_PATH_ENV = "VWG_CONFIG_PATH"
THREADS_ENV = "VWG_THREADS"
LOG_LEVEL_ENV = "VWG_LOG_LEVEL"
DEFAULT_CONFIG_PATH = Path(__file__).resolve().parent / "config" / "config.yaml"

ENCODER_KINDS = ("layout", "wordgrid", "vwg_pad", "vwg_2enc")
SYNTH_VARIANTS = ("text", "visual")
LOSS_KINDS = ("combined", "ce")


@dataclass
class SynthSettings:
    num_docs: int = 200
    variant: str = "visual"
    width: int = 384
    height: int = 512
    seed: int = 0


@dataclass
class GridSettings:
    height: int = 256
    width: int = 192


@dataclass
class EmbedSettings:
    dim: int = 32
    seed: int = 0
    table: Optional[Path] = None
    ngram_min: int = 3
    ngram_max: int = 5
    bucket_count: int = 1 << 20


@dataclass
class NetSettings:
    base_channels: int = 16
    depth: int = 3


@dataclass
class TrainSettings:
    epochs: int = 300
    batch_size: int = 8
    lr: float = 0.001
    patience: int = 20
    seed: int = 0
    loss: str = "combined"


@dataclass
class RuntimeSettings:
    threads: int = 0
    log_level: str = "INFO"


@dataclass
class Settings:
    synth: SynthSettings = field(default_factory=SynthSettings)
    grid: GridSettings = field(default_factory=GridSettings)
    embed: EmbedSettings = field(default_factory=EmbedSettings)
    net: NetSettings = field(default_factory=NetSettings)
    train: TrainSettings = field(default_factory=TrainSettings)
    runtime: RuntimeSettings = field(default_factory=RuntimeSettings)


_ENV_VAR_PATTERN = re.compile(r"\$\{(?P<name>[A-Za-z_][A-Za-z0-9_]*)(?::-(?P<default>[^}]*))?\}")


def _substitute_env_vars(raw_text: str) -> str:
    """Replace ${VAR} or ${VAR:-default} occurrences with environment values."""

    def replace(match: re.Match[str]) -> str:
        name = match.group("name")
        default = match.group("default")
        if default is not None:
            return os.getenv(name, default)
        if name not in os.environ:
            raise ConfigError(f"Missing required environment variable: {name}")
        return os.environ[name]

    return _ENV_VAR_PATTERN.sub(replace, raw_text)


def _to_int(value: object, *, field: str, minimum: Optional[int] = None) -> int:
    if isinstance(value, bool):
        raise ConfigError(f"Invalid integer for {field}: {value!r}")
    try:
        number = int(value)  # type: ignore[arg-type]
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"Invalid integer for {field}: {value!r}") from exc
    if minimum is not None and number < minimum:
        raise ConfigError(f"{field} must be >= {minimum}, got {number}")
    return number


def _to_float(value: object, *, field: str) -> float:
    try:
        return float(value)  # type: ignore[arg-type]
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"Invalid number for {field}: {value!r}") from exc


def _to_choice(value: object, *, field: str, choices: tuple[str, ...]) -> str:
    text = str(value).lower().replace("-", "_")
    if text not in choices:
        raise ConfigError(f"{field} must be one of {', '.join(choices)}; got {value!r}")
    return text


def _section(data: dict, name: str) -> dict:
    section = data.get(name) or {}
    if not isinstance(section, dict):
        raise ConfigError(f"{name} must be a mapping if provided")
    return section


def _load_yaml(path: Path) -> dict:
    try:
        raw_text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"Unable to read config file {path}: {exc}") from exc
    substituted = _substitute_env_vars(raw_text)
    try:
        data = yaml.safe_load(substituted) or {}
    except yaml.YAMLError as exc:
        raise ConfigError(f"Invalid YAML configuration: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError("Configuration root must be a mapping")
    return data


def _load_synth(data: dict) -> SynthSettings:
    section = _section(data, "synth")
    defaults = SynthSettings()
    return SynthSettings(
        num_docs=_to_int(section.get("num_docs", defaults.num_docs), field="synth.num_docs", minimum=1),
        variant=_to_choice(section.get("variant", defaults.variant), field="synth.variant", choices=SYNTH_VARIANTS),
        width=_to_int(section.get("width", defaults.width), field="synth.width", minimum=64),
        height=_to_int(section.get("height", defaults.height), field="synth.height", minimum=64),
        seed=_to_int(section.get("seed", defaults.seed), field="synth.seed", minimum=0),
    )


def _load_grid(data: dict) -> GridSettings:
    section = _section(data, "grid")
    defaults = GridSettings()
    return GridSettings(
        height=_to_int(section.get("height", defaults.height), field="grid.height", minimum=8),
        width=_to_int(section.get("width", defaults.width), field="grid.width", minimum=8),
    )


def _load_embed(data: dict) -> EmbedSettings:
    section = _section(data, "embed")
    defaults = EmbedSettings()
    table_value = section.get("table")
    ngram_min = _to_int(section.get("ngram_min", defaults.ngram_min), field="embed.ngram_min", minimum=1)
    ngram_max = _to_int(section.get("ngram_max", defaults.ngram_max), field="embed.ngram_max", minimum=1)
    if ngram_max < ngram_min:
        raise ConfigError("embed.ngram_max must be >= embed.ngram_min")
    return EmbedSettings(
        dim=_to_int(section.get("dim", defaults.dim), field="embed.dim", minimum=1),
        seed=_to_int(section.get("seed", defaults.seed), field="embed.seed", minimum=0),
        table=Path(str(table_value)).expanduser() if table_value else None,
        ngram_min=ngram_min,
        ngram_max=ngram_max,
        bucket_count=_to_int(
            section.get("bucket_count", defaults.bucket_count), field="embed.bucket_count", minimum=1
        ),
    )


def _load_net(data: dict) -> NetSettings:
    section = _section(data, "net")
    defaults = NetSettings()
    return NetSettings(
        base_channels=_to_int(
            section.get("base_channels", defaults.base_channels), field="net.base_channels", minimum=4
        ),
        depth=_to_int(section.get("depth", defaults.depth), field="net.depth", minimum=1),
    )


def _load_train(data: dict) -> TrainSettings:
    section = _section(data, "train")
    defaults = TrainSettings()
    return TrainSettings(
        epochs=_to_int(section.get("epochs", defaults.epochs), field="train.epochs", minimum=1),
        batch_size=_to_int(section.get("batch_size", defaults.batch_size), field="train.batch_size", minimum=1),
        lr=_to_float(section.get("lr", defaults.lr), field="train.lr"),
        patience=_to_int(section.get("patience", defaults.patience), field="train.patience", minimum=1),
        seed=_to_int(section.get("seed", defaults.seed), field="train.seed", minimum=0),
        loss=_to_choice(section.get("loss", defaults.loss), field="train.loss", choices=LOSS_KINDS),
    )


def _load_runtime(data: dict) -> RuntimeSettings:
    section = _section(data, "runtime")
    threads_value = section.get("threads", os.getenv(THREADS_ENV, "0") or "0")
    log_level = str(section.get("log_level", os.getenv(LOG_LEVEL_ENV, "INFO") or "INFO")).upper()
    return RuntimeSettings(
        threads=_to_int(threads_value, field="runtime.threads", minimum=0),
        log_level=log_level,
    )


def load_settings(path: Optional[os.PathLike[str] | str] = None) -> Settings:
    """Load pipeline settings, falling back to built-in defaults when no file exists.

    An explicitly requested path must exist; the environment and packaged
    default locations are optional.
    """

    if path is not None:
        config_path = Path(path)
        if not config_path.exists():
            raise ConfigError(f"Configuration file not found: {config_path}")
    else:
        config_path = Path(os.environ.get(CONFIG_PATH_ENV, DEFAULT_CONFIG_PATH))
        if not config_path.exists():
            return _from_mapping({})
    return _from_mapping(_load_yaml(config_path))


def _from_mapping(data: dict[str, Any]) -> Settings:
    return Settings(
        synth=_load_synth(data),
        grid=_load_grid(data),
        embed=_load_embed(data),
        net=_load_net(data),
        train=_load_train(data),
        runtime=_load_runtime(data),
    )


def resolve_threads(requested: int = 0) -> int:
    """Worker count: ``requested`` if positive, else ``VWG_THREADS``, else all cores."""

    if requested > 0:
        return requested
    raw = os.getenv(THREADS_ENV, "").strip()
    if raw:
        return _to_int(raw, field=THREADS_ENV, minimum=1)
    return os.cpu_count() or 1
