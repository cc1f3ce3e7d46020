"""Run configuration: TOML file plus command-line overrides.

Precedence is defaults < top-level keys < the ``[<command>]`` section <
flags. Unknown keys are rejected. Example::

    stress_factor = 0.9
    sd_axis = "0.10:0.40:0.05"

    [score]
    base_pd = 0.01
    base_lgd = 0.2
    nsr = 1.1
    sd = 0.3

    [score.pd_weights]
    LVR = 1.15

    [validate]
    samples = 10000000
    seed = 1
"""

from __future__ import annotations

import enum
import json
import math
import re
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Mapping

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .distributions import DistributionSpec, Family
from .risk_model import LoanProfile
from .serviceability import standard_axes

_SEED_LIMIT = 1 << 64


class ConfigError(ValueError):
    def __init__(self, key: str, message: str):
        self.key = key
        super().__init__(f"{key}: {message}")


class Command(str, enum.Enum):
    GRID = "grid"
    SCORE = "score"
    VALIDATE = "validate"


class OutputFormat(str, enum.Enum):
    CSV = "csv"
    JSON = "json"
    MARKDOWN = "markdown"


_STANDARD_NSR, _STANDARD_SD = standard_axes()


@dataclass(frozen=True)
class ScoreCase:
    nsr: float
    sd: float


@dataclass(frozen=True)
class RunConfig:
    command: Command
    stress_factor: float = 0.9
    nsr_axis: tuple[float, ...] = _STANDARD_NSR
    sd_axis: tuple[float, ...] = _STANDARD_SD
    base_nsr: float = 1.0
    family: Family = Family.NORMAL
    skew: float = 0.0
    profile: LoanProfile | None = None
    score_case: ScoreCase | None = None
    samples: int = 1_000_000
    seed: int = 0
    workers: int = 1
    output_format: OutputFormat = OutputFormat.MARKDOWN
    output_path: Path | None = field(default=None, compare=False)

    def distribution(self, relative_sd: float) -> DistributionSpec:
        return DistributionSpec(self.family, relative_sd, self.skew)


def parse_axis(text: str) -> tuple[float, ...]:
    """``"a,b,c"`` or an inclusive range ``"start:stop:step"``."""
    text = text.strip()
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise ValueError(f"range must be start:stop:step, got {text!r}")
        start, stop, step = (float(p) for p in parts)
        if step <= 0 or stop < start:
            raise ValueError(f"bad range {text!r}")
        count = int(math.floor((stop - start) / step + 1e-9)) + 1
        return tuple(round(start + k * step, 12) for k in range(count))
    return tuple(float(v) for v in text.split(",") if v.strip())


def _number(key: str, value: Any) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(key, f"expected a number, got {type(value).__name__} {value!r}")
    value = float(value)
    if not math.isfinite(value):
        raise ConfigError(key, f"expected a finite number, got {value}")
    return value


def _integer(key: str, value: Any) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(key, f"expected an integer, got {type(value).__name__} {value!r}")
    return value


def _axis(key: str, value: Any) -> tuple[float, ...]:
    if isinstance(value, str):
        try:
            axis = parse_axis(value)
        except ValueError as exc:
            raise ConfigError(key, str(exc)) from None
    elif isinstance(value, (list, tuple)):
        axis = tuple(_number(key, v) for v in value)
    else:
        raise ConfigError(key, f"expected a list of numbers or a range string, got {type(value).__name__}")
    if not axis:
        raise ConfigError(key, "axis is empty")
    if any(v <= 0 for v in axis):
        raise ConfigError(key, "axis values must be positive")
    if any(b <= a for a, b in zip(axis, axis[1:])):
        raise ConfigError(key, "axis must be strictly increasing")
    return axis


def _choice(enum_type: type[enum.Enum]) -> Callable[[str, Any], Any]:
    def convert(key: str, value: Any) -> Any:
        try:
            return enum_type(value)
        except ValueError:
            choices = ", ".join(e.value for e in enum_type)
            raise ConfigError(key, f"expected one of {choices}, got {value!r}") from None

    return convert


def _string(key: str, value: Any) -> str:
    if not isinstance(value, str):
        raise ConfigError(key, f"expected a string, got {type(value).__name__}")
    return value


def _weights(key: str, value: Any) -> tuple[tuple[str, float], ...]:
    if isinstance(value, Mapping):
        items = list(value.items())
    elif isinstance(value, (list, tuple)):
        items = list(value)
    else:
        raise ConfigError(key, f"expected a table of name = factor, got {type(value).__name__}")
    names = [n for n, _ in items]
    for n in names:
        if names.count(n) > 1:
            raise ConfigError(f"{key}.{n}", "duplicate weight name")
    return tuple((str(n), _number(f"{key}.{n}", v)) for n, v in items)


_COMMON: dict[str, Callable[[str, Any], Any]] = {
    "stress_factor": _number,
    "base_nsr": _number,
    "nsr_axis": _axis,
    "sd_axis": _axis,
    "family": _choice(Family),
    "skew": _number,
    "output_format": _choice(OutputFormat),
    "output_path": _string,
}

_SECTION_KEYS: dict[Command, dict[str, Callable[[str, Any], Any]]] = {
    Command.GRID: {},
    Command.SCORE: {
        "base_pd": _number,
        "base_lgd": _number,
        "pd_cap": _number,
        "pd_floor": _number,
        "pd_weights": _weights,
        "lgd_weights": _weights,
        "nsr": _number,
        "sd": _number,
    },
    Command.VALIDATE: {
        "samples": _integer,
        "seed": _integer,
        "workers": _integer,
    },
}


def _duplicate_key(text: str) -> str | None:
    table = ""
    seen: set[tuple[str, str]] = set()
    for line in text.splitlines():
        line = line.split("#", 1)[0].strip()
        header = re.fullmatch(r"\[\s*([^\[\]]+?)\s*\]", line)
        if header:
            table = header.group(1)
            continue
        m = re.match(r"""("[^"]*"|'[^']*'|[A-Za-z0-9_.-]+)\s*=""", line)
        if m:
            key = m.group(1).strip("\"'")
            if (table, key) in seen:
                return f"{table}.{key}" if table else key
            seen.add((table, key))
    return None


def load_toml(text: str) -> dict[str, Any]:
    try:
        return tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        dup = _duplicate_key(text)
        if dup is not None:
            raise ConfigError(dup, "duplicate key") from None
        raise ConfigError("<file>", f"not valid TOML: {exc}") from None


def _typed(layer: Mapping[str, Any], schema: Mapping[str, Callable[[str, Any], Any]], where: str) -> dict[str, Any]:
    out = {}
    for key, value in layer.items():
        name = f"{where}.{key}" if where else key
        if key not in schema:
            raise ConfigError(name, "unknown key")
        out[key] = schema[key](name, value)
    return out


def _merge_layers(data: Mapping[str, Any], command: Command) -> dict[str, Any]:
    top = {k: v for k, v in data.items() if k not in {c.value for c in Command}}
    merged = _typed(top, _COMMON, "")
    for cmd in Command:
        section = data.get(cmd.value, {})
        if not isinstance(section, Mapping):
            raise ConfigError(cmd.value, "expected a table")
        typed = _typed(section, {**_COMMON, **_SECTION_KEYS[cmd]}, cmd.value)
        if cmd is command:
            merged.update(typed)
    return merged


def parse_config(text: str = "", overrides: Mapping[str, Any] | None = None, command: Command | str = Command.GRID) -> RunConfig:
    """Build a validated :class:`RunConfig` from file text and flag overrides.

    ``overrides`` uses the same key names as the file; ``None`` values are
    ignored so unset flags fall through to the file and defaults.
    """
    command = Command(command)
    merged = _merge_layers(load_toml(text) if text.strip() else {}, command)
    schema = {**_COMMON, **_SECTION_KEYS[command]}
    for key, value in (overrides or {}).items():
        if value is None:
            continue
        if key not in schema:
            raise ConfigError(key, f"not accepted by the {command.value} command")
        merged[key] = schema[key](key, value)
    return _build(command, merged)


def _build(command: Command, merged: dict[str, Any]) -> RunConfig:
    kwargs: dict[str, Any] = {"command": command}
    for key in ("stress_factor", "base_nsr", "nsr_axis", "sd_axis", "family", "skew", "output_format", "samples", "seed", "workers"):
        if key in merged:
            kwargs[key] = merged[key]
    if "output_path" in merged:
        kwargs["output_path"] = Path(merged["output_path"])

    f = kwargs.get("stress_factor", 0.9)
    if not 0 < f <= 1:
        raise ConfigError("stress_factor", f"must lie in (0, 1], got {f}")
    if kwargs.get("base_nsr", 1.0) <= 0:
        raise ConfigError("base_nsr", "must be positive")
    family = kwargs.get("family", Family.NORMAL)
    if family is Family.NORMAL and kwargs.get("skew", 0.0) != 0:
        raise ConfigError("skew", "must be 0 for the normal family")
    if kwargs.get("samples", 10_000) < 10_000:
        raise ConfigError("samples", "must be at least 10000")
    if not 0 <= kwargs.get("seed", 0) < _SEED_LIMIT:
        raise ConfigError("seed", "must be an unsigned 64-bit integer")
    if kwargs.get("workers", 1) < 1:
        raise ConfigError("workers", "must be at least 1")

    if command is Command.SCORE:
        kwargs["profile"] = _profile(merged)
        has_nsr, has_sd = "nsr" in merged, "sd" in merged
        if has_nsr != has_sd:
            raise ConfigError("sd" if has_nsr else "nsr", "nsr and sd must be given together")
        if has_nsr:
            for key in ("nsr", "sd"):
                if merged[key] <= 0:
                    raise ConfigError(key, "must be positive")
            kwargs["score_case"] = ScoreCase(merged["nsr"], merged["sd"])
    return RunConfig(**kwargs)


def _profile(merged: Mapping[str, Any]) -> LoanProfile:
    for key in ("base_pd", "base_lgd"):
        if key not in merged:
            raise ConfigError(key, "required by the score command")
    fields = {k: merged[k] for k in ("base_pd", "base_lgd", "pd_cap", "pd_floor", "pd_weights", "lgd_weights") if k in merged}
    try:
        return LoanProfile(**fields)
    except ValueError as exc:
        raise ConfigError("score", str(exc)) from None


def dump_profile(profile: LoanProfile) -> str:
    """Serialise ``profile`` as the ``[score]`` section of a config file."""
    lines = ["[score]"]
    for key in ("base_pd", "base_lgd", "pd_cap", "pd_floor"):
        lines.append(f"{key} = {getattr(profile, key)!r}")
    for key in ("pd_weights", "lgd_weights"):
        ledger = getattr(profile, key)
        if ledger:
            lines.append("")
            lines.append(f"[score.{key}]")
            lines.extend(f"{json.dumps(name)} = {factor!r}" for name, factor in ledger)
    return "\n".join(lines) + "\n"


def load_profile(text: str) -> LoanProfile:
    profile = parse_config(text, command=Command.SCORE).profile
    assert profile is not None
    return profile
