"""Flat ``key = value`` run configuration."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path


class ConfigError(ValueError):
    def __init__(self, key: str | None, message: str):
        self.key = key
        super().__init__(f"{key}: {message}" if key else message)


def parse_number(text: str) -> float:
    """Float literal or a fraction such as ``1/20``."""
    text = text.strip()
    if "/" in text:
        return float(Fraction(text))
    return float(text)


def parse_float_list(text: str) -> tuple[float, ...]:
    items = [t for t in text.replace(";", ",").split(",") if t.strip()]
    if not items:
        raise ValueError("empty list")
    return tuple(parse_number(t) for t in items)


def parse_bool(text: str) -> bool:
    if text == "true":
        return True
    if text == "false":
        return False
    raise ValueError(f"expected true or false, got {text!r}")


def _int(text: str) -> int:
    return int(text, 10)


# config key -> (CaseParams field or None for run-level keys, parser)
SCHEMA = {
    "case": (None, str),
    "alpha": ("alpha", parse_number),
    "beta": ("beta_x", parse_number),
    "beta_x": ("beta_x", parse_number),
    "beta_y": ("beta_y", parse_number),
    "velocity": ("velocity", parse_number),
    "diffusion": ("diffusion", parse_number),
    "node_mode": ("node_mode", str),
    "spacing": ("spacing", parse_number),
    "node_count": ("node_count", _int),
    "ring_dr": ("ring_dr", parse_number),
    "clearance": ("clearance", parse_number),
    "jiggle": ("jiggle", parse_number),
    "shape_c": ("shape_c", parse_number),
    "quad_k": ("quad_k", _int),
    "quad_l": ("quad_l", _int),
    "omega": ("omega", parse_number),
    "times": ("times", parse_float_list),
    "directional": ("directional", parse_bool),
    "seed": (None, _int),
    "out_dir": (None, str),
    "large": (None, parse_bool),
    "timing": (None, parse_bool),
}
REQUIRED = ("case", "alpha")


@dataclass
class RunConfig:
    case: str
    overrides: dict = field(default_factory=dict)
    seed: int = 0
    out_dir: str = "out"
    large: bool = False
    timing: bool = False


def parse_config(text: str) -> RunConfig:
    """Parse config text; errors name the offending key (or line)."""
    raw: dict[str, str] = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(None, f"line {lineno}: expected 'key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        if key not in SCHEMA:
            raise ConfigError(key, "unknown key")
        if key in raw:
            raise ConfigError(key, f"duplicate key (line {lineno})")
        if not value:
            raise ConfigError(key, "missing value")
        raw[key] = value
    for key in REQUIRED:
        if key not in raw:
            raise ConfigError(key, "required key is missing")

    cfg = RunConfig(case=raw["case"])
    for key, value in raw.items():
        target, parser = SCHEMA[key]
        try:
            parsed = parser(value)
        except (ValueError, ZeroDivisionError) as exc:
            raise ConfigError(key, f"bad value {value!r} ({exc})") from None
        if target is not None:
            cfg.overrides[target] = parsed
        elif key != "case":
            setattr(cfg, key, parsed)
    if cfg.seed < 0 or cfg.seed >= 2**64:
        raise ConfigError("seed", "must be an unsigned 64-bit integer")
    return cfg


def load_config(path: str | Path) -> RunConfig:
    return parse_config(Path(path).read_text(encoding="utf-8"))
