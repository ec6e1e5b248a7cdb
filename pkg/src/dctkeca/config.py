"""Flat ``key = value`` pipeline configuration."""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from .features import EntropyConfig
from .illumination import IlluminationParams
from .kernels import KernelConfig
from .classifier import METRICS


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class PipelineConfig:
    width: Optional[int] = None    # None keeps the source resolution
    height: Optional[int] = None
    illumination: IlluminationParams = field(default_factory=IlluminationParams)
    entropy: EntropyConfig = field(default_factory=EntropyConfig)
    kernel: KernelConfig = field(default_factory=KernelConfig)
    components: int = 20
    metric: str = "mahalanobis"
    ridge: float = 1e-6
    tol_lambda: float = 1e-12
    tol_one: float = 1e-10
    manifest: Optional[str] = None
    output: Optional[str] = None

    def __post_init__(self) -> None:
        if (self.width is None) != (self.height is None):
            raise ValueError("width and height must be given together")
        if self.width is not None and (self.width < 1 or self.height < 1):
            raise ValueError("working resolution must be positive")
        if self.components < 1:
            raise ValueError("components must be at least 1")
        if self.metric not in METRICS:
            raise ValueError(f"metric must be one of {METRICS}, got {self.metric!r}")
        if self.ridge < 0:
            raise ValueError("ridge must be non-negative")

    def flat(self) -> dict:
        """Config echo: every key of the file format with its effective value."""
        out = {}
        for key, (section, attr, _) in _KEYS.items():
            obj = self if section is None else getattr(self, section)
            out[key] = getattr(obj, attr)
        return out


def _bool(text: str) -> bool:
    t = text.lower()
    if t in ("true", "yes", "on", "1"):
        return True
    if t in ("false", "no", "off", "0"):
        return False
    raise ValueError(f"expected a boolean, got {text!r}")


def _int(text: str) -> int:
    return int(text)


def _optional(conv, none_words):
    def parse(text: str):
        return None if text.lower() in none_words else conv(text)
    return parse


# key -> (sub-config attribute or None, field name, parser)
_KEYS = {
    "width": (None, "width", _optional(_int, ("native", "none"))),
    "height": (None, "height", _optional(_int, ("native", "none"))),
    "epsilon": ("illumination", "epsilon", float),
    "levels": ("illumination", "levels", _int),
    "suppress_count": ("illumination", "suppress_count", _int),
    "equalize": ("illumination", "equalize", _bool),
    "dc_target": ("illumination", "dc_target", _optional(float, ("image",))),
    "block_size": ("entropy", "block_size", _int),
    "quality": ("entropy", "quality", _int),
    "measure": ("entropy", "measure", str.lower),
    "renyi_order": ("entropy", "renyi_order", float),
    "feature_value": ("entropy", "feature_value", str.lower),
    "kernel": ("kernel", "family", str.lower),
    "degree": ("kernel", "degree", _int),
    "sigma": ("kernel", "sigma", _optional(float, ("auto", "median", "none"))),
    "standardize": ("kernel", "standardize", _bool),
    "components": (None, "components", _int),
    "metric": (None, "metric", str.lower),
    "ridge": (None, "ridge", float),
    "tol_lambda": (None, "tol_lambda", float),
    "tol_one": (None, "tol_one", float),
    "manifest": (None, "manifest", str),
    "output": (None, "output", str),
}

_SECTIONS = {
    "illumination": IlluminationParams,
    "entropy": EntropyConfig,
    "kernel": KernelConfig,
}


def build_config(values: dict, origin: Optional[dict] = None) -> PipelineConfig:
    """Assemble a config from already-parsed flat values.

    ``origin`` maps keys to a location string used in error messages.
    """
    origin = origin or {}
    top, sections = {}, {name: {} for name in _SECTIONS}
    for key, value in values.items():
        section, attr, _ = _KEYS[key]
        (top if section is None else sections[section])[attr] = value
    for name, cls in _SECTIONS.items():
        try:
            top[name] = cls(**sections[name])
        except ValueError as exc:
            where = ", ".join(origin[k] for k in values if _KEYS[k][0] == name and k in origin)
            raise ConfigError(f"{where + ': ' if where else ''}{exc}") from None
    try:
        return PipelineConfig(**top)
    except ValueError as exc:
        where = ", ".join(origin[k] for k in values if _KEYS[k][0] is None and k in origin)
        raise ConfigError(f"{where + ': ' if where else ''}{exc}") from None


def parse_config_text(text: str, name: str = "<config>") -> PipelineConfig:
    values, origin = {}, {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        where = f"{name}:{lineno}"
        if "=" not in line:
            raise ConfigError(f"{where}: expected 'key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        if key not in _KEYS:
            raise ConfigError(f"{where}: unknown key {key!r}")
        try:
            values[key] = _KEYS[key][2](value)
        except ValueError:
            raise ConfigError(f"{where}: invalid value {value!r} for {key}") from None
        origin[key] = where
    return build_config(values, origin)


def parse_config(path) -> PipelineConfig:
    path = Path(path)
    return parse_config_text(path.read_text(encoding="utf-8"), str(path))


def config_lines(cfg: PipelineConfig) -> str:
    """Serialize to the file format (round-trips through :func:`parse_config_text`)."""
    none_word = {"width": "native", "height": "native", "dc_target": "image", "sigma": "auto"}
    lines = []
    for key, value in cfg.flat().items():
        if value is None:
            if key not in none_word:
                continue
            value = none_word[key]
        elif isinstance(value, bool):
            value = "true" if value else "false"
        lines.append(f"{key} = {value}")
    return "\n".join(lines) + "\n"

