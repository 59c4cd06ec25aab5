"""Pipeline configuration: defaults, file loading, and overrides.

Config files are flat ``key = value`` text (``#`` starts a comment), and
the same keys can be set on the command line with ``--set key=value``.
Unknown keys are a hard error so typos never silently fall back to
defaults.
"""

from __future__ import annotations

import dataclasses
import os
from dataclasses import dataclass, field
from pathlib import Path

from .errors import ConfigError
from .loggabor import BankParams

MODES = ("rift2", "ring", "plain")


def _threads_from_env() -> int:
    raw = os.environ.get("RIFT2_THREADS", "").strip()
    if not raw:
        return 0
    try:
        value = int(raw)
    except ValueError as exc:
        raise ConfigError(f"RIFT2_THREADS must be an integer, got {raw!r}") from exc
    if value < 0:
        raise ConfigError("RIFT2_THREADS must be >= 0")
    return value


@dataclass
class RiftConfig:
    # filter bank
    n_scales: int = 4
    n_orient: int = 6
    min_wavelength: float = 3.0
    scale_mult: float = 2.1
    sigma_on_f: float = 0.55
    orientation_spread: float | None = None
    noise_k: float = 2.0
    spread_cutoff: float = 0.5
    spread_gain: float = 10.0
    # detector
    fast_threshold: float = 0.001
    max_keypoints: int = 5000
    patch_size: int = 96
    # descriptor
    grid: int = 6
    dominant_ratio: float = 0.8
    rotate_patch: bool = True
    weight_by_amplitude: bool = False
    # evaluation
    residual_threshold: float = 3.0
    success_min_matches: int = 10
    rmse_cap: float = 20.0
    # pipeline
    mode: str = "rift2"
    threads: int = field(default_factory=_threads_from_env)

    def __post_init__(self):
        if self.mode not in MODES:
            raise ConfigError(f"mode must be one of {MODES}, got {self.mode!r}")
        if self.patch_size % self.grid != 0:
            raise ConfigError(
                f"patch_size {self.patch_size} must divide into {self.grid} cells")
        if not 0 < self.dominant_ratio <= 1:
            raise ConfigError("dominant_ratio must be in (0, 1]")

    def bank_params(self) -> BankParams:
        return BankParams(
            n_scales=self.n_scales,
            n_orient=self.n_orient,
            min_wavelength=self.min_wavelength,
            scale_mult=self.scale_mult,
            sigma_on_f=self.sigma_on_f,
            orientation_spread=self.orientation_spread,
            noise_k=self.noise_k,
            spread_cutoff=self.spread_cutoff,
            spread_gain=self.spread_gain,
        )

    def replace(self, **kwargs) -> "RiftConfig":
        return dataclasses.replace(self, **kwargs)

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


_FIELD_TYPES = {f.name: f.type for f in dataclasses.fields(RiftConfig)}
_BOOL_WORDS = {"true": True, "1": True, "on": True, "yes": True,
               "false": False, "0": False, "off": False, "no": False}


def _coerce(key: str, raw: str):
    if key not in _FIELD_TYPES:
        raise ConfigError(f"unknown config key: {key!r}")
    raw = raw.strip()
    ftype = _FIELD_TYPES[key]
    if key == "orientation_spread":
        if raw.lower() in ("none", "auto"):
            return None
        return float(raw)
    if ftype == "int":
        try:
            return int(raw)
        except ValueError as exc:
            raise ConfigError(f"{key}: expected integer, got {raw!r}") from exc
    if ftype == "float":
        try:
            return float(raw)
        except ValueError as exc:
            raise ConfigError(f"{key}: expected number, got {raw!r}") from exc
    if ftype == "bool":
        word = raw.lower()
        if word not in _BOOL_WORDS:
            raise ConfigError(f"{key}: expected true/false, got {raw!r}")
        return _BOOL_WORDS[word]
    return raw


def parse_config_text(text: str, base: RiftConfig | None = None) -> RiftConfig:
    values = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {line!r}")
        key, raw = (part.strip() for part in line.split("=", 1))
        values[key] = _coerce(key, raw)
    cfg = base or RiftConfig()
    return cfg.replace(**values)


def load_config(path, base: RiftConfig | None = None) -> RiftConfig:
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    return parse_config_text(path.read_text(), base)


def apply_overrides(cfg: RiftConfig, overrides: list[str]) -> RiftConfig:
    """Apply repeated ``key=value`` strings (CLI --set)."""
    values = {}
    for item in overrides:
        if "=" not in item:
            raise ConfigError(f"override must look like key=value, got {item!r}")
        key, raw = (part.strip() for part in item.split("=", 1))
        values[key] = _coerce(key, raw)
    return cfg.replace(**values)
