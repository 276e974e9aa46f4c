"""Run configuration: defaults, JSON loading and dotted-key overrides."""

from __future__ import annotations

import dataclasses
import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

DEFAULTS_VERSION = "1"


@dataclass
class PercolationConfig:
    lo: float = 1.0
    hi: float = 1000.0
    count: int = 500
    delta: float = 0.1
    window: int = 5
    sweep_classes: list[str] = field(default_factory=lambda: ["E", "LD"])


@dataclass
class SearchConfig:
    asset_class: str = "E"
    samples: int = 10_000
    rounds: int = 5
    lift_level: float = 0.5
    years: list[int] = field(default_factory=lambda: [2005, 2006, 2007, 2008])
    top_k: int = 10
    exhaustive_max: int = 3
    sizes: list[int] = field(default_factory=lambda: list(range(4, 11)))
    workers: int = 1


@dataclass
class BaselineConfig:
    samples: int = 10_000
    methods: list[str] = field(default_factory=lambda: ["balanced", "uniform_size", "fiedler_like"])


@dataclass
class FitConfig:
    series: list[str] = field(default_factory=list)
    dt_grid: list[int] = field(default_factory=lambda: [12, 6, 0, -6, -12])
    t_r: dict[str, str] = field(default_factory=dict)
    default_t_r: str = "2005-01"
    density_class: str = "LD"
    density_series: str | None = None
    accept: float = 0.9
    conditional: float = 0.85


@dataclass
class WarnConfig:
    series: str | None = None
    rv: str | None = None
    f_max: float = 0.56


@dataclass
class RunConfig:
    positions: dict[str, str] = field(default_factory=dict)
    registry: str | None = None
    deflator: str | None = None
    series: str | None = None
    base_year: int = 2013
    e_th: dict[str, float] = field(default_factory=lambda: {"E": 52.0, "LD": 52.0, "SD": 5.5})
    percolation: PercolationConfig = field(default_factory=PercolationConfig)
    search: SearchConfig = field(default_factory=SearchConfig)
    baseline: BaselineConfig = field(default_factory=BaselineConfig)
    fit: FitConfig = field(default_factory=FitConfig)
    warn: WarnConfig = field(default_factory=WarnConfig)
    seed: int = 0
    output: str = "out"

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    def digest(self) -> str:
        """Hash of every setting that affects results (the output directory does not)."""
        body = self.to_dict()
        body.pop("output")
        blob = json.dumps(body, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()[:16]

    def resolve_paths(self, base: Path) -> None:
        """Make relative input paths relative to ``base`` (the config file's directory)."""
        def fix(p):
            return None if p is None else str((base / p) if not Path(p).is_absolute() else Path(p))
        self.positions = {k: fix(v) for k, v in self.positions.items()}
        self.registry, self.deflator, self.series = fix(self.registry), fix(self.deflator), fix(self.series)


def _merge(obj, data: dict, prefix: str = ""):
    names = {f.name: f for f in dataclasses.fields(obj)}
    for key, value in data.items():
        if key not in names:
            raise KeyError(f"unknown config key {prefix}{key}")
        current = getattr(obj, key)
        if dataclasses.is_dataclass(current):
            if not isinstance(value, dict):
                raise TypeError(f"config key {prefix}{key} must be an object")
            _merge(current, value, f"{prefix}{key}.")
        else:
            setattr(obj, key, value)


def load_config(path: str | Path | None = None, overrides: dict[str, Any] | None = None) -> RunConfig:
    cfg = RunConfig()
    if path is not None:
        path = Path(path)
        _merge(cfg, json.loads(path.read_text(encoding="utf-8")))
        cfg.resolve_paths(path.parent)
    for dotted, value in (overrides or {}).items():
        *parents, leaf = dotted.split(".")
        data: dict = {leaf: value}
        for p in reversed(parents):
            data = {p: data}
        _merge(cfg, data)
    return cfg


def parse_override(text: str) -> tuple[str, Any]:
    """``key.path=value`` with the value parsed as JSON when possible."""
    if "=" not in text:
        raise ValueError(f"override {text!r} is not of the form key=value")
    key, raw = text.split("=", 1)
    try:
        value = json.loads(raw)
    except json.JSONDecodeError:
        value = raw
    return key.strip(), value
