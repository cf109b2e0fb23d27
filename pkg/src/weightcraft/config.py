"""Typed INI run configuration.

Each command reads one section; keys map onto dataclass fields and are
converted using the type of the field's default value. Unknown keys are
rejected so typos do not silently fall back to defaults.
"""

from __future__ import annotations

import configparser
import dataclasses
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Tuple

from weightcraft.datagen import DatagenConfig, NoiseSpec
from weightcraft.errors import ConfigError, ValidationError
from weightcraft.sim import AXES, BaseParams, NItemsConfig, het_sim_config, hom_sim_config

_BOOL = {"1": True, "true": True, "yes": True, "on": True, "0": False, "false": False, "no": False, "off": False}


def _convert(section: str, key: str, raw: str, default):
    raw = raw.strip()
    try:
        if isinstance(default, bool):
            if raw.lower() not in _BOOL:
                raise ValueError(raw)
            return _BOOL[raw.lower()]
        if isinstance(default, int):
            return int(raw)
        if isinstance(default, float):
            return float(raw)
        if isinstance(default, tuple):
            items = [s.strip() for s in raw.split(",") if s.strip()]
            if default and isinstance(default[0], str):
                return tuple(items)
            return tuple(float(s) for s in items)
        if default is None:
            return None if raw.lower() in ("", "none") else float(raw)
        return raw
    except ValueError:
        raise ConfigError(f"[{section}] {key}: cannot parse {raw!r} as {type(default).__name__}") from None


def section_to_dataclass(parser: configparser.ConfigParser, section: str, cls, base=None):
    """Instance of ``cls`` built from ``base`` (or defaults) overridden by ``section`` keys."""
    obj = base if base is not None else cls()
    if not parser.has_section(section):
        return obj
    names = {f.name for f in dataclasses.fields(cls)}
    changes = {}
    for key, raw in parser.items(section):
        if key not in names:
            raise ConfigError(f"[{section}] unknown key {key!r}; expected one of {sorted(names)}")
        changes[key] = _convert(section, key, raw, getattr(obj, key))
    try:
        return dataclasses.replace(obj, **changes)
    except ValidationError as exc:
        raise ConfigError(f"[{section}] {exc}") from None
    except TypeError as exc:
        raise ConfigError(f"[{section}] {exc}") from None


@dataclass(frozen=True)
class WeightsParams:
    vf: Tuple[float, ...] = (1.75, 1.75)
    variance: Tuple[float, ...] = (1.0, 3.0)
    cost: Tuple[float, ...] = (1.0, 1.0)
    p: str = "1"
    n_starts: int = 32


@dataclass(frozen=True)
class SweepParams:
    axes: Tuple[str, ...] = AXES
    n_points: int = 50
    behavior_index: int = 1
    p: str = "1"
    vf_range: Tuple[float, ...] = (0.25, 5.0)
    variance_range: Tuple[float, ...] = (1e-2, 1e2)
    robustness_range: Tuple[float, ...] = (0.1, 10.0)

    def __post_init__(self):
        bad = [a for a in self.axes if a not in AXES]
        if bad:
            raise ConfigError(f"[sweep] unknown axes {bad}; expected a subset of {AXES}")
        if self.n_points < 2:
            raise ConfigError("[sweep] n_points must be >= 2")
        for name in ("vf_range", "variance_range", "robustness_range"):
            r = getattr(self, name)
            if len(r) != 2 or not 0 < r[0] < r[1]:
                raise ConfigError(f"[sweep] {name} must be two increasing positive numbers")


@dataclass(frozen=True)
class NItemsParams:
    modes: Tuple[str, ...] = ("homogeneous",)
    grid_step: float = 0.01


@dataclass(frozen=True)
class EstimateParams:
    n_boot_urls: int = 1000
    n_boot_samples: int = 100
    min_views: Optional[float] = None

    def __post_init__(self):
        if self.n_boot_urls < 1 or self.n_boot_samples < 2:
            raise ConfigError("[estimate] n_boot_urls must be >= 1 and n_boot_samples >= 2")


@dataclass(frozen=True)
class RankEvalParams:
    top_k: int = 100
    schemes: Tuple[str, ...] = ("user_optimal", "vf_only", "facebook")
    weighting: str = "simple"
    min_views: Optional[float] = None

    def __post_init__(self):
        if self.top_k < 1:
            raise ConfigError("[rank_eval] top_k must be >= 1")
        if self.weighting not in ("simple", "eligible"):
            raise ConfigError("[rank_eval] weighting must be simple or eligible")


@dataclass(frozen=True)
class RunConfig:
    seed: Optional[int] = None
    weights: WeightsParams = field(default_factory=WeightsParams)
    sweep: SweepParams = field(default_factory=SweepParams)
    sweep_base: BaseParams = field(default_factory=BaseParams)
    nitems: NItemsParams = field(default_factory=NItemsParams)
    nitems_homogeneous: NItemsConfig = field(default_factory=hom_sim_config)
    nitems_heterogeneous: NItemsConfig = field(default_factory=het_sim_config)
    datagen: DatagenConfig = field(default_factory=DatagenConfig)
    noise: NoiseSpec = field(default_factory=NoiseSpec)
    estimate: EstimateParams = field(default_factory=EstimateParams)
    rank_eval: RankEvalParams = field(default_factory=RankEvalParams)


SECTIONS = {
    "weights": WeightsParams,
    "sweep": SweepParams,
    "sweep_base": BaseParams,
    "nitems": NItemsParams,
    "nitems_homogeneous": NItemsConfig,
    "nitems_heterogeneous": NItemsConfig,
    "datagen": DatagenConfig,
    "noise": NoiseSpec,
    "estimate": EstimateParams,
    "rank_eval": RankEvalParams,
}


def parse_config(text: str, source: str = "<string>") -> RunConfig:
    parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"))
    try:
        parser.read_string(text, source=source)
    except configparser.Error as exc:
        raise ConfigError(f"{source}: {exc}") from None
    unknown = [s for s in parser.sections() if s not in SECTIONS and s != "run"]
    if unknown:
        raise ConfigError(f"{source}: unknown sections {unknown}; expected {['run', *SECTIONS]}")
    seed = None
    if parser.has_section("run"):
        extra = [k for k in parser.options("run") if k != "seed"]
        if extra:
            raise ConfigError(f"[run] unknown keys {extra}")
        if parser.has_option("run", "seed"):
            seed = _convert("run", "seed", parser.get("run", "seed"), 0)
    defaults = RunConfig()
    values = {name: section_to_dataclass(parser, name, cls, getattr(defaults, name)) for name, cls in SECTIONS.items()}
    return RunConfig(seed=seed, **values)


def load_config(path: Optional[str]) -> RunConfig:
    if path is None:
        return RunConfig()
    p = Path(path)
    if not p.is_file():
        raise ConfigError(f"config file {p} does not exist")
    return parse_config(p.read_text(encoding="utf-8"), str(p))
