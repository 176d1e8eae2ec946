"""Run configuration: one YAML file drives ingest, tuning, backtest and reports.

Every section is a frozen dataclass. Unknown keys are rejected so typos
fail loudly, and ``to_dict`` output parses back to an equal config.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping

import yaml

from .aggregate import Provenance
from .at_risk import AtRiskConfig
from .errors import ConfigError
from .evaluation.backtest import Alignment
from .fredmd import ALIASES, BUILTIN_SUBSETS, DEFAULT_EXCLUSIONS, DEFAULT_SIGN_OVERRIDES, SECTOR_OF, Sector
from .learners import GBTParams
from .months import month_index, parse_month
from .pipeline import InputKind, ModelKind, PipelineSpec

logger = logging.getLogger(__name__)


def _check_keys(section: str, raw: Mapping, allowed) -> None:
    if not isinstance(raw, Mapping):
        raise ConfigError(f"{section}: expected a mapping, got {type(raw).__name__}")
    unknown = sorted(set(raw) - set(allowed))
    if unknown:
        raise ConfigError(f"{section}: unknown key(s) {unknown}; allowed: {sorted(allowed)}")


def _fields(cls) -> list[str]:
    return [f.name for f in dataclasses.fields(cls)]


def _month(section: str, value) -> str | None:
    if value is None:
        return None
    try:
        return parse_month(str(value))
    except ValueError as exc:
        raise ConfigError(f"{section}: {exc}") from None


@dataclass(frozen=True)
class DataConfig:
    path: str
    target_path: str | None = None
    target_column: str | None = "USREC"
    tcode_row: int = 1
    exclusions: tuple[str, ...] = DEFAULT_EXCLUSIONS
    sectors: dict[str, str] = field(default_factory=dict)
    sign_overrides: dict[str, int] = field(default_factory=lambda: dict(DEFAULT_SIGN_OVERRIDES))
    cyclicality_cutoff: float = -0.10

    @classmethod
    def from_dict(cls, raw: Mapping) -> "DataConfig":
        _check_keys("data", raw, _fields(cls))
        if "path" not in raw:
            raise ConfigError("data.path is required")
        kw = dict(raw)
        if "exclusions" in kw:
            kw["exclusions"] = tuple(kw["exclusions"] or ())
        sectors = dict(kw.get("sectors") or {})
        for sid, name in sectors.items():
            try:
                sectors[sid] = Sector.parse(name).value
            except ValueError as exc:
                raise ConfigError(f"data.sectors[{sid!r}]: {exc}") from None
        kw["sectors"] = sectors
        if "sign_overrides" in kw:
            signs = dict(kw["sign_overrides"] or {})
            bad = {k: v for k, v in signs.items() if v not in (1, -1)}
            if bad:
                raise ConfigError(f"data.sign_overrides must be +1/-1: {bad}")
            kw["sign_overrides"] = signs
        return cls(**kw)


@dataclass(frozen=True)
class SampleConfig:
    train_end: str
    eval_start: str
    eval_end: str
    train_start: str | None = None
    align: str = "target"

    @classmethod
    def from_dict(cls, raw: Mapping) -> "SampleConfig":
        _check_keys("sample", raw, _fields(cls))
        for key in ("train_end", "eval_start", "eval_end"):
            if key not in raw:
                raise ConfigError(f"sample.{key} is required")
        kw = {k: _month(f"sample.{k}", v) if k != "align" else v for k, v in raw.items()}
        try:
            kw["align"] = Alignment(kw.get("align", "target")).value
        except ValueError:
            raise ConfigError(f"sample.align must be 'target' or 'origin', got {kw['align']!r}") from None
        cfg = cls(**kw)
        if month_index(cfg.eval_end) < month_index(cfg.eval_start):
            raise ConfigError("sample.eval_end precedes sample.eval_start")
        if cfg.train_start and month_index(cfg.train_start) >= month_index(cfg.train_end):
            raise ConfigError("sample.train_start must precede sample.train_end")
        if month_index(cfg.train_end) >= month_index(cfg.eval_start):
            raise ConfigError("sample.train_end must precede the first evaluation month")
        return cfg


@dataclass(frozen=True)
class TuningConfig:
    cv_splits: int = 5
    grid_min: float = 1e-3
    grid_max: float = 1e1
    grid_points: int = 30

    @classmethod
    def from_dict(cls, raw: Mapping) -> "TuningConfig":
        _check_keys("tuning", raw, _fields(cls))
        cfg = cls(**raw)
        if cfg.cv_splits < 1 or cfg.grid_points < 1 or not 0 < cfg.grid_min <= cfg.grid_max:
            raise ConfigError("tuning: need cv_splits >= 1, grid_points >= 1, 0 < grid_min <= grid_max")
        return cfg


@dataclass(frozen=True)
class BootstrapConfig:
    B: int = 1000
    seed: int = 0
    benchmark: str | None = None

    @classmethod
    def from_dict(cls, raw: Mapping) -> "BootstrapConfig":
        _check_keys("bootstrap", raw, _fields(cls))
        cfg = cls(**raw)
        if cfg.B < 0:
            raise ConfigError("bootstrap.B must be >= 0")
        return cfg


@dataclass(frozen=True)
class ImportanceConfig:
    pipelines: tuple[str, ...] = ()
    peaks: tuple[str, ...] | None = None
    window: int = 12

    @classmethod
    def from_dict(cls, raw: Mapping) -> "ImportanceConfig":
        _check_keys("importance", raw, _fields(cls))
        kw = dict(raw)
        kw["pipelines"] = tuple(kw.get("pipelines") or ())
        if kw.get("peaks") is not None:
            kw["peaks"] = tuple(_month("importance.peaks", p) for p in kw["peaks"])
        return cls(**kw)


_PIPELINE_KEYS = (
    "id", "input", "aggregation", "model", "subset", "at_risk", "lags", "K", "standardize", "C", "gbt",
)


def pipeline_from_dict(raw: Mapping) -> PipelineSpec:
    _check_keys("pipelines[]", raw, _PIPELINE_KEYS)
    if "id" not in raw:
        raise ConfigError("every pipeline needs an id")
    where = f"pipeline {raw['id']!r}"
    try:
        at_risk = dict(raw.get("at_risk") or {})
        _check_keys(f"{where}.at_risk", at_risk, _fields(AtRiskConfig))
        gbt = dict(raw.get("gbt") or {})
        _check_keys(f"{where}.gbt", gbt, _fields(GBTParams))
        kw = {
            "id": str(raw["id"]),
            "input": InputKind(raw.get("input", "Z")),
            "aggregation": Provenance(raw.get("aggregation", "disaggregated")),
            "model": ModelKind(raw.get("model", "logit_l2")),
            "at_risk": AtRiskConfig(**at_risk),
            "gbt": GBTParams(**gbt),
            "subset": raw.get("subset"),
            "standardize": raw.get("standardize"),
            "C": None if raw.get("C") is None else float(raw["C"]),
        }
        if "lags" in raw:
            kw["lags"] = tuple(raw["lags"])
        if "K" in raw:
            kw["k"] = int(raw["K"])
        return PipelineSpec(**kw)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{where}: {exc}") from None


def pipeline_to_dict(spec: PipelineSpec) -> dict:
    ar = spec.at_risk
    return {
        "id": spec.id,
        "input": spec.input.value,
        "aggregation": spec.aggregation.value,
        "model": spec.model.value,
        "subset": spec.subset,
        "at_risk": {
            "tau": ar.tau,
            "h_g": ar.h_g,
            "scope": ar.scope.value,
            "threshold_policy": ar.threshold_policy.value,
        },
        "lags": list(spec.lags),
        "K": spec.k,
        "standardize": spec.standardize,
        "C": spec.C,
        "gbt": dataclasses.asdict(spec.gbt),
    }


_TOP_KEYS = (
    "data", "sample", "horizons", "pipelines", "subsets", "aliases", "tuning", "bootstrap",
    "encompassing", "importance", "outputs", "n_jobs",
)


@dataclass(frozen=True)
class RunConfig:
    data: DataConfig
    sample: SampleConfig
    pipelines: tuple[PipelineSpec, ...]
    horizons: tuple[int, ...] = (3, 6, 12)
    subsets: dict[str, tuple[str, ...]] = field(default_factory=dict)
    aliases: dict[str, str] = field(default_factory=dict)
    tuning: TuningConfig = field(default_factory=TuningConfig)
    bootstrap: BootstrapConfig = field(default_factory=BootstrapConfig)
    encompassing: tuple[tuple[str, str], ...] = ()
    importance: ImportanceConfig = field(default_factory=ImportanceConfig)
    outputs: str = "outputs"
    n_jobs: int = 1
    base_dir: Path = field(default=Path("."), compare=False, repr=False)

    @classmethod
    def from_dict(cls, raw: Mapping, base_dir: str | Path = ".") -> "RunConfig":
        _check_keys("config", raw, _TOP_KEYS)
        for key in ("data", "sample", "pipelines"):
            if key not in raw:
                raise ConfigError(f"missing required section {key!r}")
        pipelines = raw["pipelines"] or []
        if not pipelines:
            raise ConfigError("pipelines must list at least one pipeline")
        specs = tuple(pipeline_from_dict(p) for p in pipelines)
        ids = [s.id for s in specs]
        dupes = sorted({i for i in ids if ids.count(i) > 1})
        if dupes:
            raise ConfigError(f"duplicate pipeline id(s): {dupes}")
        horizons = tuple(int(h) for h in raw.get("horizons", (3, 6, 12)))
        if not horizons or any(not 1 <= h <= 24 for h in horizons):
            raise ConfigError("horizons must be a non-empty list of integers in 1..24")
        subsets = {str(k): tuple(v) for k, v in (raw.get("subsets") or {}).items()}
        encompassing = tuple(tuple(pair) for pair in raw.get("encompassing") or ())
        for pair in encompassing:
            if len(pair) != 2 or any(p not in ids for p in pair):
                raise ConfigError(f"encompassing pair {list(pair)} must name two configured pipelines")
        cfg = cls(
            data=DataConfig.from_dict(raw["data"]),
            sample=SampleConfig.from_dict(raw["sample"]),
            pipelines=specs,
            horizons=horizons,
            subsets=subsets,
            aliases={str(k): str(v) for k, v in (raw.get("aliases") or {}).items()},
            tuning=TuningConfig.from_dict(raw.get("tuning") or {}),
            bootstrap=BootstrapConfig.from_dict(raw.get("bootstrap") or {}),
            encompassing=encompassing,
            importance=ImportanceConfig.from_dict(raw.get("importance") or {}),
            outputs=str(raw.get("outputs", "outputs")),
            n_jobs=int(raw.get("n_jobs", 1)),
            base_dir=Path(base_dir),
        )
        cfg._check_references()
        return cfg

    def _check_references(self) -> None:
        ids = {p.id for p in self.pipelines}
        if self.bootstrap.benchmark is not None and self.bootstrap.benchmark not in ids:
            raise ConfigError(f"bootstrap.benchmark {self.bootstrap.benchmark!r} is not a pipeline id")
        unknown = [p for p in self.importance.pipelines if p not in ids]
        if unknown:
            raise ConfigError(f"importance.pipelines names unknown pipeline(s) {unknown}")
        names = set(BUILTIN_SUBSETS) | set(self.subsets)
        for spec in self.pipelines:
            if spec.subset is not None and spec.subset not in names:
                raise ConfigError(f"pipeline {spec.id!r}: unknown subset {spec.subset!r}; known: {sorted(names)}")
        resolve_subsets(self, known_ids=self.known_ids())

    def known_ids(self) -> set[str]:
        return set(SECTOR_OF) | set(self.data.sectors)

    def to_dict(self) -> dict:
        return {
            "data": {
                **dataclasses.asdict(self.data),
                "exclusions": list(self.data.exclusions),
            },
            "sample": dataclasses.asdict(self.sample),
            "horizons": list(self.horizons),
            "pipelines": [pipeline_to_dict(p) for p in self.pipelines],
            "subsets": {k: list(v) for k, v in self.subsets.items()},
            "aliases": dict(self.aliases),
            "tuning": dataclasses.asdict(self.tuning),
            "bootstrap": dataclasses.asdict(self.bootstrap),
            "encompassing": [list(p) for p in self.encompassing],
            "importance": {
                "pipelines": list(self.importance.pipelines),
                "peaks": None if self.importance.peaks is None else list(self.importance.peaks),
                "window": self.importance.window,
            },
            "outputs": self.outputs,
            "n_jobs": self.n_jobs,
        }

    def digest(self) -> str:
        text = json.dumps(self.to_dict(), sort_keys=True, default=str)
        return hashlib.sha256(text.encode()).hexdigest()

    def resolve_path(self, path: str) -> Path:
        p = Path(path)
        return p if p.is_absolute() else self.base_dir / p


def load_config(path: str | Path) -> RunConfig:
    path = Path(path)
    try:
        raw = yaml.safe_load(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    except yaml.YAMLError as exc:
        raise ConfigError(f"{path}: invalid YAML: {exc}") from None
    if raw is None:
        raise ConfigError(f"{path}: empty config")
    return RunConfig.from_dict(raw, base_dir=path.parent)


def dump_config(cfg: RunConfig) -> str:
    return yaml.safe_dump(cfg.to_dict(), sort_keys=False)


def resolve_subsets(cfg: RunConfig, known_ids=None) -> dict[str, tuple[str, ...]]:
    """Built-in subsets merged with user subsets, display names mapped to ids.

    User sets win on name clashes. Duplicates are dropped with a warning;
    ids outside ``known_ids`` raise :class:`ConfigError`.
    """
    aliases = {**ALIASES, **cfg.aliases}
    merged = {**BUILTIN_SUBSETS, **cfg.subsets}
    out = {}
    for name, members in merged.items():
        ids = [aliases.get(m, m) for m in members]
        unique = list(dict.fromkeys(ids))
        if len(unique) < len(ids):
            logger.warning("subset %r lists duplicate ids; deduplicated", name)
        if known_ids is not None and name in cfg.subsets:
            bad = [m for m in unique if m not in known_ids]
            if bad:
                raise ConfigError(
                    f"subset {name!r}: unknown series {bad}; resolvable ids: {sorted(known_ids)}"
                )
        out[name] = tuple(unique)
    return out
