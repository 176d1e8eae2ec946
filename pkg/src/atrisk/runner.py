"""End-to-end execution of a :class:`RunConfig` and artifact writing."""

from __future__ import annotations

import csv
import hashlib
import json
import logging
import math
import platform
import shutil
import tempfile
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .config import RunConfig, resolve_subsets
from .errors import ConfigError, SingularityError
from .evaluation import (
    BacktestRun, derive_peaks, encompassing, metric_report, origin_window, run_backtest,
    sector_contributions, tuning_cutoff,
)
from .panel import CsvSchema, PanelMatrix, classify_cyclicality, exclude_and_align, parse_csv, read_target_csv
from .pipeline import PipelineSpec, TunedSpec, tune
from .tuning import penalty_grid

logger = logging.getLogger(__name__)

PROBABILITY_COLUMNS = ("pipeline", "h", "date", "target_date", "y", "p")


def load_panel(cfg: RunConfig) -> PanelMatrix:
    """Ingest, transform, align and sign-classify the configured data file."""
    d = cfg.data
    schema = CsvSchema(tcode_row=d.tcode_row, target_column=None if d.target_path else d.target_column)
    raw = parse_csv(cfg.resolve_path(d.path), schema)
    target = None
    if d.target_path:
        t_dates, t_values = read_target_csv(cfg.resolve_path(d.target_path))
        lookup = dict(zip(t_dates, t_values))
        target = np.array([lookup.get(s, np.nan) for s in raw.dates])
    panel = exclude_and_align(raw, d.exclusions, target=target, sectors=d.sectors or None)
    if cfg.sample.train_start:
        panel = panel.between(cfg.sample.train_start, None)
    meta = classify_cyclicality(panel, cfg.sample.train_end, d.cyclicality_cutoff, d.sign_overrides)
    return panel.with_meta(meta)


def subset_panel(panel: PanelMatrix, spec: PipelineSpec, subsets: dict[str, tuple[str, ...]]) -> PanelMatrix:
    if spec.subset is None:
        return panel
    ids = subsets[spec.subset]
    missing = [s for s in ids if s not in panel.ids]
    if missing:
        raise ConfigError(f"subset {spec.subset!r}: series {missing} not in the aligned panel")
    return panel.select(ids)


@dataclass
class RunResult:
    panel: PanelMatrix
    tuned: dict[tuple[str, int], TunedSpec] = field(default_factory=dict)
    runs: dict[tuple[str, int], BacktestRun] = field(default_factory=dict)
    metrics: dict[tuple[str, int], dict] = field(default_factory=dict)
    encompassing: list[dict] = field(default_factory=list)
    sector_rows: list[tuple] = field(default_factory=list)


def execute(cfg: RunConfig, panel: PanelMatrix | None = None) -> RunResult:
    panel = load_panel(cfg) if panel is None else panel
    subsets = resolve_subsets(cfg, known_ids=set(panel.ids))
    s = cfg.sample
    grid = penalty_grid(cfg.tuning.grid_min, cfg.tuning.grid_max, cfg.tuning.grid_points)
    result = RunResult(panel=panel)
    for spec in cfg.pipelines:
        data = subset_panel(panel, spec, subsets)
        for h in cfg.horizons:
            first, _ = origin_window(s.eval_start, s.eval_end, h, s.align)
            cutoff = tuning_cutoff(s.train_end, first)
            tuned = tune(data, spec, h, cutoff, grid=grid, cv_splits=cfg.tuning.cv_splits)
            logger.info("backtest %s h=%d", spec.id, h)
            run = run_backtest(
                data, tuned.spec, h, s.eval_start, s.eval_end, s.train_end, align=s.align,
                keep_log=spec.id in cfg.importance.pipelines, n_jobs=cfg.n_jobs,
            )
            result.tuned[(spec.id, h)] = tuned
            result.runs[(spec.id, h)] = run

    bench = cfg.bootstrap.benchmark
    for (pid, h), run in result.runs.items():
        other = result.runs[(bench, h)] if bench and bench != pid else None
        report = metric_report(run, B=cfg.bootstrap.B, seed=cfg.bootstrap.seed, benchmark=other)
        result.metrics[(pid, h)] = report.to_dict()

    for a, b in cfg.encompassing:
        for h in cfg.horizons:
            try:
                result.encompassing.append(encompassing(result.runs[(a, h)], result.runs[(b, h)]).to_dict())
            except SingularityError as exc:
                logger.warning("encompassing %s vs %s at h=%d skipped: %s", a, b, h, exc)
                result.encompassing.append({"model_a": a, "model_b": b, "h": h, "error": str(exc)})

    peaks = cfg.importance.peaks or derive_peaks(panel.dates, panel.y)
    for pid in cfg.importance.pipelines:
        for h in cfg.horizons:
            run = result.runs[(pid, h)]
            ledger = sector_contributions(run, peaks, panel.meta, window=cfg.importance.window)
            result.sector_rows += [(pid, h, *row) for row in ledger.to_rows()]
    return result


def _clean(obj):
    """JSON-safe copy: NaN/inf become null, tuples become lists."""
    if isinstance(obj, float):
        return obj if math.isfinite(obj) else None
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.generic):
        return _clean(obj.item())
    return obj


def _dump(path: Path, obj) -> None:
    path.write_text(json.dumps(_clean(obj), indent=2, sort_keys=True) + "\n", encoding="utf-8")


def _versions() -> dict:
    import numba
    import scipy
    import yaml

    from . import __version__

    return {
        "atrisk": __version__,
        "python": platform.python_version(),
        "numpy": np.__version__,
        "scipy": scipy.__version__,
        "numba": numba.__version__,
        "pyyaml": yaml.__version__,
    }


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def manifest(cfg: RunConfig, result: RunResult) -> dict:
    frozen = {}
    for (pid, h), t in sorted(result.tuned.items()):
        entry = frozen.setdefault(pid, {})
        entry[str(h)] = {
            "tuning_cutoff": t.cutoff,
            "tau": t.spec.at_risk.tau if t.spec.input.value == "Z" else None,
            # an unpenalised fit is recorded as "inf" rather than null
            "C": "inf" if t.spec.C is not None and math.isinf(t.spec.C) else t.spec.C,
        }
    p = result.panel
    data_files = {"path": str(cfg.resolve_path(cfg.data.path))}
    data_files["sha256"] = _sha256(Path(data_files["path"]))
    if cfg.data.target_path:
        data_files["target_sha256"] = _sha256(cfg.resolve_path(cfg.data.target_path))
    return {
        "config": cfg.to_dict(),
        "config_sha256": cfg.digest(),
        "data": data_files,
        "panel": {
            "first": p.dates[0],
            "last": p.dates[-1],
            "n_series": len(p.meta),
            "signs": {m.series_id: m.sign for m in p.meta},
        },
        "frozen_constants": frozen,
        "bootstrap_seed": cfg.bootstrap.seed,
        "versions": _versions(),
    }


def write_outputs(cfg: RunConfig, result: RunResult, out_dir: Path) -> None:
    """Write every artifact into a scratch directory, then move it into place.

    A failure leaves no partial output behind.
    """
    out_dir = Path(out_dir)
    out_dir.parent.mkdir(parents=True, exist_ok=True)
    tmp = Path(tempfile.mkdtemp(prefix=".atrisk-", dir=out_dir.parent))
    try:
        with open(tmp / "probabilities.csv", "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh)
            w.writerow(PROBABILITY_COLUMNS)
            for (pid, h), run in result.runs.items():
                for o, t, y, p in zip(run.origins, run.targets, run.y, run.p):
                    w.writerow([pid, h, o, t, int(y), repr(float(p))])
        metrics = {}
        for (pid, h), rep in result.metrics.items():
            metrics.setdefault(pid, {})[str(h)] = rep
        _dump(tmp / "metrics.json", metrics)
        _dump(tmp / "encompassing.json", result.encompassing)
        with open(tmp / "importance.csv", "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh)
            w.writerow(["pipeline", "h", "date", "variable", "importance"])
            for (pid, h), run in result.runs.items():
                if run.refit_log is None:
                    continue
                for origin, scores in zip(run.origins, run.refit_log):
                    for var, score in scores.items():
                        w.writerow([pid, h, origin, var, repr(float(score))])
        with open(tmp / "sector_ledger.csv", "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh)
            w.writerow(["pipeline", "h", "peak", "sector", "percent"])
            for row in result.sector_rows:
                w.writerow([*row[:-1], repr(float(row[-1]))])
        _dump(tmp / "manifest.json", manifest(cfg, result))
        if out_dir.exists():
            shutil.rmtree(out_dir)
        tmp.rename(out_dir)
    except BaseException:
        shutil.rmtree(tmp, ignore_errors=True)
        raise


def write_panel_csv(panel: PanelMatrix, path) -> None:
    """Debug dump of the aligned, transformed panel with its target."""
    if hasattr(path, "write"):
        _panel_rows(panel, csv.writer(path))
        return
    with open(path, "w", newline="", encoding="utf-8") as fh:
        _panel_rows(panel, csv.writer(fh))


def _panel_rows(panel: PanelMatrix, w) -> None:
    w.writerow(["date", "y", *panel.ids])
    w.writerow(["sign", "", *(m.sign for m in panel.meta)])
    for t, stamp in enumerate(panel.dates):
        w.writerow([stamp, int(panel.y[t]), *(repr(float(v)) for v in panel.values[t])])


__all__ = [
    "PROBABILITY_COLUMNS", "RunResult", "execute", "load_panel", "manifest", "subset_panel",
    "write_outputs", "write_panel_csv",
]
