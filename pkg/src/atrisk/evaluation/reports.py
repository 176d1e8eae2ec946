"""Report builders on top of backtest runs."""

from __future__ import annotations

import logging
import warnings
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from ..errors import AlignmentError, UndefinedMetricError
from ..fredmd import Sector
from ..learners import base_id, fit_probit_encompassing
from ..months import add_months
from ..panel import SeriesMeta
from .backtest import BacktestRun
from .bootstrap import paired_bootstrap, stationary_bootstrap
from .metrics import METRICS, brier, decompose_mse

logger = logging.getLogger(__name__)

CI_METRICS = ("pr_auc", "roc_auc", "brier")


@dataclass(frozen=True)
class MetricReport:
    pr_auc: float
    roc_auc: float
    brier: float
    mse_recession: float
    mse_expansion: float
    ci: dict[str, tuple[float, float]] = field(default_factory=dict)
    n_discarded: dict[str, int] = field(default_factory=dict)
    benchmark: str | None = None
    benchmark_share: dict[str, float] = field(default_factory=dict)

    def __post_init__(self):
        for lo, hi in self.ci.values():
            if lo > hi:
                raise ValueError("confidence interval with lo > hi")

    def to_dict(self) -> dict:
        return {
            "pr_auc": self.pr_auc,
            "roc_auc": self.roc_auc,
            "brier": self.brier,
            "mse_recession": self.mse_recession,
            "mse_expansion": self.mse_expansion,
            "ci": {k: list(v) for k, v in self.ci.items()},
            "n_discarded": dict(self.n_discarded),
            "benchmark": self.benchmark,
            "benchmark_share": dict(self.benchmark_share),
        }


def _safe(fn, p, y) -> float:
    try:
        return fn(p, y)
    except UndefinedMetricError:
        return float("nan")


def metric_report(
    run: BacktestRun,
    B: int = 1000,
    seed: int = 0,
    benchmark: BacktestRun | None = None,
) -> MetricReport:
    """Point metrics, percentile CIs and (optionally) the paired share vs a benchmark.

    ``B=0`` skips the bootstrap. Metrics undefined on the full sample are
    reported as NaN.
    """
    p, y = run.p, run.y
    rec, exp, _ = decompose_mse(p, y)
    ci, dropped, share = {}, {}, {}
    if B:
        if benchmark is not None and benchmark.origins != run.origins:
            raise AlignmentError(f"{run.spec_id} and {benchmark.spec_id} cover different origins")
        for name in CI_METRICS:
            try:
                if benchmark is None:
                    res = stationary_bootstrap(p, y, name, h=run.h, B=B, seed=seed)
                else:
                    pair = paired_bootstrap(p, benchmark.p, y, name, h=run.h, B=B, seed=seed)
                    res = pair.proposed
                    share[name] = pair.benchmark_share
            except UndefinedMetricError as exc:
                logger.warning("%s h=%d: no CI for %s (%s)", run.spec_id, run.h, name, exc)
                continue
            ci[name] = res.ci
            dropped[name] = res.n_discarded
    return MetricReport(
        pr_auc=_safe(METRICS["pr_auc"], p, y),
        roc_auc=_safe(METRICS["roc_auc"], p, y),
        brier=brier(p, y),
        mse_recession=rec,
        mse_expansion=exp,
        ci=ci,
        n_discarded=dropped,
        benchmark=benchmark.spec_id if benchmark is not None else None,
        benchmark_share=share,
    )


def disagreement_series(run_a: BacktestRun, run_b: BacktestRun) -> tuple[tuple[str, ...], np.ndarray]:
    """Dated difference ``pA - pB`` over identical origins."""
    if run_a.origins != run_b.origins:
        raise AlignmentError("runs cover different origins")
    return run_a.origins, run_a.p - run_b.p


@dataclass(frozen=True)
class EncompassingResult:
    model_a: str
    model_b: str
    h: int
    params: dict[str, float]
    bse: dict[str, float]
    pvalues: dict[str, float]
    n: int

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def encompassing(run_a: BacktestRun, run_b: BacktestRun) -> EncompassingResult:
    """Probit of realised labels on both runs' forecast log-odds."""
    if run_a.origins != run_b.origins or run_a.h != run_b.h:
        raise AlignmentError("encompassing needs runs on identical origins and horizon")
    fit = fit_probit_encompassing(run_a.p, run_b.p, run_a.y)
    return EncompassingResult(
        model_a=run_a.spec_id,
        model_b=run_b.spec_id,
        h=run_a.h,
        params=dict(zip(fit.names, map(float, fit.params))),
        bse=dict(zip(fit.names, map(float, fit.bse))),
        pvalues=dict(zip(fit.names, map(float, fit.pvalues))),
        n=int(run_a.y.size),
    )


def derive_peaks(dates: Sequence[str], y) -> tuple[str, ...]:
    """Months with ``y == 0`` immediately followed by ``y == 1``."""
    y = np.asarray(y)
    starts = np.flatnonzero((y[:-1] == 0) & (y[1:] == 1))
    return tuple(dates[i] for i in starts)


@dataclass(frozen=True)
class SectorLedger:
    episodes: dict[str, dict[str, float]]   # peak month -> sector -> percent

    def to_rows(self) -> list[tuple[str, str, float]]:
        return [(peak, sector, pct) for peak, shares in self.episodes.items() for sector, pct in shares.items()]


def sector_contributions(
    run: BacktestRun,
    peaks: Sequence[str],
    meta: Sequence[SeriesMeta] | Mapping[str, Sector | str],
    window: int = 12,
) -> SectorLedger:
    """Share of importance per sector over the ``window`` origins before each peak.

    Importance vectors from the refit log are averaged across the window's
    origins, summed within sector, and scaled to percent.
    """
    if run.refit_log is None:
        raise ValueError("run was made without a refit log")
    if isinstance(meta, Mapping):
        sector_of = {k: Sector.parse(v) for k, v in meta.items()}
    else:
        sector_of = {m.series_id: m.sector for m in meta}
    position = {o: i for i, o in enumerate(run.origins)}
    episodes = {}
    for peak in peaks:
        months = [add_months(peak, -k) for k in range(window, 0, -1)]
        missing = [m for m in months if m not in position]
        if missing:
            warnings.warn(f"episode {peak} skipped: origin {missing[0]} not in the run", stacklevel=2)
            continue
        totals: dict[str, float] = defaultdict(float)
        for m in months:
            for name, score in run.refit_log[position[m]].items():
                totals[base_id(name)] += score / window
        by_sector: dict[str, float] = defaultdict(float)
        for sid, score in totals.items():
            if sid not in sector_of:
                raise KeyError(f"no sector for {sid!r}")
            by_sector[Sector(sector_of[sid]).value] += score
        total = sum(by_sector.values())
        if total <= 0:
            warnings.warn(f"episode {peak} skipped: zero total importance", stacklevel=2)
            continue
        episodes[peak] = {s: 100.0 * v / total for s, v in sorted(by_sector.items())}
    return SectorLedger(episodes)
