"""Recursive expanding-window backtest.

Every origin refits thresholds, aggregation weights and the classifier on
data dated at or before the origin, then forecasts the label ``h`` months
ahead. Tuned constants (tau, C) must already be frozen on the spec.
"""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from ..at_risk import ThresholdPolicy
from ..errors import AtRiskError, BacktestError
from ..months import add_months, month_index
from ..panel import PanelMatrix
from ..pipeline import InputKind, ModelKind, PipelineSpec, base_matrix, forecast_at

logger = logging.getLogger(__name__)


class Alignment(str, Enum):
    TARGET = "target"   # start/end refer to the month being forecast
    ORIGIN = "origin"   # start/end refer to the forecast origin


@dataclass(frozen=True)
class BacktestRun:
    spec_id: str
    h: int
    origins: tuple[str, ...]
    targets: tuple[str, ...]
    p: np.ndarray
    y: np.ndarray
    refit_log: tuple[dict, ...] | None = field(default=None, repr=False)

    def __post_init__(self):
        n = len(self.origins)
        if not (len(self.targets) == self.p.size == self.y.size == n):
            raise ValueError("backtest columns have unequal length")
        if n and not ((self.p >= 0) & (self.p <= 1)).all():
            raise ValueError("probabilities outside [0, 1]")
        idx = [month_index(o) for o in self.origins]
        if any(b <= a for a, b in zip(idx, idx[1:])):
            raise ValueError("origins must be strictly increasing")

    def __len__(self) -> int:
        return len(self.origins)


def origin_window(start: str, end: str, h: int, align: Alignment | str = Alignment.TARGET) -> tuple[str, str]:
    """First and last forecast origin for an evaluation window."""
    if h < 1:
        raise ValueError("horizon must be >= 1")
    if month_index(end) < month_index(start):
        raise ValueError(f"evaluation window {start}..{end} is empty")
    if Alignment(align) is Alignment.TARGET:
        return add_months(start, -h), add_months(end, -h)
    return start, end


def tuning_cutoff(train_end: str, first_origin: str) -> str:
    """Last month usable for frozen constants: never later than the first origin."""
    return train_end if month_index(train_end) <= month_index(first_origin) else first_origin


def _check_frozen(spec: PipelineSpec) -> None:
    if spec.input is InputKind.Z and spec.at_risk.tau == "auto":
        raise BacktestError(f"pipeline {spec.id!r}: tau must be frozen before the backtest")
    if spec.model is ModelKind.LOGIT and spec.C is None:
        raise BacktestError(f"pipeline {spec.id!r}: C must be frozen before the backtest")


def run_backtest(
    panel: PanelMatrix,
    spec: PipelineSpec,
    h: int,
    start: str,
    end: str,
    train_end: str,
    align: Alignment | str = Alignment.TARGET,
    keep_log: bool = False,
    n_jobs: int = 1,
) -> BacktestRun:
    """Forecast ``P(y[t+h] = 1)`` at every origin in the window.

    A refit failure aborts the run with :class:`BacktestError` naming the
    origin; no gaps are left in the output.
    """
    _check_frozen(spec)
    first, last = origin_window(start, end, h, align)
    cutoff = tuning_cutoff(train_end, first)
    if spec.at_risk.threshold_policy is ThresholdPolicy.FROZEN and cutoff != train_end:
        logger.info("%s h=%d: frozen thresholds use data through %s", spec.id, h, cutoff)
    target_last = add_months(last, h)
    if month_index(target_last) > month_index(panel.dates[-1]):
        raise BacktestError(f"label for {target_last} lies beyond the panel end {panel.dates[-1]}")

    base = base_matrix(panel, spec, cutoff)
    if first not in base.dates:
        raise BacktestError(f"origin {first} is not covered by the {spec.input.value} inputs")
    rows = range(base.row_of(first), base.row_of(last) + 1)

    def one(row):
        try:
            return forecast_at(base, spec, row, h, keep_importance=keep_log)
        except (AtRiskError, ValueError, np.linalg.LinAlgError) as exc:
            raise BacktestError(f"{spec.id} h={h}: refit failed at origin {base.dates[row]}: {exc}") from exc

    if n_jobs > 1:
        with ThreadPoolExecutor(max_workers=n_jobs) as pool:
            results = list(pool.map(one, rows))
    else:
        results = [one(r) for r in rows]

    origins = tuple(base.dates[r] for r in rows)
    return BacktestRun(
        spec_id=spec.id,
        h=h,
        origins=origins,
        targets=tuple(add_months(o, h) for o in origins),
        p=np.array([p for p, _ in results]),
        y=np.array([base.y[r + h] for r in rows], dtype=np.int8),
        refit_log=tuple(imp for _, imp in results) if keep_log else None,
    )
