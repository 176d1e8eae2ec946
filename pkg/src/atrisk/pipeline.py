"""Declarative model pipelines and their per-origin fit/predict step."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace
from enum import Enum

import numpy as np

from .aggregate import DEFAULT_LAGS, FeatureBlock, Provenance, check_lags, lag_stack, pca_fit, pca_project
from .at_risk import AtRiskConfig, BinaryStateMatrix, binarize, resolve_tau
from .learners import GBTParams, fit_gbt, fit_logistic, importance
from .panel import PanelMatrix
from .tuning import TuningResult, make_splits, penalty_grid, select_C

logger = logging.getLogger(__name__)


class InputKind(str, Enum):
    X = "X"
    Z = "Z"


class ModelKind(str, Enum):
    LOGIT = "logit_l2"
    GBT = "gbt"


@dataclass(frozen=True)
class PipelineSpec:
    """One forecasting variant: input representation, aggregation and model.

    ``C`` stays ``None`` until tuned; ``standardize=None`` means "scale
    continuous inputs, leave raw binary columns alone".
    """

    id: str
    input: InputKind = InputKind.Z
    aggregation: Provenance = Provenance.DISAGGREGATED
    model: ModelKind = ModelKind.LOGIT
    at_risk: AtRiskConfig = field(default_factory=AtRiskConfig)
    lags: tuple[int, ...] = DEFAULT_LAGS
    k: int = 8
    standardize: bool | None = None
    C: float | None = None
    gbt: GBTParams = field(default_factory=GBTParams)
    subset: str | None = None

    def __post_init__(self):
        object.__setattr__(self, "input", InputKind(self.input))
        object.__setattr__(self, "aggregation", Provenance(self.aggregation))
        object.__setattr__(self, "model", ModelKind(self.model))
        object.__setattr__(self, "lags", check_lags(self.lags))
        if self.k < 1:
            raise ValueError("K must be >= 1")
        if self.C is not None and not self.C > 0:
            raise ValueError("C must be positive")

    @property
    def scale_inputs(self) -> bool:
        if self.standardize is not None:
            return self.standardize
        return not (self.input is InputKind.Z and self.aggregation is Provenance.DISAGGREGATED)

    def n_base_columns(self, n_series: int) -> int:
        if self.aggregation is Provenance.DISAGGREGATED:
            return n_series
        if self.aggregation is Provenance.SIMPLE_AVERAGE:
            return 1
        return self.k

    def penalized(self, n_series: int) -> bool:
        return self.n_base_columns(n_series) * len(self.lags) > 1


@dataclass(frozen=True)
class BaseMatrix:
    """Row-causal inputs shared by every origin: X values or Z flags."""

    dates: tuple[str, ...]
    values: np.ndarray
    y: np.ndarray
    ids: tuple[str, ...]
    states: BinaryStateMatrix | None = None

    def row_of(self, stamp: str) -> int:
        return self.dates.index(stamp)


def base_matrix(panel: PanelMatrix, spec: PipelineSpec, train_end: str) -> BaseMatrix:
    if spec.input is InputKind.X:
        return BaseMatrix(panel.dates, panel.values, panel.y, tuple(panel.ids))
    z = binarize(panel, spec.at_risk, train_end)
    offset = spec.at_risk.h_g - 1
    return BaseMatrix(z.dates, z.values.astype(float), panel.y[offset:], z.ids, states=z)


def features_through(base: BaseMatrix, spec: PipelineSpec, row: int) -> FeatureBlock:
    """Aggregate and lag-stack using only base rows ``0..row``."""
    m = base.values[: row + 1]
    dates = base.dates[: row + 1]
    if spec.aggregation is Provenance.DISAGGREGATED:
        w, labels = m, list(base.ids)
    elif spec.aggregation is Provenance.SIMPLE_AVERAGE:
        w, labels = m.mean(axis=1)[:, None], ["average"]
    else:
        fit = pca_fit(m, spec.k, standardize=spec.input is InputKind.X, labels=base.ids)
        w = pca_project(m, fit.loadings, fit.means, fit.scales)
        labels = [f"F{j + 1}" for j in range(spec.k)]
    return lag_stack(w, spec.lags, labels=labels, dates=dates, provenance=spec.aggregation)


def training_rows(block: FeatureBlock, base: BaseMatrix, row: int, h: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Design rows with a label observed by ``row``, their labels, and the prediction row.

    Block row ``r`` corresponds to base row ``r + deepest lag``.
    """
    deepest = len(base.dates[: row + 1]) - block.matrix.shape[0]
    last_labelled = row - h  # origin s needs y[s + h] with s + h <= row
    n_train = last_labelled - deepest + 1
    if n_train <= 0:
        raise ValueError(f"no labelled training rows at origin {base.dates[row]} (h={h})")
    x_train = block.matrix[:n_train]
    y_train = base.y[deepest: deepest + n_train + h][h:]
    return x_train, y_train, block.matrix[-1:]


def fit_model(spec: PipelineSpec, x, y, labels):
    if spec.model is ModelKind.GBT:
        return fit_gbt(x, y, spec.gbt, labels=labels)
    if spec.C is None:
        raise ValueError(f"pipeline {spec.id!r}: C has not been tuned")
    C = spec.C if spec.penalized(x.shape[1] // len(spec.lags)) else math.inf
    return fit_logistic(x, y, C, standardize=spec.scale_inputs, labels=labels)


@dataclass(frozen=True)
class TunedSpec:
    spec: PipelineSpec
    tuning: TuningResult | None
    cutoff: str


def tune(
    panel: PanelMatrix,
    spec: PipelineSpec,
    h: int,
    cutoff: str,
    grid=None,
    cv_splits: int = 5,
) -> TunedSpec:
    """Freeze tau (Z inputs) and C (logit models) on data dated <= ``cutoff``."""
    at_risk = spec.at_risk
    if spec.input is InputKind.Z:
        at_risk = resolve_tau(at_risk, panel, cutoff)
    spec = replace(spec, at_risk=at_risk)
    if spec.model is not ModelKind.LOGIT or spec.C is not None:
        return TunedSpec(spec, None, cutoff)
    base = base_matrix(panel, spec, cutoff)
    row = base.row_of(_last_date_through(base.dates, cutoff))
    block = features_through(base, spec, row)
    x, y, _ = training_rows(block, base, row, h)
    if not spec.penalized(panel.values.shape[1]):
        return TunedSpec(replace(spec, C=math.inf), None, cutoff)
    grid = penalty_grid() if grid is None else grid
    result = select_C(x, y, grid, make_splits(len(y), cv_splits), standardize=spec.scale_inputs)
    logger.info("%s h=%d: C*=%.6g", spec.id, h, result.C)
    return TunedSpec(replace(spec, C=result.C), result, cutoff)


def _last_date_through(dates, stamp: str) -> str:
    from .months import month_index

    eligible = [d for d in dates if month_index(d) <= month_index(stamp)]
    if not eligible:
        raise ValueError(f"no data on or before {stamp}")
    return eligible[-1]


def forecast_at(base: BaseMatrix, spec: PipelineSpec, row: int, h: int, keep_importance: bool = False):
    """Refit on data through ``row`` and forecast ``P(y[row + h] = 1)``."""
    block = features_through(base, spec, row)
    x, y, x_new = training_rows(block, base, row, h)
    model = fit_model(spec, x, y, block.labels)
    p = float(model.predict_proba(x_new)[0])
    return p, (importance(model) if keep_importance else None)
