"""The at-risk transformation: continuous predictors to 0/1 weakness flags.

Each series is (optionally) smoothed with a trailing moving average,
oriented by its cyclical sign, and flagged whenever it sits at or below an
empirical quantile of its own history.
"""

from __future__ import annotations

import bisect
import logging
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Mapping

import numpy as np

from .errors import StateError
from .fredmd import Sector
from .panel import PanelMatrix

logger = logging.getLogger(__name__)


class Scope(str, Enum):
    GLOBAL = "global"
    SECTOR = "sector"
    VARIABLE = "variable"


class ThresholdPolicy(str, Enum):
    FROZEN = "frozen"
    EXPANDING = "expanding"


@dataclass(frozen=True)
class AtRiskConfig:
    """Settings for :func:`binarize`.

    ``tau`` is a level in (0, 1), ``"auto"`` (resolve with
    :func:`select_tau` first) or a mapping from scope cell to level: the
    key ``"global"``, sector names, or series ids depending on ``scope``.
    """

    tau: float | str | Mapping[str, float] = "auto"
    h_g: int = 1
    scope: Scope = Scope.GLOBAL
    threshold_policy: ThresholdPolicy = ThresholdPolicy.EXPANDING

    def __post_init__(self):
        object.__setattr__(self, "scope", Scope(self.scope))
        object.__setattr__(self, "threshold_policy", ThresholdPolicy(self.threshold_policy))
        if int(self.h_g) != self.h_g or self.h_g < 1:
            raise ValueError(f"h_g must be an integer >= 1, got {self.h_g}")
        tau = self.tau
        if isinstance(tau, str):
            if tau != "auto":
                raise ValueError(f"tau must be a number, a mapping or 'auto', got {tau!r}")
        elif isinstance(tau, Mapping):
            for k, v in tau.items():
                if not 0 < v < 1:
                    raise ValueError(f"tau[{k!r}]={v} outside (0, 1)")
            object.__setattr__(self, "tau", dict(tau))
        elif not 0 < float(tau) < 1:
            raise ValueError(f"tau={tau} outside (0, 1)")

    @property
    def resolved(self) -> bool:
        return self.tau != "auto"


@dataclass(frozen=True)
class BinaryStateMatrix:
    """0/1 at-risk flags together with the thresholds that produced them."""

    dates: tuple[str, ...]
    values: np.ndarray
    thresholds: np.ndarray
    taus: np.ndarray
    ids: tuple[str, ...]
    config: AtRiskConfig
    sectors: tuple[Sector, ...] = field(default=())

    def __len__(self) -> int:
        return len(self.dates)


@dataclass(frozen=True)
class TauSelection:
    scope: Scope
    values: dict[str, float]
    per_series: dict[str, float]


def moving_average(x, h_g: int) -> np.ndarray:
    """Trailing mean over ``h_g`` months along the first axis.

    The first ``h_g - 1`` positions are NaN. Terms are summed oldest first.
    """
    x = np.asarray(x, dtype=float)
    if h_g < 1:
        raise ValueError("h_g must be >= 1")
    n = x.shape[0]
    if h_g > n:
        raise ValueError(f"window {h_g} longer than series ({n})")
    if h_g == 1:
        return x.copy()
    acc = np.zeros((n - h_g + 1,) + x.shape[1:])
    for k in range(h_g):
        acc = acc + x[k:n - h_g + 1 + k]
    out = np.full_like(x, np.nan)
    out[h_g - 1:] = acc / h_g
    return out


def _quantile_rank(n: int, tau: float) -> int:
    """Smallest 1-based rank k with k / n >= tau."""
    k = min(max(1, int(np.ceil(tau * n))), n)
    while k > 1 and (k - 1) / n >= tau:
        k -= 1
    while k < n and k / n < tau:
        k += 1
    return k


def empirical_quantile(sample, tau: float) -> float:
    """Left-continuous inverse of the empirical CDF.

    Returns the smallest sample value ``v`` with ``#{s <= v} / n >= tau``,
    which pairs with a ``<=`` comparison against the threshold.

    >>> empirical_quantile(range(1, 11), 0.3)
    3.0
    """
    s = np.sort(np.asarray(sample, dtype=float))
    if s.size == 0:
        raise ValueError("empirical quantile of an empty sample")
    if not 0 < tau < 1:
        raise ValueError(f"tau={tau} outside (0, 1)")
    return float(s[_quantile_rank(s.size, tau) - 1])


def _series_taus(config: AtRiskConfig, ids, sectors) -> np.ndarray:
    tau = config.tau
    if not config.resolved:
        raise StateError("tau is 'auto'; resolve it with select_tau before binarizing")
    if not isinstance(tau, Mapping):
        return np.full(len(ids), float(tau))
    if config.scope is Scope.GLOBAL:
        keys = ["global"] * len(ids)
    elif config.scope is Scope.SECTOR:
        keys = [Sector.parse(s).value for s in sectors]
    else:
        keys = list(ids)
    missing = sorted({k for k in keys if k not in tau})
    if missing:
        raise StateError(f"no tau for scope cells {missing}")
    return np.array([tau[k] for k in keys], dtype=float)


def signed_smoothed(panel: PanelMatrix, h_g: int) -> np.ndarray:
    """``s_i * ma(x_i)`` for every series; leading rows are NaN when h_g > 1."""
    return moving_average(panel.values, h_g) * panel.signs


def binarize(panel: PanelMatrix, config: AtRiskConfig, train_end: str) -> BinaryStateMatrix:
    """Apply the at-risk transformation to every series of ``panel``.

    Under ``EXPANDING`` the threshold in row ``t`` is the tau-quantile of the
    signed, smoothed series over rows ``<= t``; under ``FROZEN`` it is the
    quantile over rows ``<= train_end`` for every row. Rows before the first
    complete moving-average window are dropped.
    """
    taus = _series_taus(config, panel.ids, panel.sectors)
    h_g = config.h_g
    signed = signed_smoothed(panel, h_g)[h_g - 1:]
    dates = panel.dates[h_g - 1:]
    n_rows, n_series = signed.shape
    thresholds = np.empty_like(signed)

    if config.threshold_policy is ThresholdPolicy.FROZEN:
        n_train = max(panel.rows_through(train_end) - (h_g - 1), 0)
        if n_train == 0:
            raise ValueError(f"no complete observations on or before {train_end}")
        for i in range(n_series):
            thresholds[:, i] = empirical_quantile(signed[:n_train, i], taus[i])
    else:
        ranks: dict[float, list[int]] = {}
        for i in range(n_series):
            tau = float(taus[i])
            if tau not in ranks:
                ranks[tau] = [_quantile_rank(t + 1, tau) - 1 for t in range(n_rows)]
            pos = ranks[tau]
            history: list[float] = []
            col = signed[:, i].tolist()
            out = [0.0] * n_rows
            for t in range(n_rows):
                bisect.insort(history, col[t])
                out[t] = history[pos[t]]
            thresholds[:, i] = out

    z = (signed <= thresholds).astype(np.int8)
    return BinaryStateMatrix(
        dates=tuple(dates),
        values=z,
        thresholds=thresholds,
        taus=taus,
        ids=tuple(panel.ids),
        config=config,
        sectors=tuple(panel.sectors),
    )


def _lower_median(values) -> float:
    s = sorted(values)
    return s[(len(s) - 1) // 2]


def select_tau(panel: PanelMatrix, h_g: int, train_end: str, scope: Scope | str = Scope.GLOBAL) -> TauSelection:
    """Pick the quantile level from how low each series sat in past recessions.

    For every series, each training recession month is mapped to its
    empirical CDF level within the training sample; the per-series median
    of those levels is then reduced by median over all series (global),
    within sectors, or not at all (per variable). Even-length medians take
    the lower-middle element so the result is always an attained level.
    """
    scope = Scope(scope)
    signed = signed_smoothed(panel, h_g)[h_g - 1:]
    y = panel.y[h_g - 1:]
    n = max(panel.rows_through(train_end) - (h_g - 1), 0)
    train, ytrain = signed[:n], y[:n]
    rec = np.flatnonzero(ytrain == 1)
    if rec.size == 0:
        raise ValueError(f"no recession months on or before {train_end}; cannot select tau")

    per_series: dict[str, float] = {}
    for i, sid in enumerate(panel.ids):
        ordered = np.sort(train[:, i])
        counts = np.searchsorted(ordered, train[rec, i], side="right")
        per_series[sid] = _lower_median([int(c) / n for c in counts])

    if scope is Scope.VARIABLE:
        values = dict(per_series)
    elif scope is Scope.GLOBAL:
        values = {"global": _lower_median(per_series.values())}
    else:
        groups: dict[str, list[float]] = {}
        for sid, sector in zip(panel.ids, panel.sectors):
            groups.setdefault(sector.value, []).append(per_series[sid])
        values = {k: _lower_median(v) for k, v in groups.items()}
    return TauSelection(scope=scope, values=values, per_series=per_series)


def resolve_tau(config: AtRiskConfig, panel: PanelMatrix, train_end: str) -> AtRiskConfig:
    """Return ``config`` with ``tau="auto"`` replaced by the selected levels."""
    if config.resolved:
        return config
    sel = select_tau(panel, config.h_g, train_end, config.scope)
    tau = sel.values["global"] if config.scope is Scope.GLOBAL else sel.values
    logger.info("selected tau (%s): %s", config.scope.value, tau)
    return replace(config, tau=tau)
