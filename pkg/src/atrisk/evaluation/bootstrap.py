"""Circular stationary bootstrap for forecast-evaluation metrics.

Every replication draws from its own generator spawned from the seed, so
results do not depend on evaluation order.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Callable

import numpy as np

from ..errors import UndefinedMetricError
from .metrics import HIGHER_IS_BETTER, METRICS

Metric = Callable[[np.ndarray, np.ndarray], float]


def block_length(n: int, h: int) -> int:
    """Mean block length ``max(h, round(n ** (1/3)))`` (round half to even)."""
    return max(int(h), round(n ** (1.0 / 3.0)))


def stationary_indices(n: int, mean_block: float, rng: np.random.Generator, return_starts: bool = False):
    """Resampling indices with geometric block lengths and wrap-around.

    Each position starts a new block with probability ``1 / mean_block`` at
    a uniformly drawn index; otherwise it continues the previous block.
    """
    starts = rng.random(n) < 1.0 / mean_block
    starts[0] = True
    origin = rng.integers(0, n, size=n)
    pos = np.arange(n)
    block_first = np.maximum.accumulate(np.where(starts, pos, 0))
    idx = (origin[block_first] + pos - block_first) % n
    return (idx, starts) if return_starts else idx


def _generators(seed: int, b: int) -> list[np.random.Generator]:
    return [np.random.Generator(np.random.PCG64(s)) for s in np.random.SeedSequence(seed).spawn(b)]


def _resolve(metric: Metric | str) -> Metric:
    return METRICS[metric] if isinstance(metric, str) else metric


@dataclass(frozen=True)
class BootstrapResult:
    point: float
    ci: tuple[float, float]
    values: np.ndarray
    n_discarded: int
    block_length: int
    seed: int


@dataclass(frozen=True)
class PairedBootstrapResult:
    proposed: BootstrapResult
    benchmark: BootstrapResult
    benchmark_share: float   # replications where the benchmark scored strictly better


def _check(n: int, L: int, B: int) -> None:
    if n < L:
        raise ValueError(f"sample of {n} shorter than mean block length {L}")
    if B < 100:
        warnings.warn(f"only {B} bootstrap replications requested", stacklevel=3)


def stationary_bootstrap(
    p,
    y,
    metric: Metric | str,
    h: int = 1,
    B: int = 1000,
    seed: int = 0,
    level: float = 0.95,
    mean_block: int | None = None,
) -> BootstrapResult:
    """Percentile interval for ``metric`` under joint (p, y) block resampling.

    Replications on which the metric is undefined are discarded and
    counted, never imputed.
    """
    fn = _resolve(metric)
    p = np.asarray(p, dtype=float)
    y = np.asarray(y)
    n = p.size
    L = mean_block or block_length(n, h)
    _check(n, L, B)
    values = []
    for rng in _generators(seed, B):
        idx = stationary_indices(n, L, rng)
        try:
            values.append(fn(p[idx], y[idx]))
        except UndefinedMetricError:
            continue
    if not values:
        raise UndefinedMetricError("metric undefined on every bootstrap replication")
    values = np.array(values)
    alpha = 100 * (1 - level) / 2
    lo, hi = np.percentile(values, [alpha, 100 - alpha])
    return BootstrapResult(
        point=fn(p, y), ci=(float(lo), float(hi)), values=values,
        n_discarded=B - values.size, block_length=L, seed=seed,
    )


def paired_bootstrap(
    p_proposed,
    p_benchmark,
    y,
    metric: Metric | str,
    h: int = 1,
    B: int = 1000,
    seed: int = 0,
    level: float = 0.95,
    higher_is_better: bool | None = None,
    mean_block: int | None = None,
) -> PairedBootstrapResult:
    """Bootstrap two forecasts on identical resampled index sequences."""
    fn = _resolve(metric)
    if higher_is_better is None:
        if not isinstance(metric, str):
            raise ValueError("pass higher_is_better for a custom metric")
        higher_is_better = HIGHER_IS_BETTER[metric]
    pa = np.asarray(p_proposed, dtype=float)
    pb = np.asarray(p_benchmark, dtype=float)
    y = np.asarray(y)
    if pa.shape != pb.shape or pa.shape != y.shape:
        raise ValueError("forecast vectors must be aligned")
    n = pa.size
    L = mean_block or block_length(n, h)
    _check(n, L, B)
    va, vb = [], []
    for rng in _generators(seed, B):
        idx = stationary_indices(n, L, rng)
        try:
            a, b = fn(pa[idx], y[idx]), fn(pb[idx], y[idx])
        except UndefinedMetricError:
            continue
        va.append(a)
        vb.append(b)
    if not va:
        raise UndefinedMetricError("metric undefined on every bootstrap replication")
    va, vb = np.array(va), np.array(vb)
    alpha = 100 * (1 - level) / 2
    q = [alpha, 100 - alpha]

    def result(point, vals):
        lo, hi = np.percentile(vals, q)
        return BootstrapResult(point, (float(lo), float(hi)), vals, B - vals.size, L, seed)

    wins = vb > va if higher_is_better else vb < va
    return PairedBootstrapResult(
        proposed=result(fn(pa, y), va),
        benchmark=result(fn(pb, y), vb),
        benchmark_share=float(wins.mean()),
    )
