"""Penalty selection by expanding-window time-series cross-validation."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .learners.logistic import fit_logistic

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class CVPlan:
    """Contiguous blocks of size ``block``; fold k trains on the first k blocks.

    The final validation block absorbs the remainder rows.
    """

    n: int
    k: int
    block: int
    splits: tuple[tuple[np.ndarray, np.ndarray], ...]


def make_splits(n: int, k: int = 5) -> CVPlan:
    if k < 1:
        raise ValueError("need at least one split")
    if n < 2 * (k + 1):
        raise ValueError(f"{n} rows are too few for {k} splits")
    s = n // (k + 1)
    splits = []
    for fold in range(1, k + 1):
        train = np.arange(0, s * fold)
        stop = n if fold == k else s * (fold + 1)
        splits.append((train, np.arange(s * fold, stop)))
    return CVPlan(n=n, k=k, block=s, splits=tuple(splits))


def penalty_grid(lo: float = 1e-3, hi: float = 1e1, points: int = 30) -> np.ndarray:
    """Log-spaced candidate values of C, endpoints included."""
    if points == 1:
        return np.array([float(lo)])
    return np.logspace(np.log10(lo), np.log10(hi), points)


@dataclass(frozen=True)
class TuningResult:
    C: float
    grid: np.ndarray
    scores: np.ndarray                 # mean validation Brier per grid value
    fold_scores: np.ndarray            # grid x folds, NaN for skipped folds
    used_folds: tuple[int, ...]
    predictions: dict = field(default_factory=dict, repr=False)  # (grid idx, fold) -> p


def select_C(x, y, grid=None, plan: CVPlan | None = None, standardize: bool = False) -> TuningResult:
    """Choose C minimising the average validation Brier score.

    Folds whose training window holds a single class are skipped. Exact
    ties go to the larger C.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y)
    grid = penalty_grid() if grid is None else np.asarray(grid, dtype=float)
    plan = plan or make_splits(len(y))
    if plan.n != len(y):
        raise ValueError(f"plan built for {plan.n} rows, data has {len(y)}")

    used = []
    for f, (train, _) in enumerate(plan.splits):
        if np.unique(y[train]).size < 2:
            logger.warning("CV fold %d skipped: training window has a single class", f + 1)
        else:
            used.append(f)
    if not used:
        raise ValueError("every CV fold has a single-class training window")
    if grid.size == 1:
        return TuningResult(
            C=float(grid[0]), grid=grid, scores=np.array([np.nan]),
            fold_scores=np.full((1, plan.k), np.nan), used_folds=tuple(used),
        )

    fold_scores = np.full((grid.size, plan.k), np.nan)
    preds = {}
    for g, C in enumerate(grid):
        for f in used:
            train, val = plan.splits[f]
            model = fit_logistic(x[train], y[train], C, standardize=standardize)
            p = model.predict_proba(x[val])
            preds[(g, f)] = p
            fold_scores[g, f] = np.mean((p - y[val]) ** 2)
    scores = fold_scores[:, used].mean(axis=1)
    best = scores.min()
    choice = max((g for g in range(grid.size) if scores[g] == best), key=lambda g: grid[g])
    return TuningResult(
        C=float(grid[choice]),
        grid=grid,
        scores=scores,
        fold_scores=fold_scores,
        used_folds=tuple(used),
        predictions=preds,
    )
