"""Scores for probability forecasts of a binary event."""

from __future__ import annotations

import numpy as np
from scipy.stats import rankdata

from ..errors import UndefinedMetricError


def _pair(p, y) -> tuple[np.ndarray, np.ndarray]:
    p = np.asarray(p, dtype=float)
    y = np.asarray(y)
    if p.shape != y.shape or p.ndim != 1:
        raise ValueError("p and y must be 1-D and of equal length")
    if p.size == 0:
        raise UndefinedMetricError("empty forecast vector")
    return p, y.astype(float)


def pr_auc(p, y) -> float:
    """Area under the precision-recall curve by rectangular steps.

    Predictions are swept from high to low; tied predictions enter as one
    block. Each distinct threshold contributes ``precision * delta recall``.
    """
    p, y = _pair(p, y)
    n_pos = y.sum()
    if n_pos == 0:
        raise UndefinedMetricError("PR AUC undefined without positive labels")
    order = np.argsort(-p, kind="stable")
    ps, ys = p[order], y[order]
    # last index of each tie block
    ends = np.r_[np.flatnonzero(np.diff(ps) != 0), ps.size - 1]
    tp = np.cumsum(ys)[ends]
    fp = (ends + 1) - tp
    recall = tp / n_pos
    precision = tp / (tp + fp)
    return float(np.sum(precision * np.diff(np.r_[0.0, recall])))


def roc_auc(p, y) -> float:
    """Mann-Whitney form: P(p_pos > p_neg) + 0.5 P(tie)."""
    p, y = _pair(p, y)
    n_pos = y.sum()
    n_neg = y.size - n_pos
    if n_pos == 0 or n_neg == 0:
        raise UndefinedMetricError("ROC AUC needs both classes")
    ranks = rankdata(p)
    return float((ranks[y == 1].sum() - n_pos * (n_pos + 1) / 2) / (n_pos * n_neg))


def brier(p, y) -> float:
    p, y = _pair(p, y)
    return float(np.mean((p - y) ** 2))


def decompose_mse(p, y) -> tuple[float, float, float]:
    """Brier score within recession rows, within expansion rows, and overall.

    A regime with no rows gets NaN.
    """
    p, y = _pair(p, y)
    sq = (p - y) ** 2
    rec = sq[y == 1]
    exp = sq[y == 0]
    return (
        float(rec.mean()) if rec.size else float("nan"),
        float(exp.mean()) if exp.size else float("nan"),
        float(sq.mean()),
    )


METRICS = {"pr_auc": pr_auc, "roc_auc": roc_auc, "brier": brier}
HIGHER_IS_BETTER = {"pr_auc": True, "roc_auc": True, "brier": False}
