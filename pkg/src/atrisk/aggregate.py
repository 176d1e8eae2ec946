"""Feature construction: lag stacking, diffusion index and PCA factors."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Sequence

import numpy as np

from .at_risk import BinaryStateMatrix

DEFAULT_LAGS = (0, 3, 6, 12)


class Provenance(str, Enum):
    DISAGGREGATED = "disaggregated"
    SIMPLE_AVERAGE = "average"
    PCA = "pca"


@dataclass(frozen=True)
class FeatureBlock:
    """Model-ready design matrix.

    ``labels[j]`` is ``(base_id, lag)`` for column ``j``; rows are indexed by
    ``dates`` (the forecast origins that have every lag available).
    """

    dates: tuple[str, ...]
    matrix: np.ndarray
    labels: tuple[tuple[str, int], ...]
    provenance: Provenance = Provenance.DISAGGREGATED

    def lag_columns(self, lag: int) -> np.ndarray:
        return np.array([j for j, (_, l) in enumerate(self.labels) if l == lag], dtype=int)


@dataclass(frozen=True)
class PCAFit:
    loadings: np.ndarray      # N x K, orthonormal columns
    means: np.ndarray         # N
    scales: np.ndarray        # N; ones when not standardised
    eigenvalues: np.ndarray   # all N, descending

    @property
    def k(self) -> int:
        return self.loadings.shape[1]

    def explained_ratio(self) -> np.ndarray:
        total = self.eigenvalues.sum()
        return self.eigenvalues[: self.k] / total


def check_lags(lags: Sequence[int]) -> tuple[int, ...]:
    out = tuple(sorted(set(int(l) for l in lags)))
    if not out:
        raise ValueError("lag set is empty")
    if out[0] < 0:
        raise ValueError(f"negative lag in {lags}")
    return out


def lag_stack(
    matrix,
    lags: Sequence[int] = DEFAULT_LAGS,
    labels: Sequence[str] | None = None,
    dates: Sequence[str] | None = None,
    provenance: Provenance = Provenance.DISAGGREGATED,
) -> FeatureBlock:
    """Concatenate ``M[t - l]`` for each lag ``l`` (lag-major column order).

    Rows whose deepest lag falls before the sample start are dropped.
    """
    m = np.asarray(matrix, dtype=float)
    if m.ndim == 1:
        m = m[:, None]
    n_rows, n_cols = m.shape
    lags = check_lags(lags)
    deepest = lags[-1]
    if deepest >= n_rows:
        raise ValueError(f"lag {deepest} needs more than {n_rows} rows")
    labels = [f"x{j}" for j in range(n_cols)] if labels is None else list(labels)
    if len(labels) != n_cols:
        raise ValueError("one label per column required")
    dates = tuple(range(n_rows)) if dates is None else tuple(dates)
    blocks = [m[deepest - l: n_rows - l] for l in lags]
    return FeatureBlock(
        dates=dates[deepest:],
        matrix=np.hstack(blocks),
        labels=tuple((name, l) for l in lags for name in labels),
        provenance=provenance,
    )


def simple_average(z) -> np.ndarray:
    """Cross-sectional share of series currently at risk."""
    values = z.values if isinstance(z, BinaryStateMatrix) else np.asarray(z)
    if values.size == 0:
        raise ValueError("empty state matrix")
    return values.astype(float).mean(axis=1)


def _orient(vectors: np.ndarray) -> np.ndarray:
    # largest-magnitude entry of every column made positive
    idx = np.argmax(np.abs(vectors), axis=0)
    signs = np.sign(vectors[idx, np.arange(vectors.shape[1])])
    signs[signs == 0] = 1.0
    return vectors * signs


def pca_fit(matrix, k: int, standardize: bool = False, labels: Sequence[str] | None = None) -> PCAFit:
    """Principal components of the sample covariance (``ddof=1``).

    Columns are centred; with ``standardize`` they are also scaled to unit
    sample standard deviation, which fails on constant columns.
    """
    m = np.asarray(matrix, dtype=float)
    n_rows, n_cols = m.shape
    if not 1 <= k <= min(n_cols, n_rows):
        raise ValueError(f"K={k} must lie in [1, min(N={n_cols}, rows={n_rows})]")
    if n_rows < 2:
        raise ValueError("need at least two rows for a sample covariance")
    means = m.mean(axis=0)
    scales = np.ones(n_cols)
    if standardize:
        scales = m.std(axis=0, ddof=1)
        flat = np.flatnonzero(scales == 0)
        if flat.size:
            name = labels[flat[0]] if labels is not None else f"column {flat[0]}"
            raise ValueError(f"cannot standardise zero-variance {name}")
    x = (m - means) / scales
    cov = x.T @ x / (n_rows - 1)
    eigenvalues, vectors = np.linalg.eigh(cov)
    order = np.argsort(eigenvalues)[::-1]
    eigenvalues, vectors = eigenvalues[order], vectors[:, order]
    return PCAFit(
        loadings=_orient(vectors[:, :k]),
        means=means,
        scales=scales,
        eigenvalues=eigenvalues,
    )


def pca_project(matrix, loadings, means, scales=None) -> np.ndarray:
    """Factor scores ``((M - mu) / scale) @ V`` with frozen parameters."""
    m = np.asarray(matrix, dtype=float)
    loadings = np.asarray(loadings)
    if m.ndim != 2 or m.shape[1] != loadings.shape[0]:
        raise ValueError(f"matrix has {m.shape[-1]} columns, loadings expect {loadings.shape[0]}")
    x = m - means
    if scales is not None:
        x = x / scales
    return x @ loadings
