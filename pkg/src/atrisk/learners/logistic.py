"""Ridge-penalised logistic regression fitted by damped Newton steps."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.special import expit

from ..errors import SingleClassError

GRAD_TOL = 1e-8
OBJ_RTOL = 1e-10


@dataclass(frozen=True)
class LogisticModel:
    intercept: float
    coef: np.ndarray
    C: float
    labels: tuple = ()
    means: np.ndarray | None = None
    scales: np.ndarray | None = None
    n_iter: int = 0
    converged: bool = True
    objective_path: tuple[float, ...] = field(default=(), repr=False)

    @property
    def standardized(self) -> bool:
        return self.means is not None

    def _design(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if x.ndim == 1:
            x = x[None, :]
        if x.shape[1] != self.coef.shape[0]:
            raise ValueError(f"expected {self.coef.shape[0]} columns, got {x.shape[1]}")
        if self.means is not None:
            x = (x - self.means) / self.scales
        return x

    def decision_function(self, x) -> np.ndarray:
        return self.intercept + self._design(x) @ self.coef

    def predict_proba(self, x) -> np.ndarray:
        return expit(self.decision_function(x))

    def to_dict(self) -> dict:
        return {
            "kind": "logistic",
            "intercept": self.intercept,
            "coef": self.coef.tolist(),
            "C": self.C,
            "labels": [list(l) if isinstance(l, tuple) else l for l in self.labels],
            "means": None if self.means is None else self.means.tolist(),
            "scales": None if self.scales is None else self.scales.tolist(),
            "n_iter": self.n_iter,
            "converged": self.converged,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "LogisticModel":
        return cls(
            intercept=float(d["intercept"]),
            coef=np.array(d["coef"], dtype=float),
            C=float(d["C"]),
            labels=tuple(tuple(l) if isinstance(l, list) else l for l in d["labels"]),
            means=None if d["means"] is None else np.array(d["means"], dtype=float),
            scales=None if d["scales"] is None else np.array(d["scales"], dtype=float),
            n_iter=int(d["n_iter"]),
            converged=bool(d["converged"]),
        )


def check_binary(y) -> np.ndarray:
    y = np.asarray(y)
    if y.ndim != 1 or not np.isin(y, (0, 1)).all():
        raise ValueError("labels must be a 1-D 0/1 vector")
    if y.min() == y.max():
        raise SingleClassError(f"only class {int(y[0])} present in {y.size} labels")
    return y.astype(float)


def penalized_loglik(theta, a, y, C) -> float:
    """Log-likelihood minus ``sum(beta**2) / C``; ``theta[0]`` is the free intercept."""
    eta = a @ theta
    return float(y @ eta - np.logaddexp(0.0, eta).sum() - (theta[1:] @ theta[1:]) / C)


def penalized_gradient(theta, a, y, C) -> np.ndarray:
    g = a.T @ (y - expit(a @ theta))
    g[1:] -= 2.0 * theta[1:] / C
    return g


def _add_intercept(x: np.ndarray) -> np.ndarray:
    return np.hstack([np.ones((x.shape[0], 1)), x])


def fit_logistic(
    x,
    y,
    C: float,
    standardize: bool = False,
    labels: Sequence | None = None,
    max_iter: int = 200,
) -> LogisticModel:
    """Maximise the ridge-penalised log-likelihood.

    Parameters
    ----------
    x : (n, m) array
    y : (n,) 0/1 array with both classes present
    C : inverse penalty strength; the penalty is ``sum(beta**2) / C`` and
        never touches the intercept
    standardize : centre and scale columns with training moments first
        (constant columns are left unscaled)

    Starts from zero and takes Newton steps, halving the step until the
    objective does not decrease. Stops when the gradient max-norm falls
    below 1e-8 or the relative objective change below 1e-10.
    """
    x = np.asarray(x, dtype=float)
    if x.ndim != 2:
        raise ValueError("design matrix must be 2-D")
    if not np.isfinite(x).all():
        raise ValueError("design matrix contains non-finite values")
    y = check_binary(y)
    if x.shape[0] != y.shape[0]:
        raise ValueError("row count of x and y differ")
    if not C > 0:
        raise ValueError(f"C must be positive, got {C}")

    means = scales = None
    if standardize:
        means = x.mean(axis=0)
        scales = x.std(axis=0)
        scales[scales == 0] = 1.0
        x = (x - means) / scales
    a = _add_intercept(x)
    m = a.shape[1]
    ridge = np.full(m, 2.0 / C)
    ridge[0] = 0.0

    theta = np.zeros(m)
    obj = penalized_loglik(theta, a, y, C)
    path = [obj]
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        p = expit(a @ theta)
        grad = a.T @ (y - p) - ridge * theta
        if np.max(np.abs(grad)) < GRAD_TOL:
            converged = True
            it -= 1
            break
        w = p * (1.0 - p)
        info = (a * w[:, None]).T @ a
        info[np.diag_indices(m)] += ridge
        step = np.linalg.solve(info, grad)
        t = 1.0
        for _ in range(60):
            cand = theta + t * step
            new = penalized_loglik(cand, a, y, C)
            if new >= obj:
                break
            t *= 0.5
        else:
            converged = True  # no ascent direction left at machine precision
            break
        theta = cand
        change = abs(new - obj) / max(1.0, abs(obj))
        obj = new
        path.append(obj)
        if change < OBJ_RTOL:
            converged = True
            break

    return LogisticModel(
        intercept=float(theta[0]),
        coef=theta[1:].copy(),
        C=float(C),
        labels=tuple(labels) if labels is not None else tuple(range(m - 1)),
        means=means,
        scales=scales,
        n_iter=it,
        converged=converged,
        objective_path=tuple(path),
    )


def predict_logistic(model: LogisticModel, x) -> np.ndarray:
    return model.predict_proba(x)
