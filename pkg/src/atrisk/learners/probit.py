"""Probit maximum likelihood and the forecast-encompassing regression."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.stats import norm

from ..errors import SingularityError
from .logistic import check_binary

CLAMP = 1e-12


@dataclass(frozen=True)
class ProbitModel:
    params: np.ndarray
    cov: np.ndarray
    names: tuple[str, ...]
    loglik: float
    n_iter: int
    converged: bool

    @property
    def bse(self) -> np.ndarray:
        return np.sqrt(np.diag(self.cov))

    @property
    def zvalues(self) -> np.ndarray:
        return self.params / self.bse

    @property
    def pvalues(self) -> np.ndarray:
        return 2.0 * norm.sf(np.abs(self.zvalues))

    def predict_proba(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return norm.cdf(self.params[0] + x @ self.params[1:])

    def to_dict(self) -> dict:
        return {
            "kind": "probit",
            "params": self.params.tolist(),
            "cov": self.cov.tolist(),
            "names": list(self.names),
            "loglik": self.loglik,
            "n_iter": self.n_iter,
            "converged": self.converged,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ProbitModel":
        return cls(
            params=np.array(d["params"], dtype=float),
            cov=np.array(d["cov"], dtype=float),
            names=tuple(d["names"]),
            loglik=float(d["loglik"]),
            n_iter=int(d["n_iter"]),
            converged=bool(d["converged"]),
        )


def _loglik(theta, a, q) -> float:
    return float(norm.logcdf(q * (a @ theta)).sum())


def _score_and_info(theta, a, q):
    eta = a @ theta
    qe = q * eta
    mills = np.exp(norm.logpdf(qe) - norm.logcdf(qe))
    grad = a.T @ (q * mills)
    weights = mills * (mills + qe)
    info = (a * weights[:, None]).T @ a
    return grad, info


def fit_probit(x, y, names=None, max_iter: int = 100, tol: float = 1e-10) -> ProbitModel:
    """Probit MLE with an intercept; covariance is the inverse observed information."""
    x = np.asarray(x, dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    y = check_binary(y)
    a = np.hstack([np.ones((x.shape[0], 1)), x])
    if np.linalg.matrix_rank(a) < a.shape[1]:
        raise SingularityError("probit design matrix is rank deficient")
    q = 2.0 * y - 1.0
    theta = np.zeros(a.shape[1])
    ll = _loglik(theta, a, q)
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        grad, info = _score_and_info(theta, a, q)
        if np.max(np.abs(grad)) < 1e-9:
            converged = True
            break
        step = np.linalg.solve(info, grad)
        t = 1.0
        for _ in range(60):
            cand = theta + t * step
            new = _loglik(cand, a, q)
            if new >= ll:
                break
            t *= 0.5
        else:
            converged = True
            break
        theta = cand
        change = abs(new - ll) / max(1.0, abs(ll))
        ll = new
        if change < tol:
            converged = True
            break
    _, info = _score_and_info(theta, a, q)
    try:
        cov = np.linalg.inv(info)
    except np.linalg.LinAlgError as exc:
        raise SingularityError("observed information is singular") from exc
    cov = 0.5 * (cov + cov.T)
    names = tuple(names) if names is not None else ("const",) + tuple(f"x{j}" for j in range(x.shape[1]))
    return ProbitModel(params=theta, cov=cov, names=names, loglik=ll, n_iter=it, converged=converged)


def log_odds(p) -> np.ndarray:
    p = np.clip(np.asarray(p, dtype=float), CLAMP, 1.0 - CLAMP)
    return np.log(p / (1.0 - p))


def fit_probit_encompassing(p_a, p_b, y) -> ProbitModel:
    """Regress outcomes on the log-odds of two competing forecasts.

    ``P(y=1) = Phi(b0 + bA * L(pA) + bB * L(pB))``. A zero ``bB`` means
    forecast A encompasses forecast B.
    """
    la, lb = log_odds(p_a), log_odds(p_b)
    if la.shape != lb.shape or la.shape != np.shape(y):
        raise ValueError("forecast and outcome vectors must have equal length")
    if la.std() == 0 or lb.std() == 0:
        raise SingularityError("a forecast series is constant")
    corr = np.corrcoef(la, lb)[0, 1]
    if abs(corr) > 1.0 - 1e-10:
        raise SingularityError(f"forecast log-odds are collinear (corr={corr:.12f})")
    return fit_probit(np.column_stack([la, lb]), y, names=("const", "beta_A", "beta_B"))
