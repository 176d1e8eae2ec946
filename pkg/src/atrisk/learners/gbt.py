"""Newton-boosted regression trees for the logistic loss.

Depth-limited trees grown level by level with exact greedy splits. A node
with gradient sum ``G`` and Hessian sum ``H`` gets weight
``-G / (H + leaf_l2)``; a split is scored by

    gain = 0.5 * (GL**2/(HL+l2) + GR**2/(HR+l2) - G**2/(H+l2))

and taken only when the gain is positive and both children carry at least
``min_child_weight`` Hessian mass.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numba
import numpy as np
from scipy.special import expit, logit

from .logistic import check_binary


@dataclass(frozen=True)
class GBTParams:
    rounds: int = 100
    max_depth: int = 6
    learning_rate: float = 0.3
    leaf_l2: float = 1.0
    min_child_weight: float = 1.0

    def __post_init__(self):
        if self.rounds < 0 or self.max_depth < 1:
            raise ValueError("rounds must be >= 0 and max_depth >= 1")
        if not self.learning_rate > 0 or self.leaf_l2 < 0 or self.min_child_weight < 0:
            raise ValueError("learning_rate > 0, leaf_l2 >= 0, min_child_weight >= 0 required")


@dataclass(frozen=True)
class Tree:
    """Flat binary tree; ``feature[k] == -1`` marks a leaf.

    Rows with ``x[feature] < threshold`` go to ``left``.
    """

    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    weight: np.ndarray
    gain: np.ndarray
    cover: np.ndarray
    depth: np.ndarray

    @property
    def max_depth(self) -> int:
        return int(self.depth.max())

    def apply(self, x: np.ndarray) -> np.ndarray:
        """Leaf index reached by every row."""
        node = np.zeros(x.shape[0], dtype=np.int64)
        rows = np.arange(x.shape[0])
        for _ in range(self.max_depth):
            f = self.feature[node]
            split = f >= 0
            if not split.any():
                break
            go_left = x[rows, np.where(split, f, 0)] < self.threshold[node]
            node = np.where(split, np.where(go_left, self.left[node], self.right[node]), node)
        return node

    def to_dict(self) -> dict:
        return {k: getattr(self, k).tolist() for k in self.__dataclass_fields__}

    @classmethod
    def from_dict(cls, d: dict) -> "Tree":
        ints = {"feature", "left", "right", "depth"}
        return cls(**{k: np.array(v, dtype=np.int64 if k in ints else float) for k, v in d.items()})


@dataclass(frozen=True)
class GBTModel:
    trees: tuple[Tree, ...]
    base_score: float
    params: GBTParams
    labels: tuple = ()
    n_features: int = 0
    train_loss: tuple[float, ...] = field(default=(), repr=False)

    def decision_function(self, x, n_rounds: int | None = None) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if x.ndim == 1:
            x = x[None, :]
        if x.shape[1] != self.n_features:
            raise ValueError(f"expected {self.n_features} columns, got {x.shape[1]}")
        margin = np.full(x.shape[0], self.base_score)
        for tree in self.trees[:n_rounds]:
            margin += self.params.learning_rate * tree.weight[tree.apply(x)]
        return margin

    def predict_proba(self, x) -> np.ndarray:
        return expit(self.decision_function(x))

    def to_dict(self) -> dict:
        return {
            "kind": "gbt",
            "base_score": self.base_score,
            "params": dict(self.params.__dict__),
            "labels": [list(l) if isinstance(l, tuple) else l for l in self.labels],
            "n_features": self.n_features,
            "trees": [t.to_dict() for t in self.trees],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "GBTModel":
        return cls(
            trees=tuple(Tree.from_dict(t) for t in d["trees"]),
            base_score=float(d["base_score"]),
            params=GBTParams(**d["params"]),
            labels=tuple(tuple(l) if isinstance(l, list) else l for l in d["labels"]),
            n_features=int(d["n_features"]),
        )


@numba.njit(cache=True)
def _best_splits(order, values, node_of, grad, hess, node_g, node_h, active, l2, min_child):
    n, n_feat = order.shape
    n_nodes = node_g.shape[0]
    best_gain = np.zeros(n_nodes)
    best_feat = np.full(n_nodes, -1, dtype=np.int64)
    best_thr = np.zeros(n_nodes)
    g_left = np.zeros(n_nodes)
    h_left = np.zeros(n_nodes)
    last = np.zeros(n_nodes)
    seen = np.zeros(n_nodes, dtype=np.bool_)
    parent = np.zeros(n_nodes)
    for k in range(n_nodes):
        if active[k]:
            parent[k] = node_g[k] * node_g[k] / (node_h[k] + l2)
    for f in range(n_feat):
        g_left[:] = 0.0
        h_left[:] = 0.0
        seen[:] = False
        for r in range(n):
            i = order[r, f]
            nd = node_of[i]
            if nd < 0 or not active[nd]:
                continue
            v = values[r, f]
            if seen[nd] and v > last[nd]:
                gl = g_left[nd]
                hl = h_left[nd]
                gr = node_g[nd] - gl
                hr = node_h[nd] - hl
                if hl >= min_child and hr >= min_child:
                    gain = 0.5 * (gl * gl / (hl + l2) + gr * gr / (hr + l2) - parent[nd])
                    if gain > best_gain[nd]:
                        best_gain[nd] = gain
                        best_feat[nd] = f
                        mid = 0.5 * (last[nd] + v)
                        best_thr[nd] = mid if mid > last[nd] else v
            g_left[nd] += grad[i]
            h_left[nd] += hess[i]
            last[nd] = v
            seen[nd] = True
    return best_gain, best_feat, best_thr


def _grow_tree(x, order, values, grad, hess, p: GBTParams) -> tuple[Tree, np.ndarray]:
    n = x.shape[0]
    node_of = np.zeros(n, dtype=np.int64)
    feature, threshold, left, right, depth = [-1], [0.0], [-1], [-1], [0]
    split_gain: dict[int, float] = {}
    frontier = [0]
    for level in range(p.max_depth):
        n_nodes = len(feature)
        node_g = np.bincount(node_of, weights=grad, minlength=n_nodes)
        node_h = np.bincount(node_of, weights=hess, minlength=n_nodes)
        active = np.zeros(n_nodes, dtype=np.bool_)
        active[frontier] = True
        gains, feats, thrs = _best_splits(
            order, values, node_of, grad, hess, node_g, node_h, active, p.leaf_l2, p.min_child_weight
        )
        next_frontier = []
        for nd in frontier:
            f = int(feats[nd])
            if f < 0:
                continue
            lo, hi = len(feature), len(feature) + 1
            feature[nd], threshold[nd], left[nd], right[nd] = f, float(thrs[nd]), lo, hi
            split_gain[nd] = float(gains[nd])
            feature += [-1, -1]
            threshold += [0.0, 0.0]
            left += [-1, -1]
            right += [-1, -1]
            depth += [level + 1, level + 1]
            next_frontier += [lo, hi]
            rows = np.flatnonzero(node_of == nd)
            node_of[rows] = np.where(x[rows, f] < thrs[nd], lo, hi)
        if not next_frontier:
            break
        frontier = next_frontier

    n_nodes = len(feature)
    node_g = np.bincount(node_of, weights=grad, minlength=n_nodes)
    node_h = np.bincount(node_of, weights=hess, minlength=n_nodes)
    is_leaf = np.array(feature) < 0
    weight = np.zeros(n_nodes)
    weight[is_leaf] = -node_g[is_leaf] / (node_h[is_leaf] + p.leaf_l2)
    gain = np.zeros(n_nodes)
    for nd, g in split_gain.items():
        gain[nd] = g
    cover = node_h.copy()
    for nd in range(n_nodes - 1, -1, -1):
        if feature[nd] >= 0:
            cover[nd] = cover[left[nd]] + cover[right[nd]]
    tree = Tree(
        feature=np.array(feature, dtype=np.int64),
        threshold=np.array(threshold, dtype=float),
        left=np.array(left, dtype=np.int64),
        right=np.array(right, dtype=np.int64),
        weight=weight,
        gain=gain,
        cover=cover,
        depth=np.array(depth, dtype=np.int64),
    )
    return tree, weight[node_of]


def logistic_loss(y, margin) -> float:
    return float(np.mean(np.logaddexp(0.0, margin) - y * margin))


def fit_gbt(x, y, params: GBTParams | None = None, labels: Sequence | None = None, **kwargs) -> GBTModel:
    """Boost ``params.rounds`` trees on the logistic loss.

    The starting margin is the log-odds of the training prevalence, so a
    zero-round model predicts the base rate.
    """
    params = params or GBTParams(**kwargs)
    x = np.asarray(x, dtype=float)
    if x.ndim != 2 or not np.isfinite(x).all():
        raise ValueError("design matrix must be 2-D and finite")
    y = check_binary(y)
    if x.shape[0] != y.shape[0]:
        raise ValueError("row count of x and y differ")
    base = float(logit(y.mean()))
    margin = np.full(y.shape[0], base)
    order = np.ascontiguousarray(np.argsort(x, axis=0, kind="stable"))
    values = np.ascontiguousarray(np.take_along_axis(x, order, axis=0))
    trees = []
    losses = [logistic_loss(y, margin)]
    for _ in range(params.rounds):
        prob = expit(margin)
        grad = prob - y
        hess = prob * (1.0 - prob)
        tree, leaf_w = _grow_tree(x, order, values, grad, hess, params)
        trees.append(tree)
        margin = margin + params.learning_rate * leaf_w
        losses.append(logistic_loss(y, margin))
    return GBTModel(
        trees=tuple(trees),
        base_score=base,
        params=params,
        labels=tuple(labels) if labels is not None else tuple(range(x.shape[1])),
        n_features=x.shape[1],
        train_loss=tuple(losses),
    )
