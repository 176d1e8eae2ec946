"""Per-variable importance scores and model (de)serialisation."""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .gbt import GBTModel
from .logistic import LogisticModel
from .probit import ProbitModel


def base_id(label) -> str:
    """Strip the lag from a ``(base_id, lag)`` column label."""
    if isinstance(label, (tuple, list)):
        return str(label[0])
    return str(label)


def _grouped_mean(labels, scores) -> dict[str, float]:
    sums: dict[str, float] = {}
    counts: dict[str, int] = {}
    for label, s in zip(labels, scores):
        key = base_id(label)
        sums[key] = sums.get(key, 0.0) + float(s)
        counts[key] = counts.get(key, 0) + 1
    return {k: sums[k] / counts[k] for k in sums}


def importance(model: LogisticModel | GBTModel) -> dict[str, float]:
    """Importance of each base variable, all lags pooled.

    Logistic: mean absolute coefficient over the variable's lag columns, on
    the scale the model was fitted on. Trees: average split gain over every
    split that used one of the variable's columns (zero if never split on).
    """
    if isinstance(model, LogisticModel):
        return _grouped_mean(model.labels, np.abs(model.coef))
    if isinstance(model, GBTModel):
        keys = list(dict.fromkeys(base_id(l) for l in model.labels))
        total = dict.fromkeys(keys, 0.0)
        count = dict.fromkeys(keys, 0)
        for tree in model.trees:
            for f, g in zip(tree.feature, tree.gain):
                if f >= 0:
                    key = base_id(model.labels[f])
                    total[key] += float(g)
                    count[key] += 1
        return {k: (total[k] / count[k] if count[k] else 0.0) for k in keys}
    raise TypeError(f"no importance defined for {type(model).__name__}")


_KINDS = {"logistic": LogisticModel, "gbt": GBTModel, "probit": ProbitModel}


def model_to_json(model) -> str:
    return json.dumps(model.to_dict())


def model_from_json(text: str):
    d = json.loads(text)
    return _KINDS[d["kind"]].from_dict(d)


def save_model(model, path: str | Path) -> None:
    Path(path).write_text(model_to_json(model), encoding="utf-8")


def load_model(path: str | Path):
    return model_from_json(Path(path).read_text(encoding="utf-8"))
