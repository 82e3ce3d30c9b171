"""Clipped streaming SGD for heavy-tailed mean estimation and regression."""

import csv
import io
import json

import numpy as np

from ._core import (
    StreamExhausted,
    clip,
    freedman_bound,
    geometric_median,
    median_of_means,
    quantile_loss,
    theory_general,
    theory_mean,
    theory_regression,
)
from . import _core

__all__ = [
    "StreamExhausted",
    "clip",
    "freedman_bound",
    "geometric_median",
    "median_of_means",
    "quantile_loss",
    "theory_general",
    "theory_mean",
    "theory_regression",
    "sample_task",
    "run_sgd",
    "run_experiment",
    "validate_config",
]


def validate_config(config=None):
    """Return the fully populated config dict, raising ValueError if it is inconsistent."""
    return json.loads(_core._validate_config(json.dumps(config or {})))


def sample_task(config, n, seed=0, stream=0):
    """Draw n samples (x, y) of the task described by `config` from stream (seed, stream)."""
    return _core._sample_task(json.dumps(config), n, seed, stream)


def run_sgd(config, x, y=None, *, gamma=0.0, clip_level=None, regularizer="none",
            reg_weight=0.0, trajectory=False):
    """One pass of (clipped) SGD over the rows of x. Returns (theta, trajectory or None)."""
    x = np.ascontiguousarray(x, dtype=float)
    if y is None:
        y = np.zeros(x.shape[0])
    return _core._run_sgd(json.dumps(config), x, np.asarray(y, dtype=float), gamma, clip_level,
                          regularizer, reg_weight, trajectory)


def run_experiment(config):
    """Run a Monte-Carlo experiment. Returns summary rows, resolved config and per-trial errors."""
    raw = _core._run_experiment(json.dumps(config))
    rows = [
        {k: (v if k == "method" else float(v)) for k, v in row.items()}
        for row in csv.DictReader(io.StringIO(raw["summary_csv"]))
    ]
    return {
        "summary": rows,
        "resolved": json.loads(raw["resolved_json"]),
        "errors": {k: np.asarray(v) for k, v in raw["errors"].items()},
    }
