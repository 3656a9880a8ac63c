"""Path-lifting tools for DAG ReLU networks (bindings to the C++ core)."""

import json as _json

from ._core import (
    Error,
    Network,
    cli,
    equality_witness,
    grad_path_norm,
    linearized_output,
    normalize,
    path_count,
    path_lifting,
    path_mag_scores,
    path_metric,
    path_norm,
    prune,
    rescale_random,
    run_experiment_json,
    sign_counterexample,
    verify_bound,
)


def run_experiment(**config):
    """Run the train/prune/rewind pipeline; keyword arguments override config fields."""
    return _json.loads(run_experiment_json(_json.dumps(config)))


__all__ = [
    "Error",
    "Network",
    "cli",
    "equality_witness",
    "grad_path_norm",
    "linearized_output",
    "normalize",
    "path_count",
    "path_lifting",
    "path_mag_scores",
    "path_metric",
    "path_norm",
    "prune",
    "rescale_random",
    "run_experiment",
    "sign_counterexample",
    "verify_bound",
]
