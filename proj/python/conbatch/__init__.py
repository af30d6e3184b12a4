"""Budget-constrained batch Bayesian active learning."""

import json as _json

from conbatch._core import (
    __version__,
    batch_mutual_information,
    conditional_entropy,
    entropy,
    generate_dataset,
    haversine_m,
    score_candidates,
    validate_dataset,
)
from conbatch import _core


def run_experiment(config, seed=0):
    """Run one active-learning experiment.

    `config` may be a dict or a JSON string; returns the result series as a
    dict with the same layout the CLI writes to disk.
    """
    if not isinstance(config, str):
        config = _json.dumps(config)
    return _json.loads(_core.run_experiment(config, seed))


__all__ = [
    "__version__",
    "batch_mutual_information",
    "conditional_entropy",
    "entropy",
    "generate_dataset",
    "haversine_m",
    "run_experiment",
    "score_candidates",
    "validate_dataset",
]
