"""MAP partitions and limit functionals of the CRP-based Gaussian mixture model."""

import json

from ._core import *  # noqa: F401,F403
from ._core import __version__, _load_records, _run_experiment


def run_experiment(experiment, **keys):
    """Run an experiment grid; returns (records, summary) as plain Python objects.

    Keyword values override the experiment's defaults (lists become
    space-separated values).
    """
    flat = {"experiment": experiment}
    for key, value in keys.items():
        if isinstance(value, (list, tuple)):
            value = " ".join(str(v) for v in value)
        flat[key] = str(value)
    records, summary = _run_experiment(flat)
    return json.loads(records), json.loads(summary)


def load_records(directory):
    return json.loads(_load_records(str(directory)))
