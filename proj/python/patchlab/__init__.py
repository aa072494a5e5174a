"""Vortex patch contour dynamics and curvature diagnostics."""

import json

from ._core import *  # noqa: F401,F403
from ._core import __version__, run_experiment as _run_experiment, validate_config as _validate_config


def run_experiment(config):
    """Run an experiment from a dict or a JSON string; returns the summary."""
    if not isinstance(config, str):
        config = json.dumps(config)
    return _run_experiment(config)


def validate_config(config):
    """Resolved config as a dict."""
    if not isinstance(config, str):
        config = json.dumps(config)
    return json.loads(_validate_config(config))
