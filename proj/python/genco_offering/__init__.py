"""Day-ahead offering for a generating company."""

import json as _json

from ._core import (
    Error,
    InvalidArgument,
    ParseError,
    ScarcityError,
    clear,
    cvar,
    discretize,
    optimize,
    synthesize,
    worst_tail_mean,
)
from ._core import run_pipeline as _run_pipeline


def run_pipeline(config):
    """Runs the workflow. `config` is a dict or a JSON string."""
    if not isinstance(config, str):
        config = _json.dumps({k: str(v) if hasattr(v, "__fspath__") else v for k, v in config.items()})
    return _run_pipeline(config)


__all__ = [
    "Error",
    "InvalidArgument",
    "ParseError",
    "ScarcityError",
    "clear",
    "cvar",
    "discretize",
    "optimize",
    "run_pipeline",
    "synthesize",
    "worst_tail_mean",
]
