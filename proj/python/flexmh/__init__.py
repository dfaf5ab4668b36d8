"""Flexible moral-hazard contract menus: solvers and verification.

Thin wrapper over the C++ extension; JSON-returning calls are decoded into
plain dicts here.
"""

import json as _json

from _flexmh import (
    canonical_config,
    lower_convex_envelope,
    reproduce_example,
    trace,
    upper_concave_envelope,
)
from _flexmh import baseline as _baseline
from _flexmh import check as _check
from _flexmh import solve as _solve

__all__ = [
    "baseline",
    "canonical_config",
    "check",
    "lower_convex_envelope",
    "reproduce_example",
    "solve",
    "trace",
    "upper_concave_envelope",
]


def _as_config_json(config):
    if isinstance(config, str):
        return config
    return _json.dumps(config)


def solve(config, mode="auto"):
    """Solve an instance; `config` is a dict or JSON string."""
    return _json.loads(_solve(_as_config_json(config), mode))


def check(config):
    """Assumption report for an instance."""
    return _json.loads(_check(_as_config_json(config)))


def baseline(config):
    """Pure moral-hazard and first-best benchmarks per type."""
    return _json.loads(_baseline(_as_config_json(config)))
