"""Extremal solutions and directional derivatives of implicit obstacle problems."""

import json

from ._core import (
    ConvergenceError,
    Grid,
    InvalidArgument,
    InverseEllipticMap,
    MonotonicityViolation,
    ObstacleMap,
    Operator,
    PlateauMap,
    QvixError,
    ThermoformingMap,
    fd_validate,
    iterate,
    oracle_vi,
    solve_vi,
    v_norm,
)
from ._core import run_config as _run_config


def run_config(config, out_dir="", oracle=False):
    """Run an experiment config (dict or JSON string); returns the summary dict."""
    text = config if isinstance(config, str) else json.dumps(config)
    return json.loads(_run_config(text, out_dir, oracle))


__all__ = [
    "ConvergenceError",
    "Grid",
    "InvalidArgument",
    "InverseEllipticMap",
    "MonotonicityViolation",
    "ObstacleMap",
    "Operator",
    "PlateauMap",
    "QvixError",
    "ThermoformingMap",
    "fd_validate",
    "iterate",
    "oracle_vi",
    "run_config",
    "solve_vi",
    "v_norm",
]
