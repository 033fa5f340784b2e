"""Indices of weighted Cauchy-Riemann operators on cylinders and planes.

Thin wrapper over the native core; structured values are plain dicts.
"""

import json as _json

from . import _core
from ._core import CrlabError

__all__ = [
    "CrlabError",
    "spectrum",
    "count_window",
    "spectral_flow",
    "problem",
    "numerical_index",
    "analytic_index",
    "multi_end_index",
    "codimension",
    "canonical_cases",
    "validate_config",
    "run_experiment",
]


def _dump(obj):
    return _json.dumps(obj)


def spectrum(spec, t_resolution=33, method="fourier"):
    return _json.loads(_core.spectrum(_dump(spec), t_resolution, method))


def count_window(spec, lo, hi, t_resolution=33):
    return _core.count_window(_dump(spec), lo, hi, t_resolution)


def spectral_flow(a, b, steps=200, t_resolution=33):
    """Flow of the straight path a -> b; pos -> neg crossings count +1."""
    return _core.spectral_flow(_dump(a), _dump(b), steps, t_resolution)


def problem(spec):
    """Expand a builder shorthand into the explicit problem form."""
    return _json.loads(_core.problem(_dump(spec)))


def numerical_index(problem_spec, policy=None):
    return _json.loads(_core.numerical_index(_dump(problem_spec), _dump(policy or {})))


def analytic_index(problem_spec):
    return _core.analytic_index(_dump(problem_spec))


def multi_end_index(positive_ends, negative_ends):
    return _core.multi_end_index(positive_ends, negative_ends)


def codimension(degenerate, smooth):
    return _core.codimension(_dump(degenerate), _dump(smooth))


def canonical_cases():
    return _json.loads(_core.canonical_cases())


def validate_config(config):
    """Parse and normalize an experiment config; raises CrlabError on schema errors."""
    return _json.loads(_core.validate_config(_dump(config)))


def run_experiment(config):
    """Returns (exit_code, summary_text)."""
    return _core.run_experiment(_dump(config))
