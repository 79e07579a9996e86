"""Python bindings for the Wiener sausage lab.

Shapes, drifts and configs are plain dicts in the same JSON layout the
command-line tool reads.
"""

import json as _json

from . import _core
from ._core import CSV_SCHEMA_VERSION, ConfigError, cap_measure, experiment_names

__all__ = [
    "CSV_SCHEMA_VERSION",
    "ConfigError",
    "cap_measure",
    "coupling_failure_curve",
    "detection_survival",
    "equivalent_radius",
    "experiment_names",
    "run_experiment",
    "sausage_volume",
    "selftest",
    "volume",
]


def _dump(obj):
    return obj if isinstance(obj, str) else _json.dumps(obj)


def volume(shape, dim):
    """Return (value, exact, std_error)."""
    return _core.volume(_dump(shape), dim)


def equivalent_radius(shape, dim):
    return _core.equivalent_radius(_dump(shape), dim)


def sausage_volume(path, shape, method="hitting", samples=1 << 14, seed=1):
    """Volume of the union of path[k] + shape; path is a sequence of points."""
    pts = [[float(x) for x in p] for p in path]
    return _core.sausage_volume(pts, _dump(shape), method, samples, seed)


def coupling_failure_curve(L, c, n, eps, d, R_list, replicates=20000, seed=1, workers=1):
    return _core.coupling_failure_curve(L, c, n, eps, d, list(R_list), replicates, seed, workers)


def detection_survival(lam, r, t, drift=None, grid_n=6, replicates=10000, seed=1, workers=1):
    """[(t, survival, std_error)] for a Poisson cloud of Brownian detectors."""
    drift = {"zero": True} if drift is None else drift
    return _core.detection_survival(lam, r, t, _dump(drift), grid_n, replicates, seed, workers)


def run_experiment(config):
    """Run an experiment; returns a dict with csv, summary, invariants_pass, wall_time_ms."""
    return _core.run_experiment(_dump(config))


def selftest(seed=1, workers=1, cap_measure_fault=1.0):
    return _core.selftest(seed, workers, cap_measure_fault)
