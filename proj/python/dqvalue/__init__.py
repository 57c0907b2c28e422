"""q-value procedures for discrete uniform P-values."""

import json
from fractions import Fraction

from . import _dqvalue
from ._dqvalue import Error, adaptive_bh, analyze, pi0, pvalue, qvalues

__all__ = [
    "Error",
    "adaptive_bh",
    "analyze",
    "exact_support",
    "pi0",
    "pvalue",
    "qvalues",
    "simulate",
]


def exact_support(test, n1, n2=0):
    """Attainable P-values of a permutation test as Fractions."""
    return [Fraction(a, b) for a, b in _dqvalue.exact_support(test, n1, n2)]


def simulate(config, seed=None, threads=0):
    """Run a Monte Carlo study. config is a dict or a JSON string."""
    text = config if isinstance(config, str) else json.dumps(config)
    return json.loads(_dqvalue.simulate(text, seed, threads))
