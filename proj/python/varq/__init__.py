"""Python front end for the varq library.

Structured inputs and outputs are plain dicts and lists in the same layout
as the command line tool's JSON files.
"""

import json

from . import _varq
from ._varq import ResolutionError, VarqError, vq, vq_bruteforce

__all__ = [
    "ResolutionError",
    "VarqError",
    "chain_report",
    "cotype_ratio",
    "estimate",
    "evaluate",
    "identity_suite",
    "structured_report",
    "vq",
    "vq_bruteforce",
    "witness_linfty",
]


def evaluate(family, function, t, x, norm="l2"):
    """T_t f(x) for a step function {"breakpoints": [...], "values": [[...], ...]}."""
    return _varq.evaluate(json.dumps(family), json.dumps(function), norm, t, x)


def estimate(config):
    """Best ratio found for the finite-grid variational constant; returns a report row."""
    return json.loads(_varq.estimate(json.dumps(config)))


def structured_report(rows, config=None):
    return _varq.structured_report(json.dumps(rows), json.dumps(config) if config is not None else "")


def identity_suite(seed, triples=100, corrupt=False):
    return json.loads(_varq.identity_suite(seed, triples, corrupt))


def witness_linfty(n, m):
    return json.loads(_varq.witness_linfty(n, m))


def cotype_ratio(martingale, q):
    """(ratio, numerator, denominator)."""
    return _varq.cotype_ratio(json.dumps(martingale), q)


def chain_report(martingale, q, eps, fejer_degree=31, seed=0):
    return json.loads(_varq.chain_report(json.dumps(martingale), q, eps, fejer_degree, seed))
