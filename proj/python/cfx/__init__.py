"""Counterfactual explanations for finite classifiers.

Queries are plain dicts in the same JSON shape the ``cfx`` command reads:
``{"theory": ..., "classifier": ..., "instance": ...}``. Explanations are
dicts mapping feature names to values.
"""
import json
import math

from . import _core
from ._core import Error

KINDS = ("gNec", "sNec", "gSuf", "sSuf", "cSuf", "Lwf", "Lc", "Ld", "LdTau")

__all__ = ["Error", "KINDS", "explain", "decide", "find", "cores", "audit", "witness"]


def _text(obj):
    return obj if isinstance(obj, str) else json.dumps(obj)


def _weights(weights):
    return None if weights is None else _text(weights)


def explain(kind, query, cap=None, weights=None, tau=math.inf):
    """All explanations of ``kind`` in canonical order, at most ``cap`` of them."""
    out = json.loads(_core.explain(kind, _text(query), cap or 0, _weights(weights), tau))
    return out["explanations"]


def decide(kind, query, explanation, weights=None, tau=math.inf, backend="builtin"):
    """``(member, oracle_calls)`` for a formula classifier over Boolean features."""
    return _core.decide(kind, _text(query), _text(explanation), _weights(weights), tau, backend)


def find(kind, query, weights=None, tau=math.inf, backend="builtin"):
    """``(explanation or None, oracle_calls)`` for a formula classifier."""
    found, calls = _core.find(kind, _text(query), _weights(weights), tau, backend)
    return (None if found is None else json.loads(found)), calls


def cores(query):
    """Literals shared by every instance of each class, keyed by class name."""
    return json.loads(_core.cores(_text(query)))


def audit(explainers, jobs=1, budget=5000, seed=20240601):
    """Axiom profiles of built-in explainers over the built-in query suite."""
    if isinstance(explainers, str):
        explainers = [explainers]
    return json.loads(_core.audit(list(explainers), jobs, budget, seed))


def witness(index):
    """Impossibility witness ``I<index>`` for index in 1..7."""
    return json.loads(_core.witness(index))
