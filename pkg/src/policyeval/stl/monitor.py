"""Boolean and quantitative (robustness) evaluation of formulas over traces.

Semantics are the usual min/max robustness recursion evaluated over the
trace samples with a piecewise-constant (sample-and-hold) time model: a
temporal window [t0+a, t0+b] selects the set of sample indices whose
timestamp falls inside it, with no interpolation between samples.
Untimed temporal operators span from the current time to the end of the
trace. Predicates use the non-strict convention: a predicate is True iff
its normalized expression evaluates >= 0, so ``>`` and ``>=`` behave
identically on an exactly-zero margin.
"""
from __future__ import annotations

from typing import Optional

import numpy as np

from ..model import Trace
from .ast import (
    Always,
    And,
    Eventually,
    Formula,
    Iff,
    Implies,
    Not,
    Or,
    Predicate,
    Until,
)


class MonitorError(ValueError):
    pass


class UnknownSignalError(MonitorError):
    pass


class InsufficientTraceError(MonitorError):
    """A temporal window has no samples (empty or entirely beyond trace end)."""


def _window(times: np.ndarray, start: float, end: float) -> tuple[int, int]:
    """Index range [lo, hi) of samples with start <= t <= end."""
    lo = int(np.searchsorted(times, start, side="left"))
    hi = int(np.searchsorted(times, end, side="right"))
    return lo, hi


def _series(node: Formula, times: np.ndarray, arrays: dict[str, np.ndarray]) -> np.ndarray:
    """Robustness of ``node`` at every sample index; NaN where undefined."""
    n = len(times)
    if isinstance(node, Predicate):
        out = np.full(n, node.expr.const, dtype=float)
        for name, c in node.expr.coeffs.items():
            out = out + c * arrays[name]
        return out
    if isinstance(node, Not):
        return -_series(node.child, times, arrays)
    if isinstance(node, And):
        return np.minimum(_series(node.left, times, arrays), _series(node.right, times, arrays))
    if isinstance(node, Or):
        return np.maximum(_series(node.left, times, arrays), _series(node.right, times, arrays))
    if isinstance(node, Implies):
        return np.maximum(-_series(node.left, times, arrays), _series(node.right, times, arrays))
    if isinstance(node, Iff):
        a = _series(node.left, times, arrays)
        b = _series(node.right, times, arrays)
        return np.minimum(np.maximum(-a, b), np.maximum(-b, a))
    if isinstance(node, (Always, Eventually)):
        child = _series(node.child, times, arrays)
        reduce = np.min if isinstance(node, Always) else np.max
        out = np.full(n, np.nan)
        for i in range(n):
            if node.interval is None:
                lo, hi = i, n
            else:
                a, b = node.interval
                lo, hi = _window(times, times[i] + a, times[i] + b)
            if lo < hi:
                out[i] = reduce(child[lo:hi])
        return out
    if isinstance(node, Until):
        left = _series(node.left, times, arrays)
        right = _series(node.right, times, arrays)
        out = np.full(n, np.nan)
        for i in range(n):
            if node.interval is None:
                lo, hi = i, n
            else:
                a, b = node.interval
                lo, hi = _window(times, times[i] + a, times[i] + b)
            if lo >= hi:
                continue
            # hold[k] = min of left over [i, i+k]; a >= 0 guarantees lo >= i
            hold = np.minimum.accumulate(left[i:hi])
            out[i] = np.max(np.minimum(right[lo:hi], hold[lo - i :]))
        return out
    raise MonitorError(f"unsupported formula node: {type(node).__name__}")


def _prepare(formula: Formula, trace: Trace, t0: Optional[float]) -> tuple[np.ndarray, dict, int]:
    missing = sorted(formula.signal_names() - set(trace.signals))
    if missing:
        raise UnknownSignalError("unknown signal(s): " + ", ".join(missing))
    times = np.asarray(trace.times, dtype=float)
    if t0 is None:
        t0 = float(times[0])
    if not (times[0] <= t0 <= times[-1]):
        raise MonitorError(
            f"t0={t0} outside trace time range [{times[0]}, {times[-1]}]"
        )
    # sample-and-hold: evaluate at the last sample at or before t0
    i0 = int(np.searchsorted(times, t0, side="right")) - 1
    arrays = {name: np.asarray(vs, dtype=float) for name, vs in trace.signals.items()}
    return times, arrays, i0


def eval_robustness(formula: Formula, trace: Trace, t0: Optional[float] = None) -> float:
    """Robustness of ``formula`` on ``trace`` at time ``t0`` (default: trace start).

    Positive means satisfied, negative violated; the magnitude is in the
    units of the dominating predicate.
    """
    times, arrays, i0 = _prepare(formula, trace, t0)
    value = _series(formula, times, arrays)[i0]
    if np.isnan(value):
        raise InsufficientTraceError(
            "a temporal window selects no samples (empty or beyond trace end)"
        )
    return float(value)


def eval_boolean(formula: Formula, trace: Trace, t0: Optional[float] = None) -> bool:
    """Boolean semantics; equal to ``eval_robustness(...) >= 0`` by construction."""
    return eval_robustness(formula, trace, t0) >= 0
