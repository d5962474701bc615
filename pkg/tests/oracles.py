"""Independent reference implementations used only as test oracles.

These are deliberately naive and kept separate from the production code
paths they check.
"""
from __future__ import annotations

import numpy as np
from scipy import special

from policyeval.stl.ast import (
    Always,
    And,
    Eventually,
    Iff,
    Implies,
    Not,
    Or,
    Predicate,
    Until,
)


class OracleUndefined(Exception):
    pass


def stl_robustness(node, trace, i=0):
    """Naive exponential-time recursive robustness at sample index i."""
    times = trace.times

    def window(idx, interval):
        if interval is None:
            js = list(range(idx, len(times)))
        else:
            a, b = interval
            js = [j for j in range(len(times)) if times[idx] + a <= times[j] <= times[idx] + b]
        if not js:
            raise OracleUndefined
        return js

    if isinstance(node, Predicate):
        return node.expr.value({k: v[i] for k, v in trace.signals.items()})
    if isinstance(node, Not):
        return -stl_robustness(node.child, trace, i)
    if isinstance(node, And):
        return min(stl_robustness(node.left, trace, i), stl_robustness(node.right, trace, i))
    if isinstance(node, Or):
        return max(stl_robustness(node.left, trace, i), stl_robustness(node.right, trace, i))
    if isinstance(node, Implies):
        return max(-stl_robustness(node.left, trace, i), stl_robustness(node.right, trace, i))
    if isinstance(node, Iff):
        l = stl_robustness(node.left, trace, i)
        r = stl_robustness(node.right, trace, i)
        return min(max(-l, r), max(-r, l))
    if isinstance(node, Always):
        return min(stl_robustness(node.child, trace, j) for j in window(i, node.interval))
    if isinstance(node, Eventually):
        return max(stl_robustness(node.child, trace, j) for j in window(i, node.interval))
    if isinstance(node, Until):
        best = None
        for j in window(i, node.interval):
            hold = min(stl_robustness(node.left, trace, k) for k in range(i, j + 1))
            cand = min(stl_robustness(node.right, trace, j), hold)
            best = cand if best is None else max(best, cand)
        return best
    raise TypeError(type(node))


def reference_sparc(movement, fs, padlevel=4, fc=10.0, amp_th=0.05):
    """Transcription of the published spectral arc-length procedure."""
    movement = np.asarray(movement, dtype=float)
    nfft = int(pow(2, np.ceil(np.log2(len(movement))) + padlevel))
    f = np.arange(0, fs, fs / nfft)
    Mf = abs(np.fft.fft(movement, nfft))
    Mf = Mf / max(Mf)
    fc_inx = ((f <= fc) * 1).nonzero()
    f_sel = f[fc_inx]
    Mf_sel = Mf[fc_inx]
    inx = ((Mf_sel >= amp_th) * 1).nonzero()[0]
    fc_inx = range(inx[0], inx[-1] + 1)
    f_sel = f_sel[fc_inx]
    Mf_sel = Mf_sel[fc_inx]
    return -sum(
        np.sqrt(pow(np.diff(f_sel) / (f_sel[-1] - f_sel[0]), 2) + pow(np.diff(Mf_sel), 2))
    )


def count_peaks_by_enumeration(speed, prominence_fraction):
    """Strict local maxima with topographic prominence, by direct search."""
    v = list(speed)
    n = len(v)
    top = max(v)
    if top == 0:
        return 0
    count = 0
    for i in range(1, n - 1):
        if not (v[i] > v[i - 1] and v[i] > v[i + 1]):
            continue
        # walk left/right until terrain higher than v[i], track the lowest valley
        left_min = v[i]
        j = i - 1
        while j >= 0 and v[j] <= v[i]:
            left_min = min(left_min, v[j])
            j -= 1
        if j < 0:
            left_min = min(v[: i + 1])
        right_min = v[i]
        j = i + 1
        while j < n and v[j] <= v[i]:
            right_min = min(right_min, v[j])
            j += 1
        if j >= n:
            right_min = min(v[i:])
        prominence = v[i] - max(left_min, right_min)
        if prominence >= prominence_fraction * top:
            count += 1
    return count


def mc_prob_superior(a, b, n_draws=10_000_000, seed=123):
    """Monte Carlo estimate of P(p_b > p_a) with its standard error."""
    rng = np.random.Generator(np.random.PCG64(seed))
    xa = rng.beta(a.alpha, a.beta, n_draws)
    xb = rng.beta(b.alpha, b.beta, n_draws)
    p = float(np.mean(xb > xa))
    se = np.sqrt(max(p * (1 - p), 1e-12) / n_draws)
    return p, se


def beta_quantile_by_bisection(q, alpha, beta, tol=1e-9):
    """Invert the regularized incomplete beta function by bisection."""
    lo, hi = 0.0, 1.0
    while hi - lo > tol:
        mid = (lo + hi) / 2
        if special.betainc(alpha, beta, mid) < q:
            lo = mid
        else:
            hi = mid
    return (lo + hi) / 2


def cp_interval_by_bisection(successes, failures, level=0.95):
    n = successes + failures
    tail = (1 - level) / 2
    lo = 0.0 if successes == 0 else beta_quantile_by_bisection(tail, successes, n - successes + 1)
    hi = 1.0 if successes == n else beta_quantile_by_bisection(1 - tail, successes + 1, n - successes)
    return lo, hi
