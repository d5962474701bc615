"""Performance metrics over rollout traces.

Contains speed-profile construction from position signals, spectral
arc-length smoothness, velocity peak counting, and segmentation of a
trace at first contact. More negative arc length = less smooth; more
peaks = longer and less smooth motion.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy.signal import find_peaks

from .model import ModelError, PeakConfig, SparcConfig, Trace


class MetricError(ValueError):
    pass


@dataclass(frozen=True)
class SpeedProfile:
    """Speed magnitude on a uniform time grid.

    times : uniform grid in seconds (relative spacing error <= 1e-9)
    speed : nonnegative series in m/s, at least 4 samples
    sample_rate : grid frequency in Hz
    """

    times: tuple[float, ...]
    speed: tuple[float, ...]
    sample_rate: float

    def __post_init__(self):
        if len(self.times) < 4:
            raise MetricError("speed profile needs at least 4 samples")
        if len(self.speed) != len(self.times):
            raise MetricError("times and speed must have the same length")
        dts = np.diff(self.times)
        dt = float(np.mean(dts))
        if dt <= 0 or np.max(np.abs(dts - dt)) > 1e-9 * max(abs(dt), 1.0):
            raise MetricError("speed profile grid must be uniform")
        if any(v < 0 for v in self.speed):
            raise MetricError("speed must be nonnegative")
        object.__setattr__(self, "times", tuple(float(t) for t in self.times))
        object.__setattr__(self, "speed", tuple(float(v) for v in self.speed))


def speed_profile(
    trace: Trace, position_signals: Sequence[str], target_rate: float
) -> SpeedProfile:
    """Resample position signals to a uniform grid and differentiate.

    Positions are linearly interpolated onto the grid; speed is the
    Euclidean norm of the central-difference velocity (one-sided at the
    endpoints).
    """
    if not 2 <= len(position_signals) <= 3:
        raise MetricError("expected 2 or 3 position signals")
    for name in position_signals:
        if name not in trace.signals:
            raise MetricError(f"missing signal {name!r}")
    if trace.duration <= 4.0 / target_rate:
        raise MetricError(
            f"trace duration {trace.duration:.3f}s too short for rate {target_rate}Hz"
        )
    t = np.asarray(trace.times)
    n = int(math.floor(trace.duration * target_rate)) + 1
    grid = t[0] + np.arange(n) / target_rate
    pos = np.stack(
        [np.interp(grid, t, np.asarray(trace.signals[name])) for name in position_signals]
    )
    vel = np.gradient(pos, 1.0 / target_rate, axis=1)
    speed = np.linalg.norm(vel, axis=0)
    return SpeedProfile(times=tuple(grid), speed=tuple(speed), sample_rate=target_rate)


def sparc(profile: SpeedProfile, config: SparcConfig = SparcConfig()) -> float:
    """Spectral arc-length smoothness of a speed profile (dimensionless, <= 0).

    The magnitude spectrum of the speed is zero-padded to
    2^(ceil(log2 N) + pad_level), normalized by its zero-frequency
    magnitude, and cut off at the highest frequency <= max_cutoff_hz
    where the normalized magnitude still reaches amplitude_threshold.
    The result is the negative arc length of the normalized spectrum
    over [0, cutoff] with the frequency axis normalized by the cutoff.
    """
    v = np.asarray(profile.speed)
    if np.all(v == 0):
        raise MetricError("undefined smoothness: speed profile is identically zero")
    fs = profile.sample_rate
    nfft = int(2 ** (math.ceil(math.log2(len(v))) + config.pad_level))
    freqs = np.arange(nfft) * (fs / nfft)
    mag = np.abs(np.fft.fft(v, nfft))
    mag = mag / mag[0]  # speed is nonnegative, so the DC bin dominates

    below = freqs <= config.max_cutoff_hz
    f_sel = freqs[below]
    m_sel = mag[below]
    over = np.nonzero(m_sel >= config.amplitude_threshold)[0]
    cutoff_idx = int(over[-1])
    f_sel = f_sel[: cutoff_idx + 1]
    m_sel = m_sel[: cutoff_idx + 1]
    span = f_sel[-1] - f_sel[0]
    if span <= 0:
        raise MetricError("spectrum collapses to a single frequency bin")
    return float(-np.sum(np.sqrt((np.diff(f_sel) / span) ** 2 + np.diff(m_sel) ** 2)))


def count_velocity_peaks(profile: SpeedProfile, config: PeakConfig = PeakConfig()) -> int:
    """Number of strict local speed maxima with topographic prominence
    at least prominence_fraction of the maximum speed."""
    v = np.asarray(profile.speed)
    top = float(np.max(v))
    if top == 0:
        return 0
    peaks, _ = find_peaks(v, prominence=config.prominence_fraction * top)
    return int(len(peaks))


def split_at_contact(
    trace: Trace, contact_signal: str, threshold: float
) -> tuple[Optional[Trace], Optional[Trace], Optional[float]]:
    """Split a trace at the first time the contact signal exceeds threshold.

    Returns (pre_contact, post_contact, contact_time). If the signal never
    exceeds the threshold, contact_time is None and the whole trace is
    returned as pre_contact. An empty segment (e.g. contact on the very
    first sample) is returned as None.
    """
    series = trace.signal(contact_signal)
    idx = next((i for i, v in enumerate(series) if v > threshold), None)
    if idx is None:
        return trace, None, None
    contact_time = trace.times[idx]
    pre = _slice(trace, 0, idx)
    post = _slice(trace, idx, len(trace))
    return pre, post, contact_time


def _slice(trace: Trace, lo: int, hi: int) -> Optional[Trace]:
    if lo >= hi:
        return None
    try:
        return Trace(
            times=trace.times[lo:hi],
            signals={k: v[lo:hi] for k, v in trace.signals.items()},
            units=trace.units,
        )
    except ModelError:
        return None
