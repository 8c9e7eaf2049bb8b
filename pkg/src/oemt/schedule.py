"""Time-dependent coupling schedules and input pulse envelopes.

A :class:`CouplingSchedule` is an ordered list of segments; inside each
segment every controllable quantity (the two enhanced couplings and the
two residual detunings) follows one of four waveform laws.  Times are
always measured from the start of the segment.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ScheduleError

__all__ = [
    "Waveform",
    "Constant",
    "Linear",
    "RaisedCosine",
    "GaussianRamp",
    "Segment",
    "CouplingSchedule",
    "AdiabaticityReport",
    "PulseShape",
    "gaussian_pulse",
    "exponential_rise_pulse",
    "sampled_pulse",
]


class Waveform:
    """Scalar control law on a segment-local time axis ``0 <= t <= T``."""

    smooth = False

    def value(self, t, duration):
        raise NotImplementedError

    def endpoint_values(self, duration):
        return (self.value(0.0, duration), self.value(duration, duration))


@dataclass(frozen=True)
class Constant(Waveform):
    level: float = 0.0
    smooth = True

    def value(self, t, duration):
        return self.level + np.zeros_like(np.asarray(t, dtype=float))


@dataclass(frozen=True)
class Linear(Waveform):
    start: float
    end: float
    smooth = True

    def value(self, t, duration):
        frac = np.asarray(t, dtype=float) / duration
        return self.start + (self.end - self.start) * frac


@dataclass(frozen=True)
class RaisedCosine(Waveform):
    """Cosine-smoothed ramp: zero slope at both segment endpoints."""

    start: float
    end: float
    smooth = True

    def value(self, t, duration):
        frac = np.asarray(t, dtype=float) / duration
        shape = 0.5 * (1.0 - np.cos(math.pi * frac))
        return self.start + (self.end - self.start) * shape


@dataclass(frozen=True)
class GaussianRamp(Waveform):
    """Gaussian bump ``amplitude * exp(-(t - center)^2 / (2 width^2))``."""

    amplitude: float
    width: float
    center: float
    smooth = True

    def value(self, t, duration):
        arg = (np.asarray(t, dtype=float) - self.center) / self.width
        return self.amplitude * np.exp(-0.5 * arg**2)


def _as_waveform(value):
    if isinstance(value, Waveform):
        return value
    return Constant(float(value))


@dataclass(frozen=True)
class Segment:
    """One schedule segment of fixed ``duration``.

    ``g1``/``g2`` are the enhanced couplings; ``delta1``/``delta2`` are the
    residual interaction-picture detunings.  Waveform arguments accept
    plain numbers as shorthand for :class:`Constant`.
    """

    duration: float
    g1: Waveform = field(default_factory=Constant)
    g2: Waveform = field(default_factory=Constant)
    delta1: Waveform = field(default_factory=Constant)
    delta2: Waveform = field(default_factory=Constant)

    def __post_init__(self):
        if self.duration <= 0.0:
            raise ScheduleError(f"segment duration must be positive, got "
                                f"{self.duration!r}")
        for name in ("g1", "g2", "delta1", "delta2"):
            object.__setattr__(self, name, _as_waveform(getattr(self, name)))

    def values(self, t):
        """Channel values at segment-local times ``t`` (scalar or array)."""
        return (self.g1.value(t, self.duration),
                self.g2.value(t, self.duration),
                self.delta1.value(t, self.duration),
                self.delta2.value(t, self.duration))

    @property
    def is_constant(self):
        return all(isinstance(getattr(self, name), Constant)
                   for name in ("g1", "g2", "delta1", "delta2"))


@dataclass
class AdiabaticityReport:
    """Dark-mode passage diagnostic for a schedule.

    ``max_mixing_rate`` is the largest ``|d theta/dt|`` along the schedule,
    with ``theta = atan2(g1, -g2)`` the dark-mode mixing angle, and
    ``min_gap`` the smallest bright-mode splitting ``g0 = hypot(g1, g2)``.
    A passage is adiabatic when ``ratio = max_mixing_rate / min_gap`` is
    small compared to 1.
    """

    max_mixing_rate: float
    min_gap: float

    @property
    def ratio(self):
        if self.min_gap == 0.0:
            return math.inf
        return self.max_mixing_rate / self.min_gap


class CouplingSchedule:
    """Ordered, gap-free sequence of :class:`Segment` objects."""

    def __init__(self, segments):
        segments = tuple(segments)
        if not segments:
            raise ScheduleError("a schedule needs at least one segment")
        self.segments = segments
        edges = np.concatenate([[0.0], np.cumsum([s.duration for s in segments])])
        self._edges = edges

    @property
    def duration(self):
        return float(self._edges[-1])

    def segment_bounds(self):
        """(start, end) pairs for every segment on the global time axis."""
        return [(float(self._edges[i]), float(self._edges[i + 1]))
                for i in range(len(self.segments))]

    def values(self, t):
        """Channel values on the global time axis (vectorized).

        Times at a segment boundary resolve to the later segment; times
        beyond the schedule hold the final values.
        """
        t = np.atleast_1d(np.asarray(t, dtype=float))
        idx = np.clip(np.searchsorted(self._edges, t, side="right") - 1,
                      0, len(self.segments) - 1)
        out = np.zeros((4, t.size))
        for k, seg in enumerate(self.segments):
            mask = idx == k
            if not np.any(mask):
                continue
            local = np.clip(t[mask] - self._edges[k], 0.0, seg.duration)
            for row, channel in enumerate(seg.values(local)):
                out[row, mask] = channel
        return out

    def continuity_defect(self, channels=("g1", "g2", "delta1", "delta2")):
        """Largest jump of any channel across interior segment boundaries."""
        worst = 0.0
        for left, right in zip(self.segments[:-1], self.segments[1:]):
            for name in channels:
                a = getattr(left, name).endpoint_values(left.duration)[1]
                b = getattr(right, name).endpoint_values(right.duration)[0]
                worst = max(worst, abs(float(a) - float(b)))
        return worst

    def adiabaticity(self, samples_per_segment=2001):
        """Sample the dark-mode mixing angle and bright-mode gap.

        Discontinuous schedules (e.g. sequential swap pulses) report a very
        large mixing rate; the diagnostic is meaningful for smooth passages.
        """
        max_rate = 0.0
        min_gap = math.inf
        for (t0, t1), seg in zip(self.segment_bounds(), self.segments):
            local = np.linspace(0.0, seg.duration, samples_per_segment)
            g1, g2, _, _ = seg.values(local)
            theta = np.arctan2(g1, -g2)
            gap = np.hypot(g1, g2)
            rate = np.abs(np.gradient(theta, local))
            max_rate = max(max_rate, float(rate.max()))
            min_gap = min(min_gap, float(gap.min()))
        # a jump between segments is an infinitely fast passage
        if self.continuity_defect(channels=("g1", "g2")) > 0.0:
            max_rate = math.inf
        return AdiabaticityReport(max_mixing_rate=max_rate, min_gap=min_gap)


class PulseShape:
    """Complex input-field envelope with a finite square-integral norm."""

    def __call__(self, t):
        raise NotImplementedError

    def l2_norm_sq(self):
        """Integral of ``|f(t)|^2`` over the real line."""
        raise NotImplementedError

    def bandwidth(self):
        """Spectral standard deviation (angular frequency units)."""
        raise NotImplementedError


@dataclass(frozen=True)
class _GaussianPulse(PulseShape):
    amplitude: float
    sigma: float
    center: float = 0.0

    def __call__(self, t):
        arg = self.sigma * (np.asarray(t, dtype=float) - self.center)
        return self.amplitude * np.exp(-0.5 * arg**2)

    def l2_norm_sq(self):
        return self.amplitude**2 * math.sqrt(math.pi) / self.sigma

    def bandwidth(self):
        # envelope exp(-sigma^2 t^2 / 2) transforms to exp(-w^2 / (2 sigma^2))
        return self.sigma


@dataclass(frozen=True)
class _ExponentialRise(PulseShape):
    """``amplitude * exp(rate * t / 2)`` for ``t <= 0``, zero afterwards."""

    amplitude: float
    rate: float

    def __post_init__(self):
        if self.rate <= 0.0:
            raise ScheduleError("exponential-rise rate must be positive")

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        return np.where(t <= 0.0,
                        self.amplitude * np.exp(0.5 * self.rate * t), 0.0)

    def l2_norm_sq(self):
        return self.amplitude**2 / self.rate

    def bandwidth(self):
        # |f(w)|^2 is Lorentzian of HWHM rate/2; quote that scale
        return 0.5 * self.rate


@dataclass(frozen=True)
class _SampledPulse(PulseShape):
    times: tuple
    samples: tuple

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        times = np.asarray(self.times)
        samples = np.asarray(self.samples)
        re = np.interp(t, times, samples.real, left=0.0, right=0.0)
        im = np.interp(t, times, samples.imag, left=0.0, right=0.0)
        if np.iscomplexobj(samples):
            return re + 1j * im
        return re

    def l2_norm_sq(self):
        times = np.asarray(self.times)
        samples = np.asarray(self.samples)
        return float(np.trapezoid(np.abs(samples)**2, times))

    def bandwidth(self):
        times = np.asarray(self.times, dtype=float)
        samples = np.asarray(self.samples)
        dt = times[1] - times[0]
        spec = np.abs(np.fft.fft(samples))**2
        freq = 2.0 * math.pi * np.fft.fftfreq(times.size, d=dt)
        total = spec.sum()
        if total == 0.0:
            return 0.0
        mean = (freq * spec).sum() / total
        return float(math.sqrt(((freq - mean)**2 * spec).sum() / total))


def gaussian_pulse(amplitude, sigma, center=0.0):
    """Gaussian mean-field envelope ``A exp(-sigma^2 (t - t0)^2 / 2)``."""
    if sigma <= 0.0:
        raise ScheduleError("gaussian pulse needs sigma > 0")
    return _GaussianPulse(float(amplitude), float(sigma), float(center))


def exponential_rise_pulse(amplitude, rate):
    """Rising exponential ``A exp(rate t / 2)`` gated off at ``t = 0``.

    This is the write-in envelope matched to a memory prepared with an
    effective linewidth ``rate``.
    """
    return _ExponentialRise(float(amplitude), float(rate))


def sampled_pulse(times, samples):
    """Linearly interpolated user-supplied envelope, zero outside the grid."""
    times = np.asarray(times, dtype=float)
    samples = np.asarray(samples)
    if times.ndim != 1 or times.size < 2 or samples.shape != times.shape:
        raise ScheduleError("sampled pulse needs matching 1-D time/value arrays")
    if np.any(np.diff(times) <= 0.0):
        raise ScheduleError("sampled pulse times must be strictly increasing")
    if not np.all(np.isfinite(samples)):
        raise ScheduleError("sampled pulse values must be finite")
    return _SampledPulse(tuple(times.tolist()), tuple(np.asarray(samples).tolist()))
