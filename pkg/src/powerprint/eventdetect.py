"""On/off edge detection on an aggregate power signal and per-event segmentation."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.ndimage import median_filter

from .signals import MIN_SIGNAL_LENGTH, PowerSignal

DEFAULT_THRESHOLD_WATTS = 30.0
DEFAULT_SMOOTH_WINDOW = 3
BASELINE_SAMPLES = 5


@dataclass(frozen=True)
class EdgeEvent:
    index: int
    delta_watts: float

    @property
    def kind(self) -> str:
        return "ON" if self.delta_watts > 0 else "OFF"


@dataclass(frozen=True, eq=False)
class Segment:
    start: int
    end: int
    samples: np.ndarray

    def __len__(self):
        return self.end - self.start


def _samples(aggregate) -> np.ndarray:
    if isinstance(aggregate, PowerSignal):
        return aggregate.samples
    return np.asarray(aggregate, dtype=np.float64).reshape(-1)


def smooth(x, window: int = DEFAULT_SMOOTH_WINDOW) -> np.ndarray:
    """Moving median; edges are extended with the nearest sample."""
    if window == 1:
        return np.asarray(x, dtype=np.float64)
    return median_filter(np.asarray(x, dtype=np.float64), size=window, mode="nearest")


def detect_edges(aggregate, threshold_watts: float = DEFAULT_THRESHOLD_WATTS,
                 smooth_window: int = DEFAULT_SMOOTH_WINDOW) -> list[EdgeEvent]:
    """Find power steps of at least ``threshold_watts``.

    The signal is median smoothed and differenced.  A run of consecutive
    same-sign differences above threshold is one event, placed at the
    sample after its largest difference and carrying the run's total
    change.  The event index is the first sample of the new power level.
    """
    x = _samples(aggregate)
    if not threshold_watts > 0:
        raise ValueError("threshold_watts must be positive")
    if smooth_window < 1 or smooth_window % 2 == 0:
        raise ValueError("smooth_window must be an odd integer >= 1")
    if x.size <= smooth_window:
        raise ValueError("the aggregate must be longer than the smoothing window")

    diff = np.diff(smooth(x, smooth_window))
    sign = np.where(diff >= threshold_watts, 1, np.where(diff <= -threshold_watts, -1, 0))

    events = []
    i = 0
    while i < diff.size:
        if sign[i] == 0:
            i += 1
            continue
        j = i
        while j + 1 < diff.size and sign[j + 1] == sign[i]:
            j += 1
        run = diff[i:j + 1]
        peak = i + int(np.argmax(np.abs(run)))
        events.append(EdgeEvent(peak + 1, float(run.sum())))
        i = j + 1
    return events


def segment_between(aggregate, events, min_length: int = MIN_SIGNAL_LENGTH) -> list[Segment]:
    """Cut the aggregate between each ON event and the next OFF event.

    ON events that occur while a segment is already open are absorbed into
    it.  A trailing ON with no OFF runs to the end of the signal.  Samples
    are baseline-corrected by the median of the (up to) five samples before
    the ON event and clamped below at zero.
    """
    x = _samples(aggregate)
    idx = [e.index for e in events]
    if any(b < a for a, b in zip(idx, idx[1:])):
        raise ValueError("events must be sorted by index")

    segments = []
    open_at = None
    for ev in events:
        if ev.kind == "ON":
            if open_at is None:
                open_at = ev.index
        elif open_at is not None:
            segments.append((open_at, ev.index))
            open_at = None
    if open_at is not None:
        segments.append((open_at, x.size))

    out = []
    for start, end in segments:
        if end - start < min_length:
            continue
        before = x[max(0, start - BASELINE_SAMPLES):start]
        baseline = float(np.median(before)) if before.size else 0.0
        out.append(Segment(start, end, np.maximum(x[start:end] - baseline, 0.0)))
    return out


def segments_to_signals(segments, source_id: str = "", sample_rate_hz: float = 1.0,
                        label: str | None = None) -> list[PowerSignal]:
    return [
        PowerSignal(s.samples, label=label, source_id=f"{source_id}:{s.start}-{s.end}",
                    sample_rate_hz=sample_rate_hz)
        for s in segments
    ]
