"""Rapid intensification / weakening labels from 6-hourly intensity series.

A time is labeled when it lies inside some 24-hour window (five synoptic
points) whose peak exceeds the starting intensity by at least ``c``, after
that window is trimmed so it begins and ends with a 6-hour intensification
step. Rapid weakening is the same procedure on the time-reversed series.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .core import DataError

__all__ = [
    "SYNOPTIC_STEP",
    "IntensitySeries",
    "EventLabels",
    "label_rapid_events",
    "interpolate_labels",
    "filter_genesis_lysis",
    "read_intensity_csv",
    "write_labels_csv",
]

SYNOPTIC_STEP = 6  # hours between best-track entries
WINDOW = 4  # 6-hour steps per 24-hour window


@dataclass(frozen=True, eq=False)
class IntensitySeries:
    times: np.ndarray
    intensities: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.times, dtype=np.int64)
        w = np.asarray(self.intensities, dtype=float)
        if t.ndim != 1 or t.shape != w.shape:
            raise DataError("times and intensities must be 1-d arrays of equal length")
        if t.size < 1:
            raise DataError("intensity series is empty")
        if t.size > 1:
            d = np.diff(t)
            if np.any(d <= 0) or np.any(d != d[0]):
                raise DataError(f"times must be regularly spaced and increasing, got steps {np.unique(d)}")
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "intensities", w)

    @classmethod
    def from_values(cls, intensities, step: int = SYNOPTIC_STEP, start: int = 0) -> IntensitySeries:
        w = np.asarray(intensities, dtype=float)
        return cls(start + step * np.arange(w.size), w)

    def reversed(self) -> IntensitySeries:
        return IntensitySeries(self.times, self.intensities[::-1])

    def __len__(self) -> int:
        return self.times.size


@dataclass(frozen=True, eq=False)
class EventLabels:
    times: np.ndarray
    labels: np.ndarray
    direction: str
    threshold: float

    def __eq__(self, other) -> bool:
        if not isinstance(other, EventLabels):
            return NotImplemented
        return (
            np.array_equal(self.times, other.times)
            and np.array_equal(self.labels, other.labels)
            and self.direction == other.direction
            and self.threshold == other.threshold
        )

    __hash__ = None


def _label_ri(w: np.ndarray, c: float) -> np.ndarray:
    T = w.size
    y = np.zeros(T, dtype=np.int8)
    if T <= WINDOW:
        return y
    intensifying = np.diff(w) > 0  # step t -> t+1
    z = np.zeros(T, dtype=bool)
    for t in range(T - WINDOW):
        if w[t : t + WINDOW + 1].max() - w[t] < c:
            continue
        z[:] = False
        z[t : t + WINDOW + 1] = True
        # drop trailing points reached by a non-intensifying step
        h = WINDOW
        while h >= 1 and not intensifying[t + h - 1]:
            z[t + h] = False
            h -= 1
        # drop leading points that leave by a non-intensifying step
        h = 0
        while h < WINDOW and not intensifying[t + h]:
            z[t + h] = False
            h += 1
        y |= z
    return y


def label_rapid_events(series: IntensitySeries, c: float = 25.0, direction: str = "RI") -> EventLabels:
    """Label rapid intensification (``"RI"``) or weakening (``"RW"``) events.

    ``c`` is the required change per 24 hours, in the units of the series.
    """
    d = direction.upper()
    if d not in ("RI", "RW"):
        raise ValueError(f"direction must be RI or RW, got {direction!r}")
    if not c > 0:
        raise ValueError(f"threshold c must be positive, got {c}")
    w = series.intensities
    y = _label_ri(w, c) if d == "RI" else _label_ri(w[::-1], c)[::-1].copy()
    return EventLabels(series.times.copy(), y, d, float(c))


def interpolate_labels(synoptic: EventLabels, steps_per_interval: int = 12) -> EventLabels:
    """Fill labels to a finer grid.

    A fine point is 1 iff it sits on a labeled synoptic time or strictly
    between two consecutive labeled synoptic times.
    """
    if steps_per_interval < 1:
        raise ValueError("steps_per_interval must be >= 1")
    y = np.asarray(synoptic.labels, dtype=np.int8)
    m = steps_per_interval
    n = y.size
    if n == 0:
        return EventLabels(np.empty(0, dtype=np.int64), y.copy(), synoptic.direction, synoptic.threshold)
    fine = np.zeros((n - 1) * m + 1, dtype=np.int8)
    fine[::m] = y
    both = np.flatnonzero((y[:-1] == 1) & (y[1:] == 1))
    for i in both:
        fine[i * m : (i + 1) * m + 1] = 1
    t = synoptic.times
    step = float(t[1] - t[0]) if n > 1 else 0.0
    times = t[0] + np.arange(fine.size) * (step / m)
    return EventLabels(times, fine, synoptic.direction, synoptic.threshold)


def filter_genesis_lysis(series: IntensitySeries, min_intensity: float = 35.0) -> IntensitySeries:
    """Keep the span from the first to the last time at or above ``min_intensity``."""
    keep = np.flatnonzero(series.intensities >= min_intensity)
    if keep.size == 0:
        raise DataError(f"no intensities reach {min_intensity}")
    sl = slice(keep[0], keep[-1] + 1)
    return IntensitySeries(series.times[sl], series.intensities[sl])


def read_intensity_csv(path: str | Path) -> IntensitySeries:
    rows = Path(path).read_text().splitlines()
    if not rows or [h.strip() for h in rows[0].split(",")] != ["t", "w"]:
        raise DataError(f"{path}: expected header 't,w'")
    t, w = [], []
    for rownum, line in enumerate(rows[1:], start=2):
        if not line.strip():
            continue
        parts = line.split(",")
        if len(parts) != 2:
            raise DataError(f"row {rownum}: expected 2 fields, got {len(parts)}")
        try:
            t.append(int(parts[0]))
            w.append(float(parts[1]))
        except ValueError:
            raise DataError(f"row {rownum}: cannot parse {line!r}") from None
    return IntensitySeries(np.asarray(t), np.asarray(w))


def write_labels_csv(labels: EventLabels, path: str | Path) -> None:
    lines = ["t,y"] + [f"{float(t):g},{int(y)}" for t, y in zip(labels.times, labels.labels)]
    Path(path).write_text("\n".join(lines) + "\n")
