"""Time grids and observed time series.

A :class:`TimeGrid` is a strictly increasing array of sample times.  Grids
that are equidistant (to within a tight relative tolerance) carry their
sampling period, which unlocks the faster uniform-sampling code paths
elsewhere in the package.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = ["TimeGrid", "TimeSeries", "UNIFORM_REL_TOL"]

# Relative tolerance under which consecutive sampling intervals are
# considered equal and the grid is treated as uniform.
UNIFORM_REL_TOL = 1e-12


def _detect_uniform_period(timestamps: np.ndarray) -> float | None:
    diffs = np.diff(timestamps)
    period = diffs[0]
    if np.all(np.abs(diffs - period) <= UNIFORM_REL_TOL * abs(period)):
        return float(period)
    return None


@dataclass(frozen=True)
class TimeGrid:
    """Strictly increasing sample times, optionally equidistant.

    Parameters
    ----------
    timestamps : ndarray
        Sample times in seconds, strictly increasing, at least 2 points.
    uniform_period : float, optional
        Sampling period in seconds.  Must be present if and only if the
        timestamps are equidistant within ``UNIFORM_REL_TOL`` (relative).
        Use :meth:`from_timestamps` to auto-detect.
    """

    timestamps: np.ndarray
    uniform_period: float | None = None

    def __post_init__(self):
        ts = np.asarray(self.timestamps, dtype=float)
        if ts.ndim != 1 or ts.size < 2:
            raise ValueError("a time grid needs a 1-d array of at least 2 timestamps")
        if not np.all(np.isfinite(ts)):
            raise ValueError("timestamps must be finite")
        if not np.all(np.diff(ts) > 0):
            raise ValueError("timestamps must be strictly increasing")
        ts = ts.copy()
        ts.setflags(write=False)
        object.__setattr__(self, "timestamps", ts)

        detected = _detect_uniform_period(ts)
        if self.uniform_period is None:
            if detected is not None:
                raise ValueError(
                    "grid is equidistant; construct it with uniform_period set "
                    "(or use TimeGrid.from_timestamps)"
                )
        else:
            if detected is None:
                raise ValueError("uniform_period given but timestamps are not equidistant")
            if abs(self.uniform_period - detected) > UNIFORM_REL_TOL * abs(detected):
                raise ValueError("uniform_period does not match the timestamp spacing")

    @classmethod
    def from_timestamps(cls, timestamps) -> "TimeGrid":
        """Build a grid, auto-detecting whether it is uniform."""
        ts = np.asarray(timestamps, dtype=float)
        if ts.ndim != 1 or ts.size < 2:
            raise ValueError("a time grid needs a 1-d array of at least 2 timestamps")
        if not np.all(np.isfinite(ts)) or not np.all(np.diff(ts) > 0):
            raise ValueError("timestamps must be finite and strictly increasing")
        return cls(ts, _detect_uniform_period(ts))

    @property
    def size(self) -> int:
        return int(self.timestamps.size)

    @property
    def is_uniform(self) -> bool:
        return self.uniform_period is not None

    @property
    def t1(self) -> float:
        """First reference time."""
        return float(self.timestamps[0])

    @property
    def t2(self) -> float:
        """Second reference time."""
        return float(self.timestamps[1])

    @property
    def mean_interval(self) -> float:
        ts = self.timestamps
        return float((ts[-1] - ts[0]) / (ts.size - 1))


@dataclass(frozen=True)
class TimeSeries:
    """Observed values on a time grid."""

    grid: TimeGrid
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        w = np.asarray(self.values, dtype=float)
        if w.shape != self.grid.timestamps.shape:
            raise ValueError("values must have one entry per timestamp")
        if not np.all(np.isfinite(w)):
            raise ValueError("observed values must be finite")
        w = w.copy()
        w.setflags(write=False)
        object.__setattr__(self, "values", w)

    @classmethod
    def from_arrays(cls, timestamps, values) -> "TimeSeries":
        return cls(TimeGrid.from_timestamps(timestamps), values)

    @property
    def timestamps(self) -> np.ndarray:
        return self.grid.timestamps

    @property
    def size(self) -> int:
        return self.grid.size

    @property
    def energy(self) -> float:
        """Sum of squared observations."""
        return float(np.dot(self.values, self.values))
