"""Ground-truth age trajectory rebuilt straight from arrival/departure events.

``age(t) = t - max{T_A(n) : T_D(n) <= t}`` is piecewise linear with slope one,
so the time spent above a limit and the time-average age are integrated
exactly, segment by segment.  Nothing here knows about peaks, idle times or
queue disciplines.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .events import ARRIVAL, DEPARTURE, EventLog


class MalformedLogError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class AoiTrajectory:
    """Departure epochs and, for each, the generation time of the freshest
    packet delivered so far.  Between ``departure[i]`` and ``departure[i+1]``
    the age is ``t - freshest[i]``."""

    departure: np.ndarray
    freshest: np.ndarray
    start: float
    end: float

    @property
    def breakpoints(self) -> np.ndarray:
        """``(time, age)`` right after every departure."""
        return np.column_stack([self.departure, self.departure - self.freshest])

    @property
    def horizon(self) -> float:
        return self.end - self.start

    def age(self, t: float) -> float:
        i = np.searchsorted(self.departure, t, side="right") - 1
        if i < 0:
            raise ValueError(f"age undefined before the first departure at {self.departure[0]}")
        return float(t - self.freshest[i])

    def _segments(self):
        lo = np.maximum(self.departure, self.start)
        hi = np.minimum(np.append(self.departure[1:], self.end), self.end)
        keep = hi > lo
        return lo[keep], hi[keep], self.freshest[keep]


def trajectory_from_log(log: EventLog, start: float | None = None, end: float | None = None) -> AoiTrajectory:
    """Rebuild the age trajectory observed over ``[start, end]`` (default: first
    to last departure).  Events other than arrivals and departures are only
    checked for time order."""
    t = log.time
    if len(t) == 0:
        raise MalformedLogError("empty event log")
    if np.any(np.diff(t) < 0):
        bad = int(np.argmax(np.diff(t) < 0)) + 1
        raise MalformedLogError(f"event times not sorted at row {bad}")

    pos = np.arange(len(t))
    is_arr = log.event == ARRIVAL
    is_dep = log.event == DEPARTURE
    arr_id, arr_t, arr_pos = log.packet_id[is_arr], t[is_arr], pos[is_arr]
    dep_id, dep_t, dep_pos = log.packet_id[is_dep], t[is_dep], pos[is_dep]
    if len(dep_id) == 0:
        raise MalformedLogError("log has no departures")
    if len(np.unique(arr_id)) != len(arr_id):
        raise MalformedLogError("packet arrives more than once")
    if len(np.unique(dep_id)) != len(dep_id):
        raise MalformedLogError("packet departs more than once")

    order = np.argsort(arr_id, kind="stable")
    arr_id, arr_t, arr_pos = arr_id[order], arr_t[order], arr_pos[order]
    j = np.clip(np.searchsorted(arr_id, dep_id), 0, max(len(arr_id) - 1, 0))
    if len(arr_id) == 0 or np.any(arr_id[j] != dep_id):
        missing = dep_id[arr_id[j] != dep_id][0] if len(arr_id) else dep_id[0]
        raise MalformedLogError(f"departure of packet {missing} without an arrival")
    if np.any(arr_pos[j] > dep_pos) or np.any(arr_t[j] > dep_t):
        bad = dep_id[(arr_pos[j] > dep_pos) | (arr_t[j] > dep_t)][0]
        raise MalformedLogError(f"packet {bad} departs before it arrives")

    freshest = np.maximum.accumulate(arr_t[j])
    start = float(dep_t[0]) if start is None else float(start)
    end = float(dep_t[-1]) if end is None else float(end)
    if start < dep_t[0] or end < start:
        raise ValueError(f"observation window [{start}, {end}] must begin at or after the first departure")
    return AoiTrajectory(dep_t, freshest, start, end)


def time_above(trajectory: AoiTrajectory, d: float) -> float:
    """Exact fraction of the window during which the age exceeds ``d``."""
    if d < 0:
        raise ValueError("age limit must be non-negative")
    lo, hi, fresh = trajectory._segments()
    # age > d  <=>  t > fresh + d
    above = np.maximum(hi - np.maximum(lo, fresh + d), 0.0)
    return float(above.sum() / trajectory.horizon)


def mean_age(trajectory: AoiTrajectory) -> float:
    """Exact time-average of the age over the window."""
    lo, hi, fresh = trajectory._segments()
    area = (hi - lo) * (0.5 * (lo + hi) - fresh)
    return float(area.sum() / trajectory.horizon)
