"""Sample-path simulation of bufferless (GI/GI/1/1), unit-buffer-with-replacement
(GI/GI/1/2*) and zero-wait single-server systems, plus the peak-based
estimators built on the per-departure records.

Every departure in these systems carries a packet newer than the previous
one, so peak ``k`` is simply the ``k``-th departure.  With ``g(k)`` the time
the age spends above ``d`` between peaks ``k-1`` and ``k``::

    g(k) = min((A_peak(k) - d)^+, T_D(k) - T_D(k-1))

and the violation probability is the long-run ``sum g(k) / T``.
"""

from __future__ import annotations

import enum
import math
from bisect import bisect_left
from dataclasses import dataclass, fields
from typing import Iterator

import numpy as np

from .dists import Deterministic, DistributionSpec, RngStream
from .events import ARRIVAL, DEPARTURE, DROP, REPLACE, SERVICE_START, EventLog
from .stats import Estimate, batch_means_se

WARMUP_PEAKS = 100


class Discipline(str, enum.Enum):
    GG11 = "gg11"
    GG12STAR = "gg12star"
    ZERO_WAIT = "zero-wait"

    @classmethod
    def parse(cls, text: str) -> "Discipline":
        key = text.strip().lower().replace("_", "-")
        aliases = {"gg11": cls.GG11, "gg12star": cls.GG12STAR, "gg12*": cls.GG12STAR,
                   "zero-wait": cls.ZERO_WAIT, "zerowait": cls.ZERO_WAIT}
        if key not in aliases:
            raise ValueError(f"unknown discipline {text!r}")
        return aliases[key]


@dataclass(frozen=True)
class SystemSpec:
    discipline: Discipline
    service: DistributionSpec
    arrival: DistributionSpec | None = None

    def __post_init__(self):
        object.__setattr__(self, "discipline", Discipline(self.discipline))
        if self.discipline is Discipline.ZERO_WAIT:
            if self.arrival is not None:
                raise ValueError("zero-wait system generates packets on departure; no arrival law")
        elif self.arrival is None:
            raise ValueError(f"{self.discipline.value} needs an arrival law")

    @property
    def arrival_rate(self) -> float:
        return math.inf if self.arrival is None else 1.0 / self.arrival.mean

    @property
    def service_rate(self) -> float:
        return 1.0 / self.service.mean


@dataclass(frozen=True)
class PeakRecord:
    k: int
    T_A: float
    T_D: float
    X: float
    I: float
    W: float
    A_peak: float
    inter_departure: float
    X_prev: float
    W_prev: float
    Z_check: float  # gap from the previous arrival to packet k
    Z_hat_prev: float  # gap from packet k-1 to the arrival after it


_ARRAY_FIELDS = [f.name for f in fields(PeakRecord) if f.name != "k"]


@dataclass(frozen=True, eq=False)
class SamplePath:
    """Peak records (as parallel arrays) plus the served-packet log.

    The observation window is ``(horizon_start, horizon_end]``, from the
    departure just before the first kept peak to the last departure, so the
    inter-departure times of the kept peaks tile it exactly.
    """

    discipline: Discipline
    T_A: np.ndarray
    T_D: np.ndarray
    X: np.ndarray
    I: np.ndarray
    W: np.ndarray
    A_peak: np.ndarray
    inter_departure: np.ndarray
    X_prev: np.ndarray
    W_prev: np.ndarray
    Z_check: np.ndarray
    Z_hat_prev: np.ndarray
    horizon_start: float
    first_index: int
    served_id: np.ndarray
    served_arrival: np.ndarray
    served_start: np.ndarray
    served_departure: np.ndarray
    lost: tuple = ()  # (arrival_time, loss_time, packet_id, event_code) when recorded

    def __post_init__(self):
        for name in _ARRAY_FIELDS + ["served_id", "served_arrival", "served_start", "served_departure"]:
            getattr(self, name).flags.writeable = False

    def __len__(self) -> int:
        return len(self.T_D)

    @property
    def n_peaks(self) -> int:
        return len(self.T_D)

    @property
    def horizon_end(self) -> float:
        return float(self.T_D[-1])

    @property
    def horizon(self) -> float:
        return self.horizon_end - self.horizon_start

    def record(self, i: int) -> PeakRecord:
        return PeakRecord(int(self.first_index + i), **{n: float(getattr(self, n)[i]) for n in _ARRAY_FIELDS})

    def __iter__(self) -> Iterator[PeakRecord]:
        for i in range(len(self)):
            yield self.record(i)

    def event_log(self) -> EventLog:
        """Arrival, service-start and departure events of every served packet,
        plus drop/replace events when the simulation recorded them."""
        n = len(self.served_id)
        codes = [np.full(n, ARRIVAL), np.full(n, SERVICE_START), np.full(n, DEPARTURE)]
        times = [self.served_arrival, self.served_start, self.served_departure]
        ids = [self.served_id] * 3
        if self.lost:
            ta, tl, p, c = (np.asarray(col) for col in zip(*self.lost))
            codes += [np.full(len(ta), ARRIVAL), c]
            times += [ta, tl]
            ids += [p, p]
        return EventLog.from_columns(np.concatenate(codes), np.concatenate(times), np.concatenate(ids))


class _ArrivalStream:
    """Renewal arrival epochs generated block-wise on demand."""

    def __init__(self, law: DistributionSpec, gen: np.random.Generator, block: int = 65536):
        self.law = law
        self.gen = gen
        self.block = block
        self.times: list[float] = []
        self.base = 0  # global index of times[0]
        self.generated = 0
        self.last = 0.0

    def _extend(self) -> None:
        if isinstance(self.law, Deterministic):
            # exact multiples avoid cumulative rounding in lattice arrivals
            idx = np.arange(self.generated + 1, self.generated + self.block + 1, dtype=float)
            new = idx * self.law.value
        else:
            new = self.last + np.cumsum(self.law.sample(self.gen, self.block))
        self.times.extend(new.tolist())
        self.generated += self.block
        self.last = self.times[-1]

    def time(self, idx: int) -> float:
        if idx < 0:
            return 0.0
        while idx >= self.generated:
            self._extend()
        return self.times[idx - self.base]

    def first_at_or_after(self, t: float, lo: int) -> int:
        """Smallest global index >= lo whose epoch is >= t."""
        while self.last < t:
            self._extend()
        return self.base + bisect_left(self.times, t, max(lo - self.base, 0))

    def release_before(self, idx: int) -> None:
        cut = idx - self.base
        if cut > 4 * self.block:
            del self.times[:cut]
            self.base = idx


def simulate(spec: SystemSpec, n_peaks: int, seed: int | RngStream = 0,
             warmup: int = WARMUP_PEAKS, record_events: bool = False) -> SamplePath:
    """Simulate until ``warmup + n_peaks`` peaks have occurred and keep the last
    ``n_peaks``.

    Ties between a departure and an arrival are resolved departure-first, so
    an arrival landing exactly on a departure is admitted.  With
    ``record_events`` every dropped (GI/GI/1/1) or replaced (GI/GI/1/2*)
    arrival is logged as well; leave it off for long high-rate runs.
    """
    if n_peaks < 2:
        raise ValueError(f"n_peaks must be at least 2, got {n_peaks}")
    if warmup < 0:
        raise ValueError("warmup must be non-negative")
    rng = seed if isinstance(seed, RngStream) else RngStream(seed)
    arrival_rng, service_rng = rng.spawn(2)
    n_served = warmup + n_peaks + 1
    X = np.asarray(spec.service.sample(service_rng.generator, n_served), dtype=float)

    if spec.discipline is Discipline.ZERO_WAIT:
        D = np.cumsum(X)
        A = D - X
        S = A
        ids = np.arange(n_served)
        I = np.zeros(n_served)
        W = np.zeros(n_served)
        z_check = np.concatenate([[0.0], X[:-1]])
        z_hat = X.copy()
        lost = ()
    else:
        A, S, D, I, W, ids, z_check, z_hat, lost = _run_queue(spec, X, arrival_rng, record_events)

    first = warmup + 1
    sl = slice(first, n_served)
    prev = slice(first - 1, n_served - 1)
    return SamplePath(
        discipline=spec.discipline,
        T_A=A[sl], T_D=D[sl], X=X[sl], I=I[sl], W=W[sl],
        # built from the recursion rather than from absolute epochs, whose
        # rounding grows with the horizon
        A_peak=(X[sl] + I[sl]) + (W[prev] + X[prev]),
        inter_departure=X[sl] + I[sl],
        X_prev=X[prev], W_prev=W[prev],
        Z_check=z_check[sl], Z_hat_prev=z_hat[prev],
        horizon_start=float(D[first - 1]),
        first_index=first,
        served_id=ids, served_arrival=A, served_start=S, served_departure=D,
        lost=lost,
    )


def _run_queue(spec: SystemSpec, X: np.ndarray, rng: RngStream, record_events: bool):
    n = len(X)
    stream = _ArrivalStream(spec.arrival, rng.generator)
    replace = spec.discipline is Discipline.GG12STAR
    xs = X.tolist()
    A = [0.0] * n
    S = [0.0] * n
    D = [0.0] * n
    I = [0.0] * n
    W = [0.0] * n
    ids = [0] * n
    z_check = [0.0] * n
    z_hat = [0.0] * n
    lost = []

    a0 = stream.time(0)
    A[0] = S[0] = a0
    I[0] = a0
    D[0] = a0 + xs[0]
    z_check[0] = a0
    idx_prev = 0
    for j in range(1, n):
        d_prev = D[j - 1]
        nxt = stream.first_at_or_after(d_prev, idx_prev + 1)
        if replace and nxt - 1 > idx_prev:
            # freshest arrival during the previous service waits in the buffer
            idx = nxt - 1
            a = stream.time(idx)
            start = d_prev
            W[j] = d_prev - a
            if record_events:
                lost.extend((stream.time(i), stream.time(i + 1), i, REPLACE)
                            for i in range(idx_prev + 1, idx))
        else:
            idx = nxt
            a = stream.time(idx)
            start = a
            I[j] = a - d_prev
            if record_events:
                lost.extend((stream.time(i), stream.time(i), i, DROP) for i in range(idx_prev + 1, idx))
        A[j] = a
        S[j] = start
        D[j] = start + xs[j]
        ids[j] = idx
        z_check[j] = a - stream.time(idx - 1)
        z_hat[j - 1] = stream.time(idx_prev + 1) - stream.time(idx_prev)
        idx_prev = idx
        stream.release_before(idx - 1)
    z_hat[n - 1] = stream.time(idx_prev + 1) - stream.time(idx_prev)

    arr = [np.array(v, dtype=float) for v in (A, S, D, I, W)]
    return (*arr, np.array(ids, dtype=np.int64), np.array(z_check), np.array(z_hat), tuple(lost))


# --------------------------------------------------------------------------
# peak-based estimators


def _g(a_peak, inter, d):
    return np.minimum(np.maximum(a_peak - d, 0.0), inter)


def g_of_k(record: PeakRecord, d: float) -> float:
    """Time the age exceeds ``d`` during the inter-departure interval ending at peak ``k``."""
    if d < 0:
        raise ValueError("age limit must be non-negative")
    return float(_g(record.A_peak, record.inter_departure, d))


def g_values(path: SamplePath, d: float) -> np.ndarray:
    if d < 0:
        raise ValueError("age limit must be non-negative")
    return _g(path.A_peak, path.inter_departure, d)


def violation_estimate(path: SamplePath, d: float) -> Estimate:
    """``sum_k g(k) / T`` over the observation window, with a batch-means error."""
    g = g_values(path, d)
    value = float(g.sum() / path.horizon)
    return Estimate(min(max(value, 0.0), 1.0), batch_means_se(g, path.inter_departure), len(g))


def departure_rate(path: SamplePath) -> float:
    """Empirical departure rate: kept peaks per unit time of the observation window."""
    return len(path) / path.horizon


def renewal_reward_estimate(path: SamplePath, d: float) -> Estimate:
    """Empirical departure rate times the mean reward ``g(k)``."""
    g = g_values(path, d)
    value = departure_rate(path) * float(g.mean())
    return Estimate(value, batch_means_se(g, path.inter_departure), len(g))


def mean_aoi_estimate(path: SamplePath) -> Estimate:
    # age rises from A_peak - inter to A_peak over each inter-departure interval
    area = path.inter_departure * (path.A_peak - 0.5 * path.inter_departure)
    return Estimate(float(area.sum() / path.horizon), batch_means_se(area, path.inter_departure), len(area))


@dataclass(frozen=True)
class SiidReport:
    n: int
    lag: int
    corr_g: float
    corr_inter_departure: float
    threshold: float
    degenerate_g: bool
    degenerate_inter_departure: bool

    @property
    def flagged(self) -> bool:
        """True when a non-degenerate sequence shows lag correlation beyond the band."""
        return any(abs(c) > self.threshold and not deg for c, deg in (
            (self.corr_g, self.degenerate_g),
            (self.corr_inter_departure, self.degenerate_inter_departure)))


def _lag_corr(x: np.ndarray, lag: int) -> tuple[float, bool]:
    a, b = x[:-lag], x[lag:]
    # constant up to rounding of the event times
    tol = 1e-9 * max(1.0, float(np.abs(x).max()))
    if np.ptp(a) <= tol or np.ptp(b) <= tol:
        return 0.0, True
    return float(np.corrcoef(a, b)[0, 1]), False


def siid_diagnostic(path: SamplePath, d: float, lag: int = 2) -> SiidReport:
    """Lag-``lag`` sample correlation of ``g(k)`` and of the inter-departure
    times; under independence both sit inside ``±4/sqrt(n)``."""
    if path.discipline is Discipline.GG12STAR:
        raise ValueError("structural independence is not claimed for GI/GI/1/2*")
    if len(path) < 10_000:
        raise ValueError(f"need at least 10^4 peaks, got {len(path)}")
    cg, dg = _lag_corr(g_values(path, d), lag)
    ci, di = _lag_corr(np.asarray(path.inter_departure), lag)
    return SiidReport(len(path), lag, cg, ci, 4.0 / math.sqrt(len(path)), dg, di)
