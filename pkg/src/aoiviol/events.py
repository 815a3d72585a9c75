"""Arrival/departure event log and its CSV form (``event,time,packet_id``)."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

EVENT_KINDS = ("arrival", "service_start", "departure", "drop", "replace")
ARRIVAL, SERVICE_START, DEPARTURE, DROP, REPLACE = range(5)

# tie-break at equal times: departures first, then arrivals and their
# drop/replace consequences, then service starts
_PRIORITY = np.array([1, 3, 0, 2, 2])


@dataclass(frozen=True, eq=False)
class EventLog:
    event: np.ndarray  # int8 codes into EVENT_KINDS
    time: np.ndarray
    packet_id: np.ndarray

    def __len__(self) -> int:
        return len(self.time)

    @classmethod
    def from_columns(cls, event, time, packet_id, sort: bool = True) -> "EventLog":
        event = np.asarray(event, dtype=np.int8)
        time = np.asarray(time, dtype=float)
        packet_id = np.asarray(packet_id, dtype=np.int64)
        if not (len(event) == len(time) == len(packet_id)):
            raise ValueError("event log columns differ in length")
        if sort:
            order = np.lexsort((packet_id, _PRIORITY[event], time))
            event, time, packet_id = event[order], time[order], packet_id[order]
        return cls(event, time, packet_id)

    @classmethod
    def from_records(cls, records) -> "EventLog":
        """Build from ``(event_name, time, packet_id)`` tuples, kept in the given order."""
        names, times, ids = zip(*records) if records else ((), (), ())
        codes = []
        for name in names:
            if name not in EVENT_KINDS:
                raise ValueError(f"unknown event kind {name!r}")
            codes.append(EVENT_KINDS.index(name))
        return cls.from_columns(codes, times, ids, sort=False)

    def records(self):
        for e, t, p in zip(self.event.tolist(), self.time.tolist(), self.packet_id.tolist()):
            yield EVENT_KINDS[e], t, p

    def write_csv(self, path: str | Path) -> None:
        path = Path(path)
        try:
            with path.open("w", newline="") as fh:
                w = csv.writer(fh, lineterminator="\n")
                w.writerow(["event", "time", "packet_id"])
                for name, t, p in self.records():
                    w.writerow([name, repr(t), p])
        except OSError as exc:
            raise OSError(f"cannot write event log {path}: {exc}") from exc

    @classmethod
    def read_csv(cls, path: str | Path) -> "EventLog":
        rows = []
        with Path(path).open(newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader, None)
            if header != ["event", "time", "packet_id"]:
                raise ValueError(f"{path}: expected header event,time,packet_id, got {header}")
            for lineno, row in enumerate(reader, start=2):
                if len(row) != 3:
                    raise ValueError(f"{path}:{lineno}: expected 3 fields, got {len(row)}")
                try:
                    rows.append((row[0], float(row[1]), int(row[2])))
                except ValueError as exc:
                    raise ValueError(f"{path}:{lineno}: {exc}") from None
        return cls.from_records(rows)
