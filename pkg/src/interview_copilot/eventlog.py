"""Append-only per-session event log: one envelope per line of JSONL.

The log is the durability boundary: an event is appended (and flushed)
before any subscriber sees it, so every observed event is replayable and a
crash can lose at most events nobody observed.
"""

from __future__ import annotations

import json
import os
import threading
from pathlib import Path

from .errors import CorruptLogError, SeqConflictError
from .events import EventEnvelope, validate_envelope
from .session import Session, fold_events


class EventLog:
    def __init__(self, path: str | Path, fsync: bool = False):
        self.path = Path(path)
        self.fsync = fsync
        self._lock = threading.Lock()
        self._fh = None
        self._last_seq = 0
        if self.path.exists():
            events = self.read_all()
            self._last_seq = events[-1].event_seq if events else 0

    @property
    def last_seq(self) -> int:
        return self._last_seq

    def append(self, envelope: EventEnvelope) -> int:
        """Durably append one envelope; returns its position (== event_seq).

        Rejects gaps and replays: event_seq must be exactly last + 1.
        """
        validate_envelope(envelope)
        with self._lock:
            if envelope.event_seq != self._last_seq + 1:
                raise SeqConflictError(
                    f"expected event_seq {self._last_seq + 1}, got {envelope.event_seq}"
                )
            if self._fh is None:
                self.path.parent.mkdir(parents=True, exist_ok=True)
                self._fh = self.path.open("a", encoding="utf-8")
            self._fh.write(json.dumps(envelope.to_dict(), sort_keys=True) + "\n")
            self._fh.flush()
            if self.fsync:
                os.fsync(self._fh.fileno())
            self._last_seq = envelope.event_seq
            return envelope.event_seq

    def read_all(self) -> list[EventEnvelope]:
        """Parse the whole log; corrupt lines fail naming their event_seq."""
        if not self.path.exists():
            return []
        events: list[EventEnvelope] = []
        with self.path.open(encoding="utf-8") as fh:
            for idx, line in enumerate(fh, start=1):
                if not line.strip():
                    continue
                try:
                    events.append(EventEnvelope.from_dict(json.loads(line)))
                except (json.JSONDecodeError, KeyError) as exc:
                    raise CorruptLogError(idx, f"unparseable event at line {idx}: {exc}") from exc
        return events

    def close(self) -> None:
        with self._lock:
            if self._fh is not None:
                self._fh.close()
                self._fh = None


def replay_log(log: EventLog | str | Path) -> Session:
    """Rebuild a session from its log. Folding is pure: no provider calls,
    no clock reads; the result equals the live session that wrote the log."""
    if not isinstance(log, EventLog):
        log = EventLog(log)
    return fold_events(log.read_all())
