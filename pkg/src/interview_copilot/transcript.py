"""Transcript segments and pluggable transcript sources.

A source emits time-ordered, speaker-tagged segments. Partial hypotheses
may be superseded; finals are terminal and immutable. Sequence numbers are
assigned by the session at ingestion, never by the source.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Iterator, Protocol

from .errors import FileNotFoundReplayError, MalformedLineError
from .ids import content_id

SPEAKERS = ("interviewer", "candidate")
FINALITIES = ("partial", "final")


@dataclass(frozen=True)
class TranscriptSegment:
    """One speaker-tagged utterance span.

    ``seq`` is None until the session assigns it at finalization; partials
    never receive one. Final segments are immutable once emitted.
    """

    segment_id: str
    speaker: str  # "interviewer" | "candidate"
    text: str
    t_start: int  # ms offset from session start
    t_end: int
    finality: str = "final"  # "partial" | "final"
    seq: int | None = None

    @property
    def is_final(self) -> bool:
        return self.finality == "final"

    def with_seq(self, seq: int) -> "TranscriptSegment":
        return replace(self, seq=seq)

    def to_dict(self) -> dict:
        return {
            "segment_id": self.segment_id,
            "seq": self.seq,
            "speaker": self.speaker,
            "text": self.text,
            "t_start": self.t_start,
            "t_end": self.t_end,
            "finality": self.finality,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "TranscriptSegment":
        return cls(
            segment_id=d["segment_id"],
            speaker=d["speaker"],
            text=d["text"],
            t_start=d["t_start"],
            t_end=d["t_end"],
            finality=d.get("finality", "final"),
            seq=d.get("seq"),
        )


def draft_segment(speaker: str, text: str, t_start: int, t_end: int,
                  finality: str = "final") -> TranscriptSegment:
    """Build an un-sequenced segment with a content-derived id."""
    return TranscriptSegment(
        segment_id=content_id("seg", speaker, text, t_start, t_end),
        speaker=speaker,
        text=text,
        t_start=t_start,
        t_end=t_end,
        finality=finality,
    )


class TranscriptSource(Protocol):
    """Behavioral interface: iterate to receive segments in emission order.

    For a given utterance at most one final is emitted, after any partials.
    """

    def __iter__(self) -> Iterator[TranscriptSegment]: ...


def _parse_replay_line(line: str, line_no: int) -> TranscriptSegment:
    try:
        obj = json.loads(line)
    except json.JSONDecodeError as exc:
        raise MalformedLineError(line_no, f"line {line_no}: invalid JSON ({exc.msg})") from exc
    if not isinstance(obj, dict):
        raise MalformedLineError(line_no, f"line {line_no}: expected an object")
    try:
        speaker = obj["speaker"]
        text = obj["text"]
        t_start = obj["t_start"]
        t_end = obj["t_end"]
    except KeyError as exc:
        raise MalformedLineError(line_no, f"line {line_no}: missing field {exc.args[0]!r}") from exc
    if speaker not in SPEAKERS:
        raise MalformedLineError(line_no, f"line {line_no}: speaker must be one of {SPEAKERS}")
    if not isinstance(text, str):
        raise MalformedLineError(line_no, f"line {line_no}: text must be a string")
    if not isinstance(t_start, int) or not isinstance(t_end, int) or isinstance(t_start, bool) or isinstance(t_end, bool):
        raise MalformedLineError(line_no, f"line {line_no}: t_start/t_end must be integers (ms)")
    if t_start > t_end:
        raise MalformedLineError(line_no, f"line {line_no}: t_start > t_end")
    return draft_segment(speaker, text, t_start, t_end, finality="final")


class ReplaySource:
    """Deterministic file-backed source: line-delimited JSON, one final
    segment per line, emitted in file order.

    speed == 0 emits as fast as consumed; speed > 0 paces by the recorded
    t_start deltas divided by the multiplier (2.0 plays twice as fast).
    """

    def __init__(self, segments: list[TranscriptSegment], speed: float = 0.0,
                 sleep=time.sleep):
        self.segments = segments
        self.speed = speed
        self._sleep = sleep

    def __len__(self) -> int:
        return len(self.segments)

    def __iter__(self) -> Iterator[TranscriptSegment]:
        prev_t: int | None = None
        for seg in self.segments:
            if self.speed > 0 and prev_t is not None:
                delta_ms = max(0, seg.t_start - prev_t)
                if delta_ms:
                    self._sleep(delta_ms / 1000.0 / self.speed)
            prev_t = seg.t_start
            yield seg


def open_replay_source(path: str | Path, speed: float = 0.0) -> ReplaySource:
    """Parse a replay file eagerly (so malformed lines fail up front) and
    return a source over its segments."""
    if speed < 0:
        raise ValueError("speed must be >= 0")
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundReplayError(f"replay file not found: {path}")
    segments: list[TranscriptSegment] = []
    with path.open(encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            segments.append(_parse_replay_line(line, line_no))
    return ReplaySource(segments, speed=speed)


class VendorSttAdapter:
    """Placeholder for a live speech-to-text vendor client.

    Anything conforming to TranscriptSource can drive a session; wiring a
    real streaming STT vendor is deployment-specific and intentionally not
    shipped here.
    """

    def __init__(self, *args, **kwargs):
        raise NotImplementedError(
            "no vendor STT client is bundled; implement TranscriptSource "
            "against your vendor's streaming API"
        )
