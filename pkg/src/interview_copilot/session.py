"""Session aggregate: the canonical per-interview state.

State moves only along created -> live -> ended -> summarized. Segments,
notes, and suggestions are append-only; the graph grows by deltas. A
session is reconstructible as a pure fold of its event log (fold_events),
which is the basis for replay, crash recovery, and late subscribers.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from .errors import CorruptLogError
from .events import EventEnvelope, validate_envelope
from .graph import GraphDelta, KnowledgeGraph
from .ids import new_ulid
from .profile import JobProfile
from .questions import QuestionSuggestion
from .summary import SummaryReport
from .transcript import TranscriptSegment

SESSION_STATES = ("created", "live", "ended", "summarized")

# Allowed transitions; anything else is a wrong-state error.
_NEXT_STATE = {"created": "live", "live": "ended", "ended": "summarized"}


@dataclass(frozen=True)
class Note:
    """A keyword-level note, anchored to the transcript position at entry."""

    note_id: str
    text: str
    wall_time: int  # ms since session start
    anchor_seq: int | None = None

    def to_dict(self) -> dict:
        return {
            "note_id": self.note_id,
            "text": self.text,
            "wall_time": self.wall_time,
            "anchor_seq": self.anchor_seq,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Note":
        return cls(
            note_id=d["note_id"],
            text=d["text"],
            wall_time=d["wall_time"],
            anchor_seq=d.get("anchor_seq"),
        )


@dataclass
class Session:
    session_id: str
    profile: JobProfile
    state: str = "created"
    t0_ms: int = 0
    segments: list[TranscriptSegment] = field(default_factory=list)
    notes: list[Note] = field(default_factory=list)
    suggestions: list[QuestionSuggestion] = field(default_factory=list)
    graph: KnowledgeGraph = None  # type: ignore[assignment]
    summary: SummaryReport | None = None
    # Live view only: latest partial hypothesis per speaker. Never persisted.
    partials: dict[str, TranscriptSegment] = field(default_factory=dict)

    def __post_init__(self):
        if self.graph is None:
            self.graph = KnowledgeGraph(self.profile)

    @property
    def last_seq(self) -> int:
        return len(self.segments)

    def segment_by_seq(self, seq: int) -> TranscriptSegment | None:
        if 1 <= seq <= len(self.segments):
            return self.segments[seq - 1]
        return None

    def can_transition(self, target: str) -> bool:
        return _NEXT_STATE.get(self.state) == target

    def canonical_dict(self) -> dict:
        """Full state, excluding the ephemeral live view. Two sessions with
        equal canonical dicts are the same session."""
        return {
            "session_id": self.session_id,
            "state": self.state,
            "t0_ms": self.t0_ms,
            "profile": self.profile.to_dict(),
            "segments": [s.to_dict() for s in self.segments],
            "notes": [n.to_dict() for n in self.notes],
            "suggestions": [s.to_dict() for s in self.suggestions],
            "graph": self.graph.export(),
            "summary": self.summary.to_dict() if self.summary else None,
        }

    def canonical_json(self) -> str:
        return json.dumps(self.canonical_dict(), sort_keys=True, separators=(",", ":"))


def create_session(profile: JobProfile, session_id: str | None = None) -> Session:
    """Create a session in state ``created``: empty transcript and notes,
    graph pre-seeded with one skill node per profile skill."""
    profile.validate()
    return Session(session_id=session_id or new_ulid(), profile=profile)


def fold_events(events: list[EventEnvelope]) -> Session:
    """Rebuild a session by folding envelopes in order.

    The log must be gap-free and begin with session_started; any structural
    violation raises CorruptLogError naming the failing event_seq. A
    truncated (prefix) log folds to a valid in-flight session.
    """
    if not events:
        raise CorruptLogError(0, "empty log: expected session_started first")
    session: Session | None = None
    expected_seq = 1
    for env in events:
        if env.event_seq != expected_seq:
            raise CorruptLogError(
                env.event_seq,
                f"event_seq gap: expected {expected_seq}, found {env.event_seq}",
            )
        try:
            validate_envelope(env)
        except Exception as exc:
            raise CorruptLogError(env.event_seq, f"invalid envelope: {exc}") from exc
        if session is None and env.kind != "session_started":
            raise CorruptLogError(env.event_seq, "log must begin with session_started")

        kind, payload = env.kind, env.payload
        try:
            if kind == "session_started":
                if session is not None:
                    raise CorruptLogError(env.event_seq, "duplicate session_started")
                session = create_session(
                    JobProfile.from_dict(payload["profile"]),
                    session_id=payload["session_id"],
                )
                session.state = "live"
                session.t0_ms = payload["t0_ms"]
            elif kind == "segment_final":
                _require_state(session, "live", env.event_seq)
                seg = TranscriptSegment.from_dict(payload["segment"])
                if seg.seq != session.last_seq + 1:
                    raise CorruptLogError(
                        env.event_seq,
                        f"segment seq gap: expected {session.last_seq + 1}, found {seg.seq}",
                    )
                session.segments.append(seg)
            elif kind == "note_added":
                _require_state(session, "live", env.event_seq)
                session.notes.append(Note.from_dict(payload["note"]))
            elif kind == "graph_delta":
                _require_state(session, "live", env.event_seq)
                delta = GraphDelta.from_dict(payload)
                session.graph.apply_delta(delta, max_persisted_seq=session.last_seq)
            elif kind == "question_ready":
                _require_state(session, "live", env.event_seq)
                suggestion = QuestionSuggestion.from_dict(payload["suggestion"])
                # Repeat requests re-push the cached suggestion; fold once.
                if all(s.suggestion_id != suggestion.suggestion_id
                       for s in session.suggestions):
                    session.suggestions.append(suggestion)
            elif kind == "session_ended":
                _require_state(session, "live", env.event_seq)
                session.state = "ended"
            elif kind == "summary_ready":
                _require_state(session, "ended", env.event_seq)
                session.summary = SummaryReport.from_dict(payload["report"])
                session.state = "summarized"
            elif kind == "skills_progress" or kind == "degraded":
                pass  # derived / advisory; no state change
        except CorruptLogError:
            raise
        except Exception as exc:
            raise CorruptLogError(env.event_seq, f"{kind} failed to fold: {exc}") from exc
        expected_seq += 1
    assert session is not None
    return session


def _require_state(session: Session | None, state: str, event_seq: int) -> None:
    if session is None or session.state != state:
        actual = session.state if session else "absent"
        raise CorruptLogError(
            event_seq, f"event requires session state {state}, found {actual}"
        )
