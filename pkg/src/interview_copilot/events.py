"""Wire protocol units: the session event envelope and interviewer commands.

The event log and the push stream share one envelope; a session is a
deterministic fold of its envelopes. Partial transcript hypotheses travel
on a separate ephemeral channel and are never wrapped in an envelope.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import jsonschema

from .errors import InvalidRequestError

EVENT_KINDS = (
    "session_started",
    "segment_final",
    "graph_delta",
    "skills_progress",
    "question_ready",
    "note_added",
    "session_ended",
    "summary_ready",
    "degraded",
)

COMMAND_KINDS = ("start_session", "request_question", "add_note", "end_session")

_SEGMENT_SCHEMA = {
    "type": "object",
    "required": ["segment_id", "seq", "speaker", "text", "t_start", "t_end"],
    "properties": {
        "segment_id": {"type": "string"},
        "seq": {"type": "integer", "minimum": 1},
        "speaker": {"enum": ["interviewer", "candidate"]},
        "text": {"type": "string"},
        "t_start": {"type": "integer"},
        "t_end": {"type": "integer"},
        "finality": {"const": "final"},
    },
}

_EVIDENCE_SCHEMA = {
    "type": "object",
    "required": ["evidence_id", "skill_id", "summary", "relevance",
                 "supporting_seqs", "basis_seq"],
    "properties": {
        "evidence_id": {"type": "string"},
        "skill_id": {"type": "string"},
        "summary": {"type": "string", "minLength": 1},
        "relevance": {"enum": ["high", "medium"]},
        "supporting_seqs": {"type": "array", "items": {"type": "integer"}, "minItems": 1},
        "basis_seq": {"type": "integer"},
    },
}

_COVERAGE_SCHEMA = {
    "type": "object",
    "required": ["skill_id", "status", "evidence_count"],
    "properties": {
        "skill_id": {"type": "string"},
        "status": {"enum": ["not_covered", "partially_covered", "covered"]},
        "evidence_count": {"type": "integer", "minimum": 0},
    },
}

_SUGGESTION_SCHEMA = {
    "type": "object",
    "required": ["suggestion_id", "mode", "text", "rationale", "star_tags",
                 "provenance_seqs", "issued_at_seq"],
    "properties": {
        "suggestion_id": {"type": "string"},
        "mode": {"enum": ["deep", "contextual", "targeted"]},
        "text": {"type": "string", "minLength": 1},
        "rationale": {"type": "string"},
        "star_tags": {
            "type": "array",
            "items": {"enum": ["Situation", "Task", "Action", "Result"]},
        },
        "target_skill_id": {"type": ["string", "null"]},
        "provenance_seqs": {"type": "array", "items": {"type": "integer"}},
        "issued_at_seq": {"type": "integer", "minimum": 0},
    },
}

PAYLOAD_SCHEMAS: dict[str, dict] = {
    "session_started": {
        "type": "object",
        "required": ["session_id", "profile", "t0_ms"],
        "properties": {
            "session_id": {"type": "string"},
            "profile": {"type": "object"},
            "t0_ms": {"type": "integer"},
        },
    },
    "segment_final": {
        "type": "object",
        "required": ["segment", "out_of_order"],
        "properties": {
            "segment": _SEGMENT_SCHEMA,
            "out_of_order": {"type": "boolean"},
        },
    },
    "graph_delta": {
        "type": "object",
        "required": ["basis_seq", "evidence", "transcript_seqs"],
        "properties": {
            "basis_seq": {"type": "integer", "minimum": 1},
            "evidence": {"type": "array", "items": _EVIDENCE_SCHEMA},
            "transcript_seqs": {"type": "array", "items": {"type": "integer"}},
        },
    },
    "skills_progress": {
        "type": "object",
        "required": ["coverage"],
        "properties": {
            "coverage": {"type": "array", "items": _COVERAGE_SCHEMA},
        },
    },
    "question_ready": {
        "type": "object",
        "required": ["suggestion"],
        "properties": {"suggestion": _SUGGESTION_SCHEMA},
    },
    "note_added": {
        "type": "object",
        "required": ["note"],
        "properties": {
            "note": {
                "type": "object",
                "required": ["note_id", "text", "wall_time"],
                "properties": {
                    "note_id": {"type": "string"},
                    "text": {"type": "string", "minLength": 1},
                    "wall_time": {"type": "integer", "minimum": 0},
                    "anchor_seq": {"type": ["integer", "null"]},
                },
            },
        },
    },
    "session_ended": {
        "type": "object",
        "required": ["last_seq"],
        "properties": {"last_seq": {"type": "integer", "minimum": 0}},
    },
    "summary_ready": {
        "type": "object",
        "required": ["report"],
        "properties": {"report": {"type": "object"}},
    },
    "degraded": {
        "type": "object",
        "required": ["stage", "reason"],
        "properties": {
            "stage": {"type": "string"},
            "reason": {"type": "string"},
            "failure_class": {"type": "string"},
            "basis_seq": {"type": "integer"},
        },
    },
}

COMMAND_SCHEMAS: dict[str, dict] = {
    "start_session": {
        "type": "object",
        "properties": {
            "profile": {"type": "object"},
            "profile_ref": {"type": "string"},
            "replay": {"type": "string"},
            "speed": {"type": "number", "minimum": 0},
            "session_id": {"type": "string"},
        },
        "anyOf": [{"required": ["profile"]}, {"required": ["profile_ref"]}],
    },
    "add_note": {
        "type": "object",
        "required": ["text"],
        "properties": {"text": {"type": "string"}},
    },
    "request_question": {
        "type": "object",
        "required": ["mode"],
        "properties": {
            "mode": {"enum": ["deep", "contextual", "targeted"]},
            "target_segment_seq": {"type": "integer", "minimum": 1},
            "target_skill_id": {"type": "string"},
        },
    },
    "end_session": {"type": "object"},
}


# Compiled validators (schema checking is expensive; do it once per schema).
_VALIDATORS: dict[int, jsonschema.Draft202012Validator] = {}


def _validator(schema: dict) -> jsonschema.Draft202012Validator:
    key = id(schema)
    if key not in _VALIDATORS:
        _VALIDATORS[key] = jsonschema.Draft202012Validator(schema)
    return _VALIDATORS[key]


@dataclass(frozen=True)
class EventEnvelope:
    """The logged and pushed unit of session history."""

    event_seq: int
    session_id: str
    kind: str
    at: int  # ms since epoch
    payload: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "event_seq": self.event_seq,
            "session_id": self.session_id,
            "kind": self.kind,
            "at": self.at,
            "payload": self.payload,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "EventEnvelope":
        return cls(
            event_seq=d["event_seq"],
            session_id=d["session_id"],
            kind=d["kind"],
            at=d["at"],
            payload=d.get("payload", {}),
        )


def validate_envelope(envelope: EventEnvelope) -> None:
    """Check envelope shape and kind-specific payload schema."""
    if envelope.kind not in EVENT_KINDS:
        raise InvalidRequestError(f"unknown event kind {envelope.kind!r}")
    if envelope.event_seq < 1:
        raise InvalidRequestError("event_seq must be >= 1")
    try:
        jsonschema.validate(envelope.payload, PAYLOAD_SCHEMAS[envelope.kind])
    except jsonschema.ValidationError as exc:
        raise InvalidRequestError(
            f"payload for {envelope.kind} invalid: {exc.message}"
        ) from exc


def validate_command(kind: str, payload: dict) -> None:
    if kind not in COMMAND_KINDS:
        raise InvalidRequestError(f"unknown command kind {kind!r}")
    try:
        jsonschema.validate(payload, COMMAND_SCHEMAS[kind])
    except jsonschema.ValidationError as exc:
        raise InvalidRequestError(f"payload for {kind} invalid: {exc.message}") from exc
