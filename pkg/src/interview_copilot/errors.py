"""Engine error hierarchy.

Every error carries a stable ``code`` string so callers (gateway, CLI) can
map failures onto wire errors and exit codes without parsing messages.
"""

from __future__ import annotations


class EngineError(Exception):
    code = "engine-error"

    def __init__(self, message: str = ""):
        super().__init__(message or self.code)


class InvalidProfileError(EngineError):
    code = "invalid-profile"


class SessionNotLiveError(EngineError):
    code = "session-not-live"


class WrongStateError(EngineError):
    code = "wrong-state"


class EmptyTextError(EngineError):
    code = "empty-text"


class UnknownSkillError(EngineError):
    code = "unknown-skill"


class UnknownSegmentError(EngineError):
    code = "unknown-segment"


class InvalidRequestError(EngineError):
    code = "invalid-request"


class FileNotFoundReplayError(EngineError):
    code = "file-not-found"


class MalformedLineError(EngineError):
    code = "malformed-line"

    def __init__(self, line_no: int, message: str = ""):
        self.line_no = line_no
        super().__init__(message or f"malformed line {line_no}")


class DanglingReferenceError(EngineError):
    code = "dangling-reference"


class SeqConflictError(EngineError):
    code = "seq-conflict"


class CorruptLogError(EngineError):
    code = "corrupt-log"

    def __init__(self, event_seq: int, message: str = ""):
        self.event_seq = event_seq
        super().__init__(message or f"corrupt log at event_seq {event_seq}")


class UnknownSessionError(EngineError):
    code = "unknown-session"


class SessionNotSummarizedError(EngineError):
    code = "session-not-summarized"


class ProviderFailure(EngineError):
    """Model provider failure. ``failure_class`` is one of
    ``timeout`` | ``malformed-output`` | ``transport``."""

    code = "provider-failure"

    def __init__(self, failure_class: str, message: str = ""):
        self.failure_class = failure_class
        super().__init__(message or failure_class)
