"""Real-time interview copilot engine.

Consumes a speaker-tagged transcript stream, incrementally maps candidate
statements to required skills as a skill-evidence-transcript graph, serves
three modes of follow-up question suggestion, and synthesizes a structured
post-interview summary. Every session is an append-only event log and can
be replayed exactly.
"""

from .config import EngineConfig, GatewayConfig, ProviderSettings
from .engine import (
    INGEST_ACCEPTED,
    INGEST_REJECTED,
    INGEST_SUPERSEDED_PARTIAL,
    InlineEvaluator,
    SessionEngine,
    ThreadedEvaluator,
)
from .errors import EngineError, ProviderFailure
from .eventlog import EventLog, replay_log
from .events import EventEnvelope
from .graph import EvidenceNode, GraphDelta, KnowledgeGraph, SkillCoverage
from .profile import JobProfile, Skill, load_profile
from .questions import QuestionRequest, QuestionSuggestion
from .session import Note, Session, create_session, fold_events
from .summary import SummaryReport, build_summary, render_summary
from .transcript import TranscriptSegment, draft_segment, open_replay_source

__version__ = "0.1.0"

__all__ = [
    "EngineConfig",
    "GatewayConfig",
    "ProviderSettings",
    "SessionEngine",
    "InlineEvaluator",
    "ThreadedEvaluator",
    "INGEST_ACCEPTED",
    "INGEST_REJECTED",
    "INGEST_SUPERSEDED_PARTIAL",
    "EngineError",
    "ProviderFailure",
    "EventLog",
    "replay_log",
    "EventEnvelope",
    "EvidenceNode",
    "GraphDelta",
    "KnowledgeGraph",
    "SkillCoverage",
    "JobProfile",
    "Skill",
    "load_profile",
    "QuestionRequest",
    "QuestionSuggestion",
    "Note",
    "Session",
    "create_session",
    "fold_events",
    "SummaryReport",
    "build_summary",
    "render_summary",
    "TranscriptSegment",
    "draft_segment",
    "open_replay_source",
]
