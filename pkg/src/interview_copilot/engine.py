"""Single-writer session owner.

All mutations of one session flow through one SessionEngine: transcript
ingestion, note entry, question requests, ending, and summarization. Every
state change is appended to the event log before it is pushed to any sink
(log-before-push), so the log is always a faithful prefix of what any
observer saw.

Skill evaluation may run concurrently with ingestion (provider calls have
latency), but deltas are applied in basis_seq order: a completed evaluation
whose predecessor is still in flight waits in a reorder buffer.
"""

from __future__ import annotations

import logging
import threading
import time
from collections import deque
from concurrent.futures import ThreadPoolExecutor

from .config import EngineConfig
from .errors import (
    EmptyTextError,
    ProviderFailure,
    SessionNotLiveError,
    WrongStateError,
)
from .eventlog import EventLog
from .events import EventEnvelope
from .graph import KnowledgeGraph, SkillCoverage
from .ids import content_id
from .profile import JobProfile
from .provider import InvokePolicy, Provider
from .questions import QuestionRequest, QuestionSuggestion, generate_suggestion
from .session import Note, Session, create_session
from .skill_mapper import build_eval_context, evaluate_segment
from .summary import SummaryReport, build_summary
from .transcript import FINALITIES, SPEAKERS, TranscriptSegment

logger = logging.getLogger(__name__)

INGEST_ACCEPTED = "accepted"
INGEST_SUPERSEDED_PARTIAL = "superseded_partial"
INGEST_REJECTED = "rejected"


class InlineEvaluator:
    """Runs skill evaluation synchronously inside the ingest call."""

    def submit(self, run, *args):
        run(*args)

    def shutdown(self):
        pass


class ThreadedEvaluator:
    """Runs skill evaluation on a worker pool; completions may arrive out
    of order and are re-sequenced by the engine."""

    def __init__(self, max_workers: int = 4):
        self._pool = ThreadPoolExecutor(max_workers=max_workers)

    def submit(self, run, *args):
        self._pool.submit(run, *args)

    def shutdown(self):
        self._pool.shutdown(wait=True)


class SessionEngine:
    def __init__(self, profile: JobProfile, provider: Provider, log: EventLog,
                 config: EngineConfig | None = None, *, session_id: str | None = None,
                 clock=time.time, event_sink=None, partial_sink=None,
                 evaluator=None, eval_drain_timeout: float = 30.0):
        if log.last_seq != 0:
            raise ValueError("engine requires a fresh event log")
        self.config = config or EngineConfig()
        self.provider = provider
        self.log = log
        self.session = create_session(profile, session_id=session_id)
        self.clock = clock
        self.event_sink = event_sink
        self.partial_sink = partial_sink
        self.evaluator = evaluator or InlineEvaluator()
        self.eval_drain_timeout = eval_drain_timeout
        self.policy = InvokePolicy(
            timeout_ms=self.config.provider.timeout_ms,
            max_retries=self.config.provider.max_retries,
        )
        self._lock = threading.RLock()
        self._cv = threading.Condition(self._lock)
        self._event_seq = 0
        self._issued: deque[int] = deque()  # basis seqs awaiting application
        self._eval_results: dict[int, tuple] = {}
        self._question_cache: dict[tuple, QuestionSuggestion] = {}

    # -- lifecycle ------------------------------------------------------------

    @property
    def session_id(self) -> str:
        return self.session.session_id

    def start(self) -> Session:
        with self._lock:
            if self.session.state != "created":
                raise WrongStateError(f"cannot start a {self.session.state} session")
            self.session.t0_ms = self._now_ms()
            self.session.state = "live"
            self._emit("session_started", {
                "session_id": self.session.session_id,
                "profile": self.session.profile.to_dict(),
                "t0_ms": self.session.t0_ms,
            })
            return self.session

    def end(self) -> Session:
        with self._cv:
            if self.session.state != "live":
                raise WrongStateError(f"cannot end a {self.session.state} session")
            self._drain_evaluations()
            self.session.state = "ended"
            self._emit("session_ended", {"last_seq": self.session.last_seq})
        if self.config.auto_summarize:
            self.summarize()
        return self.session

    def summarize(self) -> SummaryReport:
        with self._lock:
            if self.session.state != "ended":
                raise WrongStateError(
                    f"cannot summarize a {self.session.state} session"
                )
            report = build_summary(
                self.provider, self.session, generated_at=self._now_ms(),
                policy=self.policy,
            )
            self.session.summary = report
            self.session.state = "summarized"
            self._emit("summary_ready", {"report": report.to_dict()})
            return report

    # -- transcript ingestion --------------------------------------------------

    def ingest(self, segment: TranscriptSegment) -> str:
        """Feed one source segment into the session.

        Finals get the next seq, are persisted, and (for candidate speech)
        trigger skill evaluation. Partials only update the ephemeral live
        view. Structurally invalid segments are rejected, not raised.
        """
        with self._lock:
            if self.session.state != "live":
                raise SessionNotLiveError(
                    f"session is {self.session.state}, not live"
                )
            if (segment.seq is not None or segment.speaker not in SPEAKERS
                    or segment.finality not in FINALITIES
                    or not segment.text.strip()
                    or segment.t_start > segment.t_end):
                return INGEST_REJECTED

            if not segment.is_final:
                superseded = segment.speaker in self.session.partials
                self.session.partials[segment.speaker] = segment
                if self.partial_sink:
                    self.partial_sink(segment.to_dict())
                return INGEST_SUPERSEDED_PARTIAL if superseded else INGEST_ACCEPTED

            out_of_order = bool(self.session.segments) and (
                segment.t_start
                < self.session.segments[-1].t_start - self.config.out_of_order_tolerance_ms
            )
            seq = self.session.last_seq + 1
            persisted = segment.with_seq(seq)
            self.session.segments.append(persisted)
            self.session.partials.pop(segment.speaker, None)
            self._emit("segment_final", {
                "segment": persisted.to_dict(),
                "out_of_order": out_of_order,
            })
            if persisted.speaker == "candidate":
                context = build_eval_context(
                    self.session.segments, seq, self.config.eval_context_window
                )
                snapshot = _graph_snapshot(self.session.graph)
                self._issued.append(seq)
                self.evaluator.submit(
                    self._run_evaluation, persisted, context, snapshot
                )
            return INGEST_ACCEPTED

    def ingest_source(self, source) -> int:
        """Drain a TranscriptSource into the session; returns finals count."""
        count = 0
        for segment in source:
            outcome = self.ingest(segment)
            if outcome == INGEST_ACCEPTED and segment.is_final:
                count += 1
        return count

    # -- notes ------------------------------------------------------------------

    def add_note(self, text: str) -> Note:
        with self._lock:
            if self.session.state != "live":
                raise SessionNotLiveError(
                    f"session is {self.session.state}, not live"
                )
            cleaned = text.strip()
            if not cleaned:
                raise EmptyTextError("note text is empty")
            wall = self._now_ms() - self.session.t0_ms
            if self.session.notes:
                wall = max(wall, self.session.notes[-1].wall_time)
            note = Note(
                note_id=content_id(
                    "note", self.session.session_id, len(self.session.notes), cleaned
                ),
                text=cleaned,
                wall_time=max(0, wall),
                anchor_seq=self.session.last_seq or None,
            )
            self.session.notes.append(note)
            self._emit("note_added", {"note": note.to_dict()})
            return note

    # -- question suggestions -----------------------------------------------------

    def request_question(self, mode: str, target_segment_seq: int | None = None,
                         target_skill_id: str | None = None) -> QuestionSuggestion:
        with self._lock:
            if self.session.state != "live":
                raise SessionNotLiveError(
                    f"session is {self.session.state}, not live"
                )
            request = QuestionRequest(
                mode=mode,
                target_segment_seq=target_segment_seq,
                target_skill_id=target_skill_id,
            )
            request.validate()
            issued_at = self.session.last_seq
            key = request.cache_key(issued_at)
            cached = self._question_cache.get(key)
            if cached is not None:
                # Re-push so late observers see the response; folds once.
                self._emit("question_ready", {"suggestion": cached.to_dict()})
                return cached
            suggestion_id = content_id(
                "q", self.session.session_id, mode,
                target_segment_seq, target_skill_id, issued_at,
            )
            try:
                suggestion = generate_suggestion(
                    self.provider, self.session.profile, self.session.segments,
                    self.session.graph, request, issued_at, suggestion_id,
                    eval_window=self.config.eval_context_window,
                    contextual_window=self.config.contextual_window,
                    policy=self.policy,
                )
            except ProviderFailure as failure:
                self._emit("degraded", {
                    "stage": "question_gen",
                    "reason": str(failure),
                    "failure_class": failure.failure_class,
                })
                raise
            self._question_cache[key] = suggestion
            self.session.suggestions.append(suggestion)
            self._emit("question_ready", {"suggestion": suggestion.to_dict()})
            return suggestion

    # -- queries -------------------------------------------------------------------

    def coverage(self) -> list[SkillCoverage]:
        with self._lock:
            return self.session.graph.coverage()

    def canonical_json(self) -> str:
        with self._lock:
            return self.session.canonical_json()

    # -- evaluation pipeline ----------------------------------------------------------

    def _run_evaluation(self, segment: TranscriptSegment, context: list[dict],
                        graph_snapshot: KnowledgeGraph) -> None:
        try:
            delta = evaluate_segment(
                self.provider, graph_snapshot, self.session.profile,
                segment, context, self.policy,
            )
            result = ("delta", delta)
        except ProviderFailure as failure:
            result = ("failure", failure)
        self._complete_evaluation(segment.seq, result)

    def _complete_evaluation(self, basis_seq: int, result: tuple) -> None:
        """Buffer a completed evaluation; apply in issue order. A completion
        whose predecessor is still pending waits here."""
        with self._cv:
            self._eval_results[basis_seq] = result
            while self._issued and self._issued[0] in self._eval_results:
                seq = self._issued.popleft()
                self._apply_evaluation(seq, self._eval_results.pop(seq))
            self._cv.notify_all()

    def _apply_evaluation(self, basis_seq: int, result: tuple) -> None:
        kind, value = result
        if kind == "failure":
            self._emit("degraded", {
                "stage": "skill_eval",
                "reason": str(value),
                "failure_class": value.failure_class,
                "basis_seq": basis_seq,
            })
            return
        before = [c.to_dict() for c in self.session.graph.coverage()]
        self.session.graph.apply_delta(value, max_persisted_seq=self.session.last_seq)
        self._emit("graph_delta", value.to_dict())
        after = [c.to_dict() for c in self.session.graph.coverage()]
        if after != before:
            self._emit("skills_progress", {"coverage": after})

    def _drain_evaluations(self) -> None:
        deadline = time.monotonic() + self.eval_drain_timeout
        while self._issued:
            remaining = deadline - time.monotonic()
            if remaining <= 0:
                # Give up on stragglers so the session can end; record them.
                for seq in list(self._issued):
                    self._issued.remove(seq)
                    self._eval_results.pop(seq, None)
                    self._emit("degraded", {
                        "stage": "skill_eval",
                        "reason": "evaluation timed out at session end",
                        "failure_class": "timeout",
                        "basis_seq": seq,
                    })
                break
            self._cv.wait(timeout=remaining)

    # -- internals ------------------------------------------------------------------

    def _now_ms(self) -> int:
        return int(self.clock() * 1000)

    def _emit(self, kind: str, payload: dict) -> EventEnvelope:
        envelope = EventEnvelope(
            event_seq=self._event_seq + 1,
            session_id=self.session.session_id,
            kind=kind,
            at=self._now_ms(),
            payload=payload,
        )
        self.log.append(envelope)  # durability before visibility
        self._event_seq = envelope.event_seq
        if self.event_sink:
            try:
                self.event_sink(envelope)
            except Exception:
                logger.exception("event sink failed for %s", kind)
        return envelope


def _graph_snapshot(graph: KnowledgeGraph) -> KnowledgeGraph:
    clone = KnowledgeGraph(graph.profile)
    clone.evidence_nodes = dict(graph.evidence_nodes)
    clone.transcript_seqs = set(graph.transcript_seqs)
    return clone
