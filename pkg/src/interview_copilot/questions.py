"""Question suggestion in three interviewer-initiated modes.

deep: a STAR-structured follow-up on one chosen transcript segment.
contextual: a high-level direction drawn from recent dialogue and coverage.
targeted: a question aimed at one chosen profile skill.

Suggestions are generated only on explicit request, one per request.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import (
    InvalidRequestError,
    ProviderFailure,
    UnknownSegmentError,
    UnknownSkillError,
)
from .graph import KnowledgeGraph
from .profile import JobProfile
from .provider import InvokePolicy, Provider, ProviderRequest
from .skill_mapper import build_eval_context
from .transcript import TranscriptSegment

MODES = ("deep", "contextual", "targeted")
STAR = ("Situation", "Task", "Action", "Result")


@dataclass(frozen=True)
class QuestionRequest:
    mode: str
    target_segment_seq: int | None = None
    target_skill_id: str | None = None

    def validate(self) -> None:
        """Exactly the mode-required target must be present."""
        if self.mode not in MODES:
            raise InvalidRequestError(f"unknown question mode {self.mode!r}")
        if self.mode == "deep":
            if self.target_segment_seq is None or self.target_skill_id is not None:
                raise InvalidRequestError("deep mode takes exactly target_segment_seq")
        elif self.mode == "targeted":
            if self.target_skill_id is None or self.target_segment_seq is not None:
                raise InvalidRequestError("targeted mode takes exactly target_skill_id")
        else:
            if self.target_segment_seq is not None or self.target_skill_id is not None:
                raise InvalidRequestError("contextual mode takes no target")

    def cache_key(self, issued_at_seq: int) -> tuple:
        return (self.mode, self.target_segment_seq, self.target_skill_id, issued_at_seq)


@dataclass(frozen=True)
class QuestionSuggestion:
    suggestion_id: str
    mode: str
    text: str
    rationale: str
    star_tags: tuple[str, ...] = ()
    target_skill_id: str | None = None
    provenance_seqs: tuple[int, ...] = ()
    issued_at_seq: int = 0

    def __post_init__(self):
        if not self.text.strip():
            raise ValueError("suggestion text must be non-empty")
        if self.mode == "deep":
            if not self.star_tags or not set(self.star_tags) <= set(STAR):
                raise ValueError("deep suggestions need non-empty STAR tags")
        elif self.star_tags:
            raise ValueError("only deep suggestions carry STAR tags")
        if (self.mode == "targeted") != (self.target_skill_id is not None):
            raise ValueError("target_skill_id present iff mode is targeted")
        if any(seq > self.issued_at_seq for seq in self.provenance_seqs):
            raise ValueError("provenance seqs must not exceed issued_at_seq")

    def to_dict(self) -> dict:
        return {
            "suggestion_id": self.suggestion_id,
            "mode": self.mode,
            "text": self.text,
            "rationale": self.rationale,
            "star_tags": list(self.star_tags),
            "target_skill_id": self.target_skill_id,
            "provenance_seqs": list(self.provenance_seqs),
            "issued_at_seq": self.issued_at_seq,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "QuestionSuggestion":
        return cls(
            suggestion_id=d["suggestion_id"],
            mode=d["mode"],
            text=d["text"],
            rationale=d.get("rationale", ""),
            star_tags=tuple(d.get("star_tags", [])),
            target_skill_id=d.get("target_skill_id"),
            provenance_seqs=tuple(d.get("provenance_seqs", [])),
            issued_at_seq=d.get("issued_at_seq", 0),
        )


def generate_suggestion(provider: Provider, profile: JobProfile,
                        segments: list[TranscriptSegment], graph: KnowledgeGraph,
                        request: QuestionRequest, issued_at_seq: int,
                        suggestion_id: str, eval_window: int = 6,
                        contextual_window: int = 10,
                        policy: InvokePolicy | None = None) -> QuestionSuggestion:
    """Build mode-specific provider context, invoke the question agent, and
    assemble a suggestion satisfying the type invariants."""
    request.validate()
    context: dict
    provenance: tuple[int, ...]

    if request.mode == "deep":
        target = None
        if request.target_segment_seq is not None and 1 <= request.target_segment_seq <= len(segments):
            target = segments[request.target_segment_seq - 1]
        if target is None or not target.is_final:
            raise UnknownSegmentError(
                f"no final segment with seq {request.target_segment_seq}"
            )
        context = {
            "mode": "deep",
            "segment": {"seq": target.seq, "speaker": target.speaker, "text": target.text},
            "context": build_eval_context(segments, target.seq, eval_window),
        }
        provenance = (target.seq,)
    elif request.mode == "targeted":
        skill = profile.skill(request.target_skill_id)
        if skill is None:
            raise UnknownSkillError(f"skill {request.target_skill_id!r} not in profile")
        evidence = graph.evidence_for_skill(skill.skill_id)
        window = build_eval_context(segments, issued_at_seq + 1, eval_window)
        context = {
            "mode": "targeted",
            "skill": skill.to_dict(),
            "evidence": [e.to_dict() for e in evidence],
            "context": window,
        }
        provenance = tuple(sorted({s for e in evidence for s in e.supporting_seqs}))
    else:  # contextual
        names = {s.skill_id: s.name for s in profile.skills}
        window = build_eval_context(segments, issued_at_seq + 1, contextual_window)
        context = {
            "mode": "contextual",
            "coverage": [
                {"skill_id": c.skill_id, "name": names[c.skill_id], "status": c.status}
                for c in graph.coverage()
            ],
            "context": window,
        }
        provenance = tuple(s["seq"] for s in window)

    response = provider.invoke(ProviderRequest(agent="question_gen", context=context), policy)
    parsed = response.parsed

    if request.mode == "deep":
        tags = tuple(t for t in parsed.get("star_tags", []) if t in STAR)
        if not tags:
            raise ProviderFailure("malformed-output", "deep question missing star_tags")
    else:
        tags = ()

    return QuestionSuggestion(
        suggestion_id=suggestion_id,
        mode=request.mode,
        text=parsed["text"],
        rationale=parsed.get("rationale", ""),
        star_tags=tags,
        target_skill_id=request.target_skill_id,
        provenance_seqs=provenance,
        issued_at_seq=issued_at_seq,
    )
