"""Skill-evidence-transcript knowledge graph.

Three node layers: skill nodes (blue) fixed from the job profile, evidence
nodes (green = high relevance, yellow = medium) extracted from candidate
statements, and transcript nodes (grey) created on demand when evidence
first cites a segment. Edges are implicit in evidence records: each
evidence node points at exactly one skill and at least one segment.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field, replace

from .errors import DanglingReferenceError
from .ids import content_id
from .profile import JobProfile

RELEVANCE_LEVELS = ("high", "medium")
_RELEVANCE_RANK = {"medium": 1, "high": 2}

# Display categories, as rendered by clients.
SKILL_COLOR = "blue"
TRANSCRIPT_COLOR = "grey"
EVIDENCE_COLORS = {"high": "green", "medium": "yellow"}

COVERAGE_STATUSES = ("not_covered", "partially_covered", "covered")
_STATUS_RANK = {"not_covered": 0, "partially_covered": 1, "covered": 2}


def normalize_summary(text: str) -> str:
    """Case-fold and collapse whitespace; the textual half of the dedup key."""
    return re.sub(r"\s+", " ", text.strip().casefold())


def dedup_key(skill_id: str, supporting_seqs: frozenset[int], summary: str) -> tuple:
    return (skill_id, tuple(sorted(supporting_seqs)), normalize_summary(summary))


def evidence_id_for(skill_id: str, supporting_seqs: frozenset[int], summary: str) -> str:
    """Content-derived evidence id: equal dedup keys collapse to one node,
    and identical inputs reproduce identical ids across runs."""
    key = dedup_key(skill_id, supporting_seqs, summary)
    return content_id("ev", key[0], ",".join(map(str, key[1])), key[2])


@dataclass(frozen=True)
class SkillNode:
    skill_id: str
    name: str
    color: str = SKILL_COLOR


@dataclass(frozen=True)
class EvidenceNode:
    """A paraphrased piece of evidence linking one skill to the transcript.

    ``supporting_seqs`` are all <= ``basis_seq``, the highest segment seq
    incorporated when the node was produced.
    """

    evidence_id: str
    skill_id: str
    summary: str
    relevance: str  # "high" | "medium"
    supporting_seqs: frozenset[int]
    basis_seq: int

    def __post_init__(self):
        if self.relevance not in RELEVANCE_LEVELS:
            raise ValueError(f"relevance must be one of {RELEVANCE_LEVELS}")
        if not self.summary.strip():
            raise ValueError("evidence summary must be non-empty")
        if not self.supporting_seqs:
            raise ValueError("evidence must cite at least one segment")
        if any(s > self.basis_seq for s in self.supporting_seqs):
            raise ValueError("supporting seqs must not exceed basis_seq")

    @property
    def color(self) -> str:
        return EVIDENCE_COLORS[self.relevance]

    @property
    def key(self) -> tuple:
        return dedup_key(self.skill_id, self.supporting_seqs, self.summary)

    def to_dict(self) -> dict:
        return {
            "evidence_id": self.evidence_id,
            "skill_id": self.skill_id,
            "summary": self.summary,
            "relevance": self.relevance,
            "supporting_seqs": sorted(self.supporting_seqs),
            "basis_seq": self.basis_seq,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "EvidenceNode":
        return cls(
            evidence_id=d["evidence_id"],
            skill_id=d["skill_id"],
            summary=d["summary"],
            relevance=d["relevance"],
            supporting_seqs=frozenset(d["supporting_seqs"]),
            basis_seq=d["basis_seq"],
        )


@dataclass(frozen=True)
class SkillCoverage:
    skill_id: str
    status: str
    evidence_count: int

    def to_dict(self) -> dict:
        return {
            "skill_id": self.skill_id,
            "status": self.status,
            "evidence_count": self.evidence_count,
        }


def status_rank(status: str) -> int:
    return _STATUS_RANK[status]


@dataclass
class GraphDelta:
    """Additions produced by evaluating one segment.

    ``evidence`` entries whose id already exists in the target graph act as
    relevance upgrades (max of old and new); transcript nodes are created
    on demand for any newly cited seqs. Applying the same delta twice is a
    no-op the second time.
    """

    basis_seq: int
    evidence: list[EvidenceNode] = field(default_factory=list)
    transcript_seqs: list[int] = field(default_factory=list)
    coverage_changes: list[SkillCoverage] = field(default_factory=list)

    @property
    def is_empty(self) -> bool:
        return not self.evidence and not self.transcript_seqs

    def to_dict(self) -> dict:
        return {
            "basis_seq": self.basis_seq,
            "evidence": [e.to_dict() for e in self.evidence],
            "transcript_seqs": sorted(self.transcript_seqs),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "GraphDelta":
        return cls(
            basis_seq=d["basis_seq"],
            evidence=[EvidenceNode.from_dict(e) for e in d.get("evidence", [])],
            transcript_seqs=list(d.get("transcript_seqs", [])),
        )


class KnowledgeGraph:
    """Mutable per-session graph; all mutation goes through apply_delta."""

    def __init__(self, profile: JobProfile):
        self.profile = profile
        self.skill_nodes: dict[str, SkillNode] = {
            s.skill_id: SkillNode(skill_id=s.skill_id, name=s.name) for s in profile.skills
        }
        self.evidence_nodes: dict[str, EvidenceNode] = {}
        self.transcript_seqs: set[int] = set()

    # -- queries ------------------------------------------------------------

    def evidence_for_skill(self, skill_id: str) -> list[EvidenceNode]:
        nodes = [e for e in self.evidence_nodes.values() if e.skill_id == skill_id]
        nodes.sort(key=lambda e: (e.basis_seq, e.evidence_id))
        return nodes

    def max_basis_seq(self) -> int:
        return max((e.basis_seq for e in self.evidence_nodes.values()), default=0)

    def find_duplicate(self, node: EvidenceNode) -> EvidenceNode | None:
        return self.evidence_nodes.get(node.evidence_id)

    # -- mutation -----------------------------------------------------------

    def apply_delta(self, delta: GraphDelta, max_persisted_seq: int) -> "KnowledgeGraph":
        """Fold a delta into the graph. Idempotent for identical deltas.

        Raises DanglingReferenceError if the delta cites a seq that has not
        been persisted, and drops evidence mapped to unknown skills (the
        caller logged them already).
        """
        for seq in delta.transcript_seqs:
            if seq < 1 or seq > max_persisted_seq:
                raise DanglingReferenceError(f"delta cites unknown segment seq {seq}")
        for node in delta.evidence:
            if node.skill_id not in self.skill_nodes:
                raise DanglingReferenceError(f"delta cites unknown skill {node.skill_id!r}")
            for seq in node.supporting_seqs:
                if seq < 1 or seq > max_persisted_seq:
                    raise DanglingReferenceError(f"delta cites unknown segment seq {seq}")

        for node in delta.evidence:
            existing = self.evidence_nodes.get(node.evidence_id)
            if existing is not None:
                if _RELEVANCE_RANK[node.relevance] > _RELEVANCE_RANK[existing.relevance]:
                    self.evidence_nodes[node.evidence_id] = replace(
                        existing, relevance=node.relevance
                    )
            else:
                self.evidence_nodes[node.evidence_id] = node
            self.transcript_seqs.update(node.supporting_seqs)
        self.transcript_seqs.update(delta.transcript_seqs)
        return self

    # -- coverage -----------------------------------------------------------

    def coverage(self) -> list[SkillCoverage]:
        """Per-skill progress, in profile order. Pure function of the graph:
        no evidence -> not_covered; some but no high -> partially_covered;
        any high -> covered."""
        out = []
        for skill in self.profile.skills:
            nodes = [e for e in self.evidence_nodes.values() if e.skill_id == skill.skill_id]
            if not nodes:
                status = "not_covered"
            elif any(e.relevance == "high" for e in nodes):
                status = "covered"
            else:
                status = "partially_covered"
            out.append(SkillCoverage(skill_id=skill.skill_id, status=status,
                                     evidence_count=len(nodes)))
        return out

    # -- invariants ---------------------------------------------------------

    def check_invariants(self) -> list[str]:
        """Return a list of violated invariants (empty means healthy)."""
        problems = []
        profile_ids = set(self.profile.skill_ids())
        if set(self.skill_nodes) != profile_ids:
            problems.append("skill nodes differ from profile skill set")
        cited: set[int] = set()
        for ev in self.evidence_nodes.values():
            if ev.skill_id not in self.skill_nodes:
                problems.append(f"evidence {ev.evidence_id} has a dangling skill edge")
            if not ev.supporting_seqs:
                problems.append(f"evidence {ev.evidence_id} has no transcript edge")
            if ev.relevance not in RELEVANCE_LEVELS:
                problems.append(f"evidence {ev.evidence_id} has invalid relevance")
            missing = ev.supporting_seqs - self.transcript_seqs
            if missing:
                problems.append(
                    f"evidence {ev.evidence_id} cites absent transcript nodes {sorted(missing)}"
                )
            cited.update(ev.supporting_seqs)
        orphans = self.transcript_seqs - cited
        if orphans:
            problems.append(f"transcript nodes {sorted(orphans)} are cited by no evidence")
        return problems

    # -- serialization ------------------------------------------------------

    def export(self) -> dict:
        """Canonical export: skills in profile order, evidence sorted by
        (skill_id, evidence_id), transcript seqs ascending. Edges are
        implicit in the evidence records."""
        return {
            "skills": [
                {"skill_id": s.skill_id, "name": s.name} for s in self.profile.skills
            ],
            "evidence": [
                e.to_dict()
                for e in sorted(
                    self.evidence_nodes.values(), key=lambda e: (e.skill_id, e.evidence_id)
                )
            ],
            "transcript_nodes": sorted(self.transcript_seqs),
        }

    def canonical_json(self) -> str:
        return json.dumps(self.export(), sort_keys=True, separators=(",", ":"))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, KnowledgeGraph):
            return NotImplemented
        return self.export() == other.export()
