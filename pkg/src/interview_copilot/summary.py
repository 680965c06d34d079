"""Post-interview summary report: synthesis of notes, transcript, and the
skill-evidence graph.

The report's structure (sections, citations, notes digest, stats) is
computed by the engine and is trustworthy regardless of model quality; only
the narrative prose comes from the provider, and every narrative falls back
to concatenated evidence summaries when the provider fails.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from datetime import datetime, timezone
from typing import TYPE_CHECKING

from .errors import ProviderFailure
from .provider import InvokePolicy, Provider, ProviderRequest

if TYPE_CHECKING:  # pragma: no cover
    from .session import Session


@dataclass(frozen=True)
class SkillSection:
    skill_id: str
    skill_name: str
    status: str
    narrative: str
    # (evidence_id, sorted supporting seqs) pairs, resolvable against state.
    evidence_citations: tuple[tuple[str, tuple[int, ...]], ...] = ()

    def to_dict(self) -> dict:
        return {
            "skill_id": self.skill_id,
            "skill_name": self.skill_name,
            "status": self.status,
            "narrative": self.narrative,
            "evidence_citations": [
                {"evidence_id": eid, "supporting_seqs": list(seqs)}
                for eid, seqs in self.evidence_citations
            ],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SkillSection":
        return cls(
            skill_id=d["skill_id"],
            skill_name=d.get("skill_name", d["skill_id"]),
            status=d["status"],
            narrative=d["narrative"],
            evidence_citations=tuple(
                (c["evidence_id"], tuple(c["supporting_seqs"]))
                for c in d.get("evidence_citations", [])
            ),
        )


@dataclass(frozen=True)
class SummaryReport:
    session_id: str
    generated_at: int  # ms since epoch
    skill_sections: tuple[SkillSection, ...]
    notes_digest: tuple[tuple[str, int | None], ...]  # (text, anchor_seq)
    overall: str
    stats: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "session_id": self.session_id,
            "generated_at": self.generated_at,
            "skill_sections": [s.to_dict() for s in self.skill_sections],
            "notes_digest": [
                {"text": text, "anchor_seq": anchor} for text, anchor in self.notes_digest
            ],
            "overall": self.overall,
            "stats": dict(self.stats),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SummaryReport":
        return cls(
            session_id=d["session_id"],
            generated_at=d["generated_at"],
            skill_sections=tuple(SkillSection.from_dict(s) for s in d["skill_sections"]),
            notes_digest=tuple(
                (n["text"], n.get("anchor_seq")) for n in d.get("notes_digest", [])
            ),
            overall=d["overall"],
            stats=dict(d.get("stats", {})),
        )

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, SummaryReport):
            return NotImplemented
        return self.to_dict() == other.to_dict()


def fallback_narrative(summaries: list[str]) -> str:
    """Deterministic stand-in when the provider fails: the evidence
    summaries, concatenated."""
    return "; ".join(summaries) if summaries else "No evidence recorded."


def build_summary(provider: Provider, session: "Session", generated_at: int,
                  policy: InvokePolicy | None = None) -> SummaryReport:
    """Assemble the report for an ended session.

    One provider call per skill section plus one for the overall paragraph;
    structural fields never depend on the provider.
    """
    graph = session.graph
    notes_payload = [
        {"text": n.text, "anchor_seq": n.anchor_seq} for n in session.notes
    ]
    seg_text = {s.seq: s.text for s in session.segments}

    sections = []
    for skill in session.profile.skills:
        evidence = graph.evidence_for_skill(skill.skill_id)
        citations = tuple(
            (e.evidence_id, tuple(sorted(e.supporting_seqs))) for e in evidence
        )
        cited_seqs = sorted({s for e in evidence for s in e.supporting_seqs})
        context = {
            "kind": "skill_section",
            "skill": skill.to_dict(),
            "evidence": [e.to_dict() for e in evidence],
            "segments": [
                {"seq": q, "speaker": "candidate", "text": seg_text.get(q, "")}
                for q in cited_seqs
            ],
            "notes": notes_payload,
        }
        try:
            response = provider.invoke(
                ProviderRequest(agent="summarize", context=context), policy
            )
            narrative = response.parsed["narrative"]
        except ProviderFailure:
            narrative = fallback_narrative([e.summary for e in evidence])
        status = next(
            c.status for c in graph.coverage() if c.skill_id == skill.skill_id
        )
        sections.append(
            SkillSection(
                skill_id=skill.skill_id,
                skill_name=skill.name,
                status=status,
                narrative=narrative,
                evidence_citations=citations,
            )
        )

    coverage = graph.coverage()
    stats = {
        "segment_count": len(session.segments),
        "evidence_count": len(graph.evidence_nodes),
        "covered_count": sum(1 for c in coverage if c.status == "covered"),
    }
    names = {s.skill_id: s.name for s in session.profile.skills}
    overall_context = {
        "kind": "overall",
        "coverage": [
            {"skill_id": c.skill_id, "name": names[c.skill_id],
             "status": c.status, "evidence_count": c.evidence_count}
            for c in coverage
        ],
        "notes": notes_payload,
        "stats": stats,
    }
    try:
        response = provider.invoke(
            ProviderRequest(agent="summarize", context=overall_context), policy
        )
        overall = response.parsed["narrative"]
    except ProviderFailure:
        overall = fallback_narrative(
            [e.summary for e in sorted(graph.evidence_nodes.values(),
                                       key=lambda e: (e.basis_seq, e.evidence_id))]
        )

    return SummaryReport(
        session_id=session.session_id,
        generated_at=generated_at,
        skill_sections=tuple(sections),
        notes_digest=tuple((n.text, n.anchor_seq) for n in session.notes),
        overall=overall,
        stats=stats,
    )


def render_summary(report: SummaryReport, format: str = "json") -> bytes:
    """Render a report. JSON is the canonical serialization (stable key
    order); markdown carries one heading per skill section in order, a
    notes section, and the overall paragraph."""
    if format == "json":
        return (
            json.dumps(report.to_dict(), sort_keys=True, indent=2) + "\n"
        ).encode("utf-8")
    if format != "markdown":
        raise ValueError(f"unknown summary format {format!r}")

    ts = datetime.fromtimestamp(report.generated_at / 1000, tz=timezone.utc)
    stats = report.stats
    lines = [
        "# Interview Summary Report",
        "",
        f"- Session: `{report.session_id}`",
        f"- Generated: {ts.isoformat()}",
        f"- Segments: {stats.get('segment_count', 0)} | "
        f"Evidence: {stats.get('evidence_count', 0)} | "
        f"Skills covered: {stats.get('covered_count', 0)}/{len(report.skill_sections)}",
        "",
    ]
    for section in report.skill_sections:
        lines.append(f"## {section.skill_name} ({section.status.replace('_', ' ')})")
        lines.append("")
        lines.append(section.narrative)
        if section.evidence_citations:
            lines.append("")
            lines.append("Evidence:")
            for eid, seqs in section.evidence_citations:
                seq_list = ", ".join(str(s) for s in seqs)
                lines.append(f"- `{eid}` (segments {seq_list})")
        lines.append("")
    lines.append("## Notes")
    lines.append("")
    if report.notes_digest:
        for text, anchor in report.notes_digest:
            suffix = f" (at segment {anchor})" if anchor is not None else ""
            lines.append(f"- {text}{suffix}")
    else:
        lines.append("(no notes)")
    lines.append("")
    lines.append("## Overall")
    lines.append("")
    lines.append(report.overall)
    lines.append("")
    return "\n".join(lines).encode("utf-8")
