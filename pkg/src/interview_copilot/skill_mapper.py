"""Incremental skill-evidence mapping over finalized candidate segments.

Each final candidate segment is evaluated by the provider's structured
extraction agent against the profile skills plus a recent-dialogue window;
validated mappings become evidence nodes, deduplicated against the graph by
(skill, cited segments, normalized summary). Evaluating segments one at a
time or the whole transcript in one pass produces the same graph.
"""

from __future__ import annotations

import logging

from .errors import ProviderFailure
from .graph import (
    RELEVANCE_LEVELS,
    EvidenceNode,
    GraphDelta,
    KnowledgeGraph,
    _RELEVANCE_RANK,
    evidence_id_for,
)
from .profile import JobProfile
from .provider import InvokePolicy, Provider, ProviderRequest
from .transcript import TranscriptSegment

logger = logging.getLogger(__name__)


def build_eval_context(segments: list[TranscriptSegment], before_seq: int,
                       window: int) -> list[dict]:
    """The last ``window`` finalized segments (both speakers) preceding
    ``before_seq``, shaped for the provider payload."""
    prior = [s for s in segments if s.seq is not None and s.seq < before_seq]
    return [
        {"seq": s.seq, "speaker": s.speaker, "text": s.text} for s in prior[-window:]
    ]


def evaluate_segment(provider: Provider, graph: KnowledgeGraph, profile: JobProfile,
                     segment: TranscriptSegment, context: list[dict],
                     policy: InvokePolicy | None = None) -> GraphDelta:
    """Map one final candidate segment to evidence.

    Returns a delta that leaves the graph invariant-clean when applied.
    Mappings to unknown skills are dropped and logged; relevance below
    medium is discarded. Raises ProviderFailure so the caller can degrade
    (the session continues with an empty delta).
    """
    if not segment.is_final or segment.seq is None:
        raise ValueError("evaluate_segment requires a persisted final segment")
    if segment.speaker != "candidate":
        raise ValueError("only candidate segments are evaluated for evidence")

    request = ProviderRequest(
        agent="skill_eval",
        context={
            "skills": [s.to_dict() for s in profile.skills],
            "segment": {
                "seq": segment.seq,
                "speaker": segment.speaker,
                "text": segment.text,
                "t_start": segment.t_start,
                "t_end": segment.t_end,
            },
            "context": context,
        },
    )
    response = provider.invoke(request, policy)

    staged: dict[str, EvidenceNode] = {}
    for mapping in response.parsed:
        if mapping["relevance"] not in RELEVANCE_LEVELS:
            continue
        skill_id = mapping["skill_id"]
        if graph.skill_nodes.get(skill_id) is None:
            logger.warning(
                "provider mapped unknown skill %r at seq %d; dropped",
                skill_id, segment.seq,
            )
            continue
        supporting = frozenset({segment.seq})
        node = EvidenceNode(
            evidence_id=evidence_id_for(skill_id, supporting, mapping["summary"]),
            skill_id=skill_id,
            summary=mapping["summary"],
            relevance=mapping["relevance"],
            supporting_seqs=supporting,
            basis_seq=segment.seq,
        )
        prior = staged.get(node.evidence_id)
        if prior is None or _RELEVANCE_RANK[node.relevance] > _RELEVANCE_RANK[prior.relevance]:
            staged[node.evidence_id] = node

    # Dedup against the graph: keep only new nodes and relevance upgrades.
    evidence = []
    for node in staged.values():
        existing = graph.find_duplicate(node)
        if existing is None:
            evidence.append(node)
        elif _RELEVANCE_RANK[node.relevance] > _RELEVANCE_RANK[existing.relevance]:
            evidence.append(node)
    evidence.sort(key=lambda e: (e.skill_id, e.evidence_id))

    new_seqs = sorted(
        {seq for node in evidence for seq in node.supporting_seqs} - graph.transcript_seqs
    )
    delta = GraphDelta(
        basis_seq=segment.seq, evidence=evidence, transcript_seqs=new_seqs
    )
    if not delta.is_empty:
        before = {c.skill_id: c for c in graph.coverage()}
        preview = _copy_graph(graph)
        preview.apply_delta(delta, max_persisted_seq=segment.seq)
        delta.coverage_changes = [
            c for c in preview.coverage() if c != before[c.skill_id]
        ]
    return delta


def evaluate_transcript(provider: Provider, profile: JobProfile,
                        segments: list[TranscriptSegment], window: int = 6,
                        policy: InvokePolicy | None = None,
                        graph: KnowledgeGraph | None = None) -> KnowledgeGraph:
    """Whole-transcript evaluation: the same per-segment provider calls as
    the incremental path, folded into one graph. Provider failures on a
    segment contribute nothing, matching live degraded behavior."""
    graph = graph if graph is not None else KnowledgeGraph(profile)
    finals = [s for s in segments if s.seq is not None and s.is_final]
    for seg in finals:
        if seg.speaker != "candidate":
            continue
        context = build_eval_context(finals, seg.seq, window)
        try:
            delta = evaluate_segment(provider, graph, profile, seg, context, policy)
        except ProviderFailure:
            continue
        graph.apply_delta(delta, max_persisted_seq=seg.seq)
    return graph


def _copy_graph(graph: KnowledgeGraph) -> KnowledgeGraph:
    clone = KnowledgeGraph(graph.profile)
    clone.evidence_nodes = dict(graph.evidence_nodes)
    clone.transcript_seqs = set(graph.transcript_seqs)
    return clone
