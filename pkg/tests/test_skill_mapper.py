import json

import pytest

from interview_copilot import JobProfile, KnowledgeGraph, Skill
from interview_copilot.errors import ProviderFailure
from interview_copilot.graph import dedup_key, evidence_id_for
from interview_copilot.provider import MockProvider, Provider
from interview_copilot.skill_mapper import (
    build_eval_context,
    evaluate_segment,
    evaluate_transcript,
)
from interview_copilot.transcript import draft_segment

from helpers import default_profile, make_segments
import random


def _sequenced(speaker, text, seq, t=None):
    t = t if t is not None else seq * 1000
    return draft_segment(speaker, text, t, t + 900).with_seq(seq)


@pytest.fixture
def python_profile():
    return JobProfile(
        job_id="p", title="Dev", description="d",
        skills=(Skill("python", "Python", keywords=("python", "rest")),),
    )


def test_two_lexicon_hits_make_high_evidence(python_profile):
    # hand count: "REST" and "Python" -> 2 distinct lexicon hits -> high
    graph = KnowledgeGraph(python_profile)
    seg = _sequenced("candidate", "I built a REST service in Python for three years", 4)
    delta = evaluate_segment(MockProvider(), graph, python_profile, seg, [])
    assert len(delta.evidence) == 1
    node = delta.evidence[0]
    assert node.skill_id == "python"
    assert node.relevance == "high"
    assert node.supporting_seqs == frozenset({4})
    assert node.basis_seq == 4
    assert delta.transcript_seqs == [4]


def test_zero_hits_make_empty_delta(python_profile):
    graph = KnowledgeGraph(python_profile)
    seg = _sequenced("candidate", "I enjoy hiking in the mountains", 1)
    delta = evaluate_segment(MockProvider(), graph, python_profile, seg, [])
    assert delta.is_empty
    graph.apply_delta(delta, max_persisted_seq=1)
    assert graph.coverage()[0].status == "not_covered"


def test_duplicate_delivery_dedups_to_empty_delta(python_profile):
    graph = KnowledgeGraph(python_profile)
    seg = _sequenced("candidate", "I built a REST service in Python for three years", 4)
    first = evaluate_segment(MockProvider(), graph, python_profile, seg, [])
    graph.apply_delta(first, max_persisted_seq=4)
    # dedup oracle: recompute the key by hand and confirm the collision
    summary = first.evidence[0].summary
    key = dedup_key("python", frozenset({4}), summary)
    assert key == ("python", (4,), summary.casefold())
    assert evidence_id_for("python", frozenset({4}), summary) in graph.evidence_nodes
    second = evaluate_segment(MockProvider(), graph, python_profile, seg, [])
    assert second.is_empty


def test_coverage_changes_reported_in_delta(python_profile):
    graph = KnowledgeGraph(python_profile)
    seg = _sequenced("candidate", "I like python a lot", 2)
    delta = evaluate_segment(MockProvider(), graph, python_profile, seg, [])
    assert [c.to_dict() for c in delta.coverage_changes] == [
        {"skill_id": "python", "status": "partially_covered", "evidence_count": 1}
    ]


def test_provider_failure_propagates(python_profile):
    class _Down(Provider):
        def complete(self, request, timeout_ms, repair=None):
            raise ConnectionError("nope")

    graph = KnowledgeGraph(python_profile)
    seg = _sequenced("candidate", "text", 1)
    with pytest.raises(ProviderFailure):
        evaluate_segment(_Down(), graph, python_profile, seg, [])


def test_unknown_skill_mapping_dropped_not_fatal(python_profile, caplog):
    class _Hallucinating(Provider):
        def complete(self, request, timeout_ms, repair=None):
            return json.dumps([
                {"skill_id": "quantum", "relevance": "high", "summary": "??"},
                {"skill_id": "python", "relevance": "medium", "summary": "python work"},
            ])

    graph = KnowledgeGraph(python_profile)
    seg = _sequenced("candidate", "any", 1)
    delta = evaluate_segment(_Hallucinating(), graph, python_profile, seg, [])
    assert [e.skill_id for e in delta.evidence] == ["python"]


def test_low_relevance_discarded(python_profile):
    class _Hedger(Provider):
        def complete(self, request, timeout_ms, repair=None):
            return json.dumps([
                {"skill_id": "python", "relevance": "low", "summary": "maybe"},
            ])

    graph = KnowledgeGraph(python_profile)
    seg = _sequenced("candidate", "any", 1)
    assert evaluate_segment(_Hedger(), graph, python_profile, seg, []).is_empty


def test_rejects_non_candidate_or_unsequenced(python_profile):
    graph = KnowledgeGraph(python_profile)
    with pytest.raises(ValueError):
        evaluate_segment(MockProvider(), graph, python_profile,
                         _sequenced("interviewer", "hi", 1), [])
    with pytest.raises(ValueError):
        evaluate_segment(MockProvider(), graph, python_profile,
                         draft_segment("candidate", "hi", 0, 1), [])


def test_eval_context_window_shape():
    segments = [_sequenced("candidate" if i % 2 else "interviewer", f"line {i}", i)
                for i in range(1, 11)]
    window = build_eval_context(segments, before_seq=9, window=6)
    assert [w["seq"] for w in window] == [3, 4, 5, 6, 7, 8]
    assert window[-1]["text"] == "line 8"
    assert build_eval_context(segments, before_seq=1, window=6) == []


def test_incremental_equals_batch_on_scripted_dialogue():
    profile = default_profile()
    provider = MockProvider()
    rng = random.Random(7)
    drafts = make_segments(rng, 40)
    sequenced = [d.with_seq(i + 1) for i, d in enumerate(drafts)]

    incremental = KnowledgeGraph(profile)
    for seg in sequenced:
        if seg.speaker != "candidate":
            continue
        context = build_eval_context(sequenced[:seg.seq], seg.seq, 6)
        delta = evaluate_segment(provider, incremental, profile, seg, context)
        incremental.apply_delta(delta, max_persisted_seq=seg.seq)

    batch = evaluate_transcript(provider, profile, sequenced, window=6)
    assert incremental.canonical_json() == batch.canonical_json()
    assert batch.check_invariants() == []


def test_evidence_only_from_candidate_finals():
    profile = default_profile()
    provider = MockProvider()
    segments = [
        _sequenced("interviewer", "We use python and sql heavily here.", 1),
        _sequenced("candidate", "I wrote python scripts daily.", 2),
    ]
    graph = evaluate_transcript(provider, profile, segments)
    assert all(
        seq == 2 for e in graph.evidence_nodes.values() for seq in e.supporting_seqs
    )
