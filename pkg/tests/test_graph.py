import pytest
from hypothesis import given, settings, strategies as st

from interview_copilot import GraphDelta, KnowledgeGraph
from interview_copilot.errors import DanglingReferenceError
from interview_copilot.graph import (
    EvidenceNode,
    dedup_key,
    evidence_id_for,
    normalize_summary,
)


def _evidence(skill_id, seqs, summary, relevance="medium", basis=None):
    supporting = frozenset(seqs)
    basis = basis if basis is not None else max(supporting)
    return EvidenceNode(
        evidence_id=evidence_id_for(skill_id, supporting, summary),
        skill_id=skill_id,
        summary=summary,
        relevance=relevance,
        supporting_seqs=supporting,
        basis_seq=basis,
    )


def test_fresh_graph_has_skill_nodes_only(profile):
    graph = KnowledgeGraph(profile)
    assert len(graph.skill_nodes) == 5
    assert graph.evidence_nodes == {}
    assert graph.transcript_seqs == set()
    assert graph.check_invariants() == []


def test_fresh_graph_coverage_all_not_covered(profile):
    graph = KnowledgeGraph(profile)
    coverage = graph.coverage()
    # independent recomputation: zero evidence -> not_covered for every skill
    assert [c.skill_id for c in coverage] == profile.skill_ids()
    assert all(c.status == "not_covered" and c.evidence_count == 0 for c in coverage)


def test_apply_delta_creates_transcript_nodes_on_demand(profile):
    graph = KnowledgeGraph(profile)
    delta = GraphDelta(basis_seq=5, evidence=[_evidence("python", {5}, "used python")],
                       transcript_seqs=[5])
    graph.apply_delta(delta, max_persisted_seq=5)
    assert graph.transcript_seqs == {5}
    assert graph.check_invariants() == []
    # reuse, not duplicate, when a second evidence node cites seq 5
    delta2 = GraphDelta(basis_seq=5, evidence=[_evidence("sql", {5}, "used sql")],
                        transcript_seqs=[])
    graph.apply_delta(delta2, max_persisted_seq=5)
    assert graph.transcript_seqs == {5}
    assert len(graph.evidence_nodes) == 2


def test_apply_empty_delta_is_identity(profile):
    graph = KnowledgeGraph(profile)
    before = graph.export()
    graph.apply_delta(GraphDelta(basis_seq=1), max_persisted_seq=3)
    assert graph.export() == before


def test_apply_delta_idempotent(profile):
    graph_once = KnowledgeGraph(profile)
    graph_twice = KnowledgeGraph(profile)
    delta = GraphDelta(basis_seq=2, evidence=[_evidence("python", {2}, "shipped python")],
                       transcript_seqs=[2])
    graph_once.apply_delta(delta, max_persisted_seq=2)
    graph_twice.apply_delta(delta, max_persisted_seq=2)
    graph_twice.apply_delta(delta, max_persisted_seq=2)
    assert graph_once == graph_twice


def test_apply_delta_rejects_unknown_seq(profile):
    graph = KnowledgeGraph(profile)
    delta = GraphDelta(basis_seq=9, evidence=[_evidence("python", {9}, "x")],
                       transcript_seqs=[9])
    with pytest.raises(DanglingReferenceError):
        graph.apply_delta(delta, max_persisted_seq=3)


def test_apply_delta_rejects_unknown_skill(profile):
    graph = KnowledgeGraph(profile)
    delta = GraphDelta(basis_seq=1, evidence=[_evidence("welding", {1}, "x")],
                       transcript_seqs=[1])
    with pytest.raises(DanglingReferenceError):
        graph.apply_delta(delta, max_persisted_seq=1)


def test_duplicate_key_merges_keeping_higher_relevance(profile):
    graph = KnowledgeGraph(profile)
    low = _evidence("python", {1}, "Built Python tools", relevance="medium")
    high = _evidence("python", {1}, "built  PYTHON tools ", relevance="high")
    # hand-check the dedup rule: same skill, same seqs, summaries equal
    # after case-folding and whitespace normalization -> one node
    assert dedup_key("python", frozenset({1}), "Built Python tools") == \
        dedup_key("python", frozenset({1}), "built  PYTHON tools ")
    assert low.evidence_id == high.evidence_id
    graph.apply_delta(GraphDelta(basis_seq=1, evidence=[low], transcript_seqs=[1]),
                      max_persisted_seq=1)
    graph.apply_delta(GraphDelta(basis_seq=1, evidence=[high], transcript_seqs=[]),
                      max_persisted_seq=1)
    assert len(graph.evidence_nodes) == 1
    assert next(iter(graph.evidence_nodes.values())).relevance == "high"


def test_merge_never_downgrades(profile):
    graph = KnowledgeGraph(profile)
    high = _evidence("python", {1}, "same", relevance="high")
    low = _evidence("python", {1}, "same", relevance="medium")
    graph.apply_delta(GraphDelta(basis_seq=1, evidence=[high], transcript_seqs=[1]),
                      max_persisted_seq=1)
    graph.apply_delta(GraphDelta(basis_seq=1, evidence=[low], transcript_seqs=[]),
                      max_persisted_seq=1)
    assert next(iter(graph.evidence_nodes.values())).relevance == "high"


def test_coverage_statuses(profile):
    graph = KnowledgeGraph(profile)
    graph.apply_delta(
        GraphDelta(basis_seq=1, evidence=[_evidence("sql", {1}, "a", "medium")],
                   transcript_seqs=[1]),
        max_persisted_seq=1,
    )
    assert {c.skill_id: c.status for c in graph.coverage()}["sql"] == "partially_covered"
    graph.apply_delta(
        GraphDelta(basis_seq=2, evidence=[_evidence("sql", {2}, "b", "high")],
                   transcript_seqs=[2]),
        max_persisted_seq=2,
    )
    sql = {c.skill_id: c for c in graph.coverage()}["sql"]
    assert sql.status == "covered" and sql.evidence_count == 2


def test_evidence_node_invariants_enforced():
    with pytest.raises(ValueError):
        _evidence("x", {3}, "text", relevance="low")
    with pytest.raises(ValueError):
        _evidence("x", {3}, "  ", relevance="high")
    with pytest.raises(ValueError):
        EvidenceNode("e", "x", "t", "high", frozenset(), 3)
    with pytest.raises(ValueError):
        EvidenceNode("e", "x", "t", "high", frozenset({5}), 3)


def test_export_is_canonical_and_round_trips(profile):
    graph = KnowledgeGraph(profile)
    graph.apply_delta(
        GraphDelta(basis_seq=2,
                   evidence=[_evidence("python", {2}, "p"), _evidence("sql", {1}, "s", basis=2)],
                   transcript_seqs=[1, 2]),
        max_persisted_seq=2,
    )
    export = graph.export()
    assert [s["skill_id"] for s in export["skills"]] == profile.skill_ids()
    assert export["transcript_nodes"] == [1, 2]
    rebuilt = KnowledgeGraph(profile)
    rebuilt.apply_delta(
        GraphDelta(basis_seq=2,
                   evidence=[EvidenceNode.from_dict(e) for e in export["evidence"]],
                   transcript_seqs=export["transcript_nodes"]),
        max_persisted_seq=2,
    )
    assert rebuilt == graph


def test_normalize_summary():
    assert normalize_summary("  Lots\tOF   space ") == "lots of space"


# -- property tests -----------------------------------------------------------

_SKILL_IDS = ["python", "sql", "communication", "teamwork", "problem_solving"]

_delta_entries = st.lists(
    st.tuples(
        st.sampled_from(_SKILL_IDS),
        st.integers(min_value=1, max_value=12),
        st.sampled_from(["saw it in prod", "mentioned briefly", "demoed live"]),
        st.sampled_from(["high", "medium"]),
    ),
    max_size=6,
)


@settings(max_examples=120, deadline=None)
@given(st.lists(_delta_entries, min_size=1, max_size=8))
def test_invariants_hold_after_every_application(deltas_spec):
    from helpers import default_profile

    graph = KnowledgeGraph(default_profile())
    for entries in deltas_spec:
        basis = max((seq for _, seq, _, _ in entries), default=1)
        evidence = [_evidence(sk, {seq}, summary, rel, basis=basis)
                    for sk, seq, summary, rel in entries]
        merged = {}
        for node in evidence:  # later duplicates win only by relevance
            prior = merged.get(node.evidence_id)
            if prior is None or (prior.relevance, node.relevance) == ("medium", "high"):
                merged[node.evidence_id] = node
        delta = GraphDelta(basis_seq=basis, evidence=list(merged.values()),
                           transcript_seqs=sorted({s for _, s, _, _ in entries}))
        graph.apply_delta(delta, max_persisted_seq=12)
        assert graph.check_invariants() == []


@settings(max_examples=120, deadline=None)
@given(_delta_entries)
def test_coverage_is_monotone_under_evidence_addition(entries):
    from helpers import default_profile

    rank = {"not_covered": 0, "partially_covered": 1, "covered": 2}
    graph = KnowledgeGraph(default_profile())
    previous = {c.skill_id: rank[c.status] for c in graph.coverage()}
    for sk, seq, summary, rel in entries:
        node = _evidence(sk, {seq}, summary, rel)
        graph.apply_delta(GraphDelta(basis_seq=node.basis_seq, evidence=[node],
                                     transcript_seqs=sorted(node.supporting_seqs)),
                          max_persisted_seq=12)
        current = {c.skill_id: rank[c.status] for c in graph.coverage()}
        assert all(current[sid] >= previous[sid] for sid in current)
        previous = current
