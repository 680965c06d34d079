"""Deterministic offline provider.

Stands in for the three model agents so the whole pipeline runs, replays,
and tests without a model endpoint. Every output is a pure function of the
request, produced as raw JSON text so it passes through the same schema
gate as real model output.

Skill evaluation rule: each skill's lexicon is its configured keywords plus
the case-folded tokens of its name. Distinct lexicon terms matching on word
boundaries in the segment text are counted; two or more distinct hits score
"high", exactly one scores "medium", zero yields no mapping. The evidence
summary is the minimal run of sentences spanning all matches.

Question templates:
  targeted:    "Can you describe a specific situation where you used {skill}?"
  deep:        "Regarding '{first 8 words}' — what was the situation, and
               what was the result?" with star_tags fixed at
               [Situation, Result]
  contextual:  "You have not yet covered {first not-covered skill}; consider
               asking about it." When every skill has evidence, the fallback
               points at the first partially-covered skill, and failing
               that, at depth on the first skill.
"""

from __future__ import annotations

import json
import re

from .base import Provider, ProviderRequest

STAR_TAGS_DEEP = ["Situation", "Result"]


def build_lexicon(name: str, keywords: list[str] | tuple[str, ...]) -> set[str]:
    terms = {k.casefold().strip() for k in keywords if k.strip()}
    terms.update(tok for tok in re.split(r"\W+", name.casefold()) if tok)
    return terms


def _term_spans(term: str, text: str) -> list[tuple[int, int]]:
    pattern = r"\b" + re.escape(term) + r"\b"
    return [m.span() for m in re.finditer(pattern, text, flags=re.IGNORECASE)]


def _sentence_spans(text: str) -> list[tuple[int, int]]:
    spans = []
    start = 0
    for m in re.finditer(r"[.!?]+(?:\s+|$)", text):
        spans.append((start, m.end()))
        start = m.end()
    if start < len(text):
        spans.append((start, len(text)))
    if not spans:
        spans = [(0, len(text))]
    return spans


def matched_clause(text: str, spans: list[tuple[int, int]]) -> str:
    """Minimal substring spanning all match spans, widened to the sentence
    boundaries that contain it."""
    first = min(s for s, _ in spans)
    last = max(e for _, e in spans)
    clause_start, clause_end = 0, len(text)
    for a, b in _sentence_spans(text):
        if a <= first < b:
            clause_start = a
        if a < last <= b:
            clause_end = b
    return text[clause_start:clause_end].strip()


def mock_skill_eval(skills: list[dict], text: str) -> list[dict]:
    """Score a segment against each skill's lexicon.

    ``skills`` entries carry skill_id, name, and optional keywords. Returns
    schema-shaped mappings in skill order.
    """
    mappings = []
    for skill in skills:
        lexicon = build_lexicon(skill["name"], skill.get("keywords", []))
        hit_spans: list[tuple[int, int]] = []
        distinct = 0
        for term in sorted(lexicon):
            spans = _term_spans(term, text)
            if spans:
                distinct += 1
                hit_spans.extend(spans)
        if distinct == 0:
            continue
        mappings.append(
            {
                "skill_id": skill["skill_id"],
                "relevance": "high" if distinct >= 2 else "medium",
                "summary": matched_clause(text, hit_spans),
            }
        )
    return mappings


def first_eight_words(text: str) -> str:
    return " ".join(text.split()[:8])


def mock_question(context: dict) -> dict:
    mode = context["mode"]
    if mode == "targeted":
        name = context["skill"]["name"]
        return {
            "text": f"Can you describe a specific situation where you used {name}?",
            "rationale": f"Targets the {name} requirement directly.",
        }
    if mode == "deep":
        lead = first_eight_words(context["segment"]["text"])
        return {
            "text": (
                f"Regarding '{lead}' — what was the situation, "
                "and what was the result?"
            ),
            "rationale": "Invites a STAR elaboration of the selected statement.",
            "star_tags": list(STAR_TAGS_DEEP),
        }
    # contextual
    coverage = context.get("coverage", [])
    not_covered = [c for c in coverage if c["status"] == "not_covered"]
    partial = [c for c in coverage if c["status"] == "partially_covered"]
    if not_covered:
        name = not_covered[0]["name"]
        return {
            "text": f"You have not yet covered {name}; consider asking about it.",
            "rationale": f"No evidence yet for {name}.",
        }
    if partial:
        name = partial[0]["name"]
        return {
            "text": (
                f"{name} has only medium-relevance evidence; "
                "consider probing for a concrete example."
            ),
            "rationale": f"Evidence for {name} is not yet strong.",
        }
    name = coverage[0]["name"] if coverage else "the listed skills"
    return {
        "text": f"All listed skills show evidence; consider verifying depth on {name}.",
        "rationale": "Coverage is complete; remaining value is depth.",
    }


def mock_summary(context: dict) -> dict:
    if context.get("kind") == "overall":
        coverage = context.get("coverage", [])
        covered = [c["name"] for c in coverage if c["status"] == "covered"]
        stats = context.get("stats", {})
        parts = [f"Covered {len(covered)} of {len(coverage)} skills."]
        if covered:
            parts.append("Strong evidence for: " + ", ".join(covered) + ".")
        parts.append(
            f"{len(context.get('notes', []))} interviewer note(s) recorded "
            f"across {stats.get('segment_count', 0)} transcript segments."
        )
        return {"narrative": " ".join(parts)}
    name = context["skill"]["name"]
    evidence = context.get("evidence", [])
    if not evidence:
        return {"narrative": f"No evidence for {name} was observed in this interview."}
    body = "; ".join(e["summary"] for e in evidence)
    plural = "s" if len(evidence) != 1 else ""
    return {"narrative": f"{name} is supported by {len(evidence)} evidence item{plural}: {body}."}


class MockProvider(Provider):
    kind = "mock"

    def complete(self, request: ProviderRequest, timeout_ms: int,
                 repair: str | None = None) -> str:
        ctx = request.context
        if request.agent == "skill_eval":
            out = mock_skill_eval(ctx["skills"], ctx["segment"]["text"])
        elif request.agent == "question_gen":
            out = mock_question(ctx)
        else:
            out = mock_summary(ctx)
        return json.dumps(out)
