"""Deterministic scripted-session machinery shared by unit and acceptance
tests. Everything is driven by a seeded RNG and the mock provider, so any
scripted session replays byte-for-byte."""

from __future__ import annotations

import json
import random
from pathlib import Path

from interview_copilot import (
    EngineConfig,
    EventLog,
    JobProfile,
    SessionEngine,
    Skill,
)
from interview_copilot.provider import MockProvider
from interview_copilot.transcript import draft_segment

# Candidate lines chosen to exercise the mock lexicon: zero, one, and two+
# distinct hits per skill, sometimes touching several skills at once.
CANDIDATE_LINES = [
    "I wrote python scripts to automate reporting.",
    "I built django apps in python for three years.",
    "I tuned sql queries against a large postgres database.",
    "I used sql once for a small project.",
    "Our team practiced pairing and collaboration every sprint.",
    "I presented the migration plan to stakeholders and explained the tradeoffs.",
    "Debugging the outage meant troubleshooting until we found the root cause.",
    "I enjoy hiking and landscape photography on weekends.",
    "My previous role was mostly operational support work.",
    "I led the migration project for the data team last year.",
    "Collaboration with the platform team unblocked our python rollout.",
    "We kept the database schema simple on purpose.",
]

INTERVIEWER_LINES = [
    "Tell me about your recent work.",
    "What was your role in that project?",
    "How did you handle disagreements?",
    "Can you walk me through a hard bug?",
    "What would you do differently today?",
]

NOTE_TEXTS = [
    "strong python", "check sql depth", "good communicator",
    "team player", "ask about debugging",
]


def default_profile() -> JobProfile:
    return JobProfile(
        job_id="swdev-01",
        title="Software Developer",
        description="Designs, builds, and operates backend services.",
        skills=(
            Skill("python", "Python", "Core language proficiency",
                  keywords=("python", "django", "flask")),
            Skill("sql", "SQL", "Relational data modeling and querying",
                  keywords=("sql", "database", "postgres")),
            Skill("communication", "Communication", "Explains technical work clearly",
                  keywords=("presented", "stakeholders", "explained")),
            Skill("teamwork", "Teamwork", "Works well in delivery teams",
                  keywords=("team", "collaboration", "pairing")),
            Skill("problem_solving", "Problem Solving", "Debugs and resolves issues",
                  keywords=("debugging", "troubleshooting", "root cause")),
        ),
    )


def make_segments(rng: random.Random, n: int) -> list:
    """Alternating-ish dialogue with monotone timestamps."""
    segments = []
    t = 0
    for _ in range(n):
        if rng.random() < 0.4:
            speaker, text = "interviewer", rng.choice(INTERVIEWER_LINES)
        else:
            speaker, text = "candidate", rng.choice(CANDIDATE_LINES)
        dur = rng.randint(1500, 6000)
        segments.append(draft_segment(speaker, text, t, t + dur))
        t += dur + rng.randint(100, 800)
    return segments


def write_replay_file(path: Path, segments) -> Path:
    with path.open("w", encoding="utf-8") as fh:
        for seg in segments:
            fh.write(json.dumps({
                "speaker": seg.speaker, "text": seg.text,
                "t_start": seg.t_start, "t_end": seg.t_end,
            }) + "\n")
    return path


def drive_scripted_session(tmp_dir: Path, seed: int, n_segments: int = 30, *,
                           profile: JobProfile | None = None, provider=None,
                           with_notes: bool = True, with_questions: bool = False,
                           event_sink=None, engine_hook=None,
                           end: bool = True) -> SessionEngine:
    """Run a full scripted session through the engine and return it.

    ``engine_hook`` receives the engine after construction but before any
    event is emitted, so sinks can bind to it.
    """
    rng = random.Random(seed)
    profile = profile or default_profile()
    provider = provider or MockProvider()
    log = EventLog(tmp_dir / f"scripted-{seed}.events.jsonl")
    engine = SessionEngine(
        profile, provider, log, EngineConfig(),
        session_id=f"scripted-{seed}", event_sink=event_sink,
    )
    if engine_hook is not None:
        engine_hook(engine)
    engine.start()
    for segment in make_segments(rng, n_segments):
        engine.ingest(segment)
        if with_notes and rng.random() < 0.12:
            engine.add_note(rng.choice(NOTE_TEXTS))
        if with_questions and rng.random() < 0.10 and engine.session.last_seq:
            mode = rng.choice(["deep", "contextual", "targeted"])
            try:
                if mode == "deep":
                    engine.request_question(
                        "deep",
                        target_segment_seq=rng.randint(1, engine.session.last_seq),
                    )
                elif mode == "targeted":
                    engine.request_question(
                        "targeted",
                        target_skill_id=rng.choice(profile.skill_ids()),
                    )
                else:
                    engine.request_question("contextual")
            except Exception:
                pass  # provider faults are fine in degraded-mode runs
    if end:
        engine.end()
    return engine
