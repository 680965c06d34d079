"""Job profiles: the fixed skill rubric a session is created against.

The skill list is frozen at session creation; evidence accumulates against
it but skills are never added or removed mid-session, so every candidate
for the same role is assessed against the same rubric.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from .errors import InvalidProfileError


@dataclass(frozen=True)
class Skill:
    """One assessable skill. ``keywords`` feed only the mock provider's
    lexicon; real providers work from name + description."""

    skill_id: str
    name: str
    description: str = ""
    keywords: tuple[str, ...] = ()

    def to_dict(self) -> dict:
        d = {"skill_id": self.skill_id, "name": self.name}
        if self.description:
            d["description"] = self.description
        if self.keywords:
            d["keywords"] = list(self.keywords)
        return d


@dataclass(frozen=True)
class JobProfile:
    job_id: str
    title: str
    description: str
    skills: tuple[Skill, ...] = field(default_factory=tuple)

    def validate(self) -> None:
        if not self.title.strip() or not self.description.strip():
            raise InvalidProfileError("title and description must be non-empty")
        if not self.skills:
            raise InvalidProfileError("profile must declare at least one skill")
        seen: set[str] = set()
        for skill in self.skills:
            if not skill.name.strip():
                raise InvalidProfileError(f"skill {skill.skill_id!r} has an empty name")
            if skill.skill_id in seen:
                raise InvalidProfileError(f"duplicate skill_id {skill.skill_id!r}")
            seen.add(skill.skill_id)

    def skill_ids(self) -> list[str]:
        return [s.skill_id for s in self.skills]

    def skill(self, skill_id: str) -> Skill | None:
        for s in self.skills:
            if s.skill_id == skill_id:
                return s
        return None

    def to_dict(self) -> dict:
        return {
            "job_id": self.job_id,
            "title": self.title,
            "description": self.description,
            "skills": [s.to_dict() for s in self.skills],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "JobProfile":
        try:
            skills = tuple(
                Skill(
                    skill_id=str(s["skill_id"]),
                    name=str(s["name"]),
                    description=str(s.get("description", "")),
                    keywords=tuple(str(k) for k in s.get("keywords", [])),
                )
                for s in data.get("skills", [])
            )
            profile = cls(
                job_id=str(data["job_id"]),
                title=str(data["title"]),
                description=str(data["description"]),
                skills=skills,
            )
        except (KeyError, TypeError) as exc:
            raise InvalidProfileError(f"profile document malformed: {exc}") from exc
        profile.validate()
        return profile


def load_profile(path: str | Path) -> JobProfile:
    """Load and validate a JobProfile JSON document."""
    path = Path(path)
    if not path.is_file():
        raise InvalidProfileError(f"profile file not found: {path}")
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise InvalidProfileError(f"profile is not valid JSON: {exc}") from exc
    return JobProfile.from_dict(data)
