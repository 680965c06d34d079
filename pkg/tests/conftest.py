import pytest

from interview_copilot import JobProfile, Skill


@pytest.fixture
def profile() -> JobProfile:
    """Software developer rubric with five skills, as a hiring team would
    configure it. Keywords feed the mock provider's lexicon."""
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
