"""Uniform model-provider boundary for the three agents.

Every response is parsed and validated against a versioned output schema
before it crosses this boundary; nothing schema-invalid reaches callers.
Parse failures are retried with a repair instruction appended; exhaustion,
timeouts, and transport errors surface as ProviderFailure with a failure
class the caller can degrade on.
"""

from __future__ import annotations

import json
import logging
import re
import time
from dataclasses import dataclass, field
from importlib import resources
from typing import Any

import jsonschema

from ..errors import ProviderFailure

logger = logging.getLogger(__name__)

AGENTS = ("skill_eval", "question_gen", "summarize")

# Agent -> output schema document shipped with the package.
AGENT_SCHEMA_IDS = {
    "skill_eval": "skill_eval.v1",
    "question_gen": "question.v1",
    "summarize": "summary.v1",
}

REPAIR_INSTRUCTION = (
    "Your previous reply was not valid JSON for the required schema. "
    "Reply again with only the corrected JSON document and nothing else."
)

_FENCE_RE = re.compile(r"^```[a-zA-Z]*\n(.*)\n```\s*$", re.DOTALL)


def _load_asset(name: str) -> str:
    return resources.files("interview_copilot.provider.assets").joinpath(name).read_text(
        encoding="utf-8"
    )


def load_schema(schema_id: str) -> dict:
    return json.loads(_load_asset(f"{schema_id}.json"))


def load_template(name: str) -> str:
    return _load_asset(f"{name}.txt")


_SCHEMA_CACHE: dict[str, dict] = {}


def _schema(schema_id: str) -> dict:
    if schema_id not in _SCHEMA_CACHE:
        _SCHEMA_CACHE[schema_id] = load_schema(schema_id)
    return _SCHEMA_CACHE[schema_id]


@dataclass(frozen=True)
class ProviderRequest:
    agent: str  # "skill_eval" | "question_gen" | "summarize"
    context: dict
    schema_id: str = ""

    def __post_init__(self):
        if self.agent not in AGENTS:
            raise ValueError(f"unknown agent {self.agent!r}")
        if not self.schema_id:
            object.__setattr__(self, "schema_id", AGENT_SCHEMA_IDS[self.agent])


@dataclass(frozen=True)
class ProviderResponse:
    parsed: Any
    raw: str
    latency_ms: int


@dataclass(frozen=True)
class InvokePolicy:
    timeout_ms: int = 10_000
    max_retries: int = 2


def strip_code_fences(text: str) -> str:
    m = _FENCE_RE.match(text.strip())
    return m.group(1) if m else text


def parse_and_validate(raw: str, schema_id: str) -> Any:
    """The schema gate: JSON-parse the raw text and validate it.

    Raises ProviderFailure("malformed-output") on any parse or schema error.
    """
    try:
        parsed = json.loads(strip_code_fences(raw))
    except json.JSONDecodeError as exc:
        raise ProviderFailure("malformed-output", f"output is not JSON: {exc.msg}") from exc
    try:
        jsonschema.validate(parsed, _schema(schema_id))
    except jsonschema.ValidationError as exc:
        raise ProviderFailure("malformed-output", f"schema {schema_id}: {exc.message}") from exc
    return parsed


class Provider:
    """Base class: subclasses implement complete(); invoke() adds the
    parse/validate/retry policy shared by all adapters."""

    kind = "abstract"

    def complete(self, request: ProviderRequest, timeout_ms: int,
                 repair: str | None = None) -> str:
        """Return the raw model text for a request. ``repair`` carries the
        repair instruction on retry attempts."""
        raise NotImplementedError

    def invoke(self, request: ProviderRequest,
               policy: InvokePolicy | None = None) -> ProviderResponse:
        policy = policy or InvokePolicy()
        started = time.perf_counter()
        repair = None
        last_failure: ProviderFailure | None = None
        for _ in range(policy.max_retries + 1):
            try:
                raw = self.complete(request, policy.timeout_ms, repair=repair)
            except ProviderFailure:
                raise
            except TimeoutError as exc:
                raise ProviderFailure("timeout", str(exc)) from exc
            except Exception as exc:
                raise ProviderFailure("transport", str(exc)) from exc
            try:
                parsed = parse_and_validate(raw, request.schema_id)
            except ProviderFailure as failure:
                last_failure = failure
                repair = REPAIR_INSTRUCTION
                continue
            latency_ms = int((time.perf_counter() - started) * 1000)
            return ProviderResponse(parsed=parsed, raw=raw, latency_ms=latency_ms)
        logger.warning("provider output stayed malformed after retries: %s", last_failure)
        raise last_failure


def make_provider(settings) -> Provider:
    """Build a provider from ProviderSettings (mock by default)."""
    from .http import HttpProvider
    from .mock import MockProvider

    if settings.kind == "mock":
        return MockProvider()
    if settings.kind == "http":
        return HttpProvider(
            api_base=settings.api_base,
            api_key=settings.api_key,
            model_name=settings.model_name,
        )
    raise ValueError(f"unknown provider kind {settings.kind!r}")
