"""HTTP adapter for a chat-completions-style endpoint.

Configured entirely by environment/settings (base URL, model name, key);
prompt templates live in the assets directory. Swapping this in for the
mock changes response content and latency, never types or control flow.
"""

from __future__ import annotations

import json

import httpx

from ..errors import ProviderFailure
from .base import Provider, ProviderRequest, load_template


def _render_lines(items, fmt) -> str:
    return "\n".join(fmt(i) for i in items) or "(none)"


def _render_context(segments: list[dict]) -> str:
    return _render_lines(segments, lambda s: f"[{s.get('seq', '?')}] {s['speaker']}: {s['text']}")


def build_prompt(request: ProviderRequest) -> str:
    """Render the agent's template from the request context."""
    ctx = request.context
    if request.agent == "skill_eval":
        return load_template("skill_eval").format(
            skills=_render_lines(
                ctx["skills"],
                lambda s: f"- {s['skill_id']}: {s['name']}" + (
                    f" ({s['description']})" if s.get("description") else ""
                ),
            ),
            context=_render_context(ctx.get("context", [])),
            seq=ctx["segment"]["seq"],
            text=ctx["segment"]["text"],
        )
    if request.agent == "question_gen":
        mode = ctx["mode"]
        if mode == "deep":
            return load_template("question_deep").format(
                context=_render_context(ctx.get("context", [])),
                seq=ctx["segment"]["seq"],
                text=ctx["segment"]["text"],
            )
        if mode == "targeted":
            return load_template("question_targeted").format(
                skill=f"{ctx['skill']['name']}: {ctx['skill'].get('description', '')}",
                evidence=_render_lines(
                    ctx.get("evidence", []),
                    lambda e: f"- ({e['relevance']}) {e['summary']}",
                ),
                context=_render_context(ctx.get("context", [])),
            )
        return load_template("question_contextual").format(
            context=_render_context(ctx.get("context", [])),
            coverage=_render_lines(
                ctx.get("coverage", []),
                lambda c: f"- {c['name']}: {c['status']}",
            ),
        )
    # summarize
    if ctx.get("kind") == "overall":
        return load_template("summary_overall").format(
            coverage=_render_lines(
                ctx.get("coverage", []),
                lambda c: f"- {c['name']}: {c['status']} ({c['evidence_count']} evidence)",
            ),
            notes=_render_lines(
                ctx.get("notes", []),
                lambda n: f"- {n['text']} (anchor: {n.get('anchor_seq')})",
            ),
            stats=json.dumps(ctx.get("stats", {})),
        )
    return load_template("summary_section").format(
        skill=f"{ctx['skill']['name']}: {ctx['skill'].get('description', '')}",
        evidence=_render_lines(
            ctx.get("evidence", []),
            lambda e: f"- ({e['relevance']}) {e['summary']}",
        ),
        segments=_render_context(ctx.get("segments", [])),
        notes=_render_lines(
            ctx.get("notes", []),
            lambda n: f"- {n['text']} (anchor: {n.get('anchor_seq')})",
        ),
    )


class HttpProvider(Provider):
    kind = "http"

    def __init__(self, api_base: str, api_key: str = "", model_name: str = "",
                 transport: httpx.BaseTransport | None = None):
        if not api_base:
            raise ValueError("http provider requires an api base URL")
        self.api_base = api_base.rstrip("/")
        self.api_key = api_key
        self.model_name = model_name
        self._client = httpx.Client(transport=transport)

    def complete(self, request: ProviderRequest, timeout_ms: int,
                 repair: str | None = None) -> str:
        prompt = build_prompt(request)
        if repair:
            prompt = f"{prompt}\n\n{repair}"
        headers = {"Content-Type": "application/json"}
        if self.api_key:
            headers["Authorization"] = f"Bearer {self.api_key}"
        body = {
            "model": self.model_name,
            "messages": [{"role": "user", "content": prompt}],
            "temperature": 0,
        }
        try:
            resp = self._client.post(
                f"{self.api_base}/chat/completions",
                json=body,
                headers=headers,
                timeout=timeout_ms / 1000.0,
            )
            resp.raise_for_status()
            payload = resp.json()
            return payload["choices"][0]["message"]["content"]
        except httpx.TimeoutException as exc:
            raise ProviderFailure("timeout", str(exc)) from exc
        except (httpx.HTTPError, KeyError, IndexError, ValueError) as exc:
            raise ProviderFailure("transport", str(exc)) from exc

    def close(self):
        self._client.close()
