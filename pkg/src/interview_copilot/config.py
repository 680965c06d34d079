"""Engine and gateway configuration dataclasses.

Resolution order everywhere: explicit flags > environment > defaults.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field


@dataclass
class ProviderSettings:
    """Model provider selection and HTTP endpoint configuration."""

    kind: str = "mock"  # "mock" | "http"
    api_base: str = ""
    api_key: str = ""
    model_name: str = ""
    timeout_ms: int = 10_000
    max_retries: int = 2

    @classmethod
    def from_env(cls, env: dict[str, str] | None = None) -> "ProviderSettings":
        env = os.environ if env is None else env
        return cls(
            kind=env.get("MODEL_PROVIDER", "mock"),
            api_base=env.get("MODEL_API_BASE", ""),
            api_key=env.get("MODEL_API_KEY", ""),
            model_name=env.get("MODEL_NAME", ""),
        )


@dataclass
class EngineConfig:
    """Tunables for the per-session engine."""

    # Dialogue context handed to the skill-evaluation agent: the last N
    # finalized segments (both speakers) before the segment under evaluation.
    eval_context_window: int = 6
    # Finalized segments handed to contextual question generation.
    contextual_window: int = 10
    # A final whose t_start precedes the previous final's t_start by more
    # than this is flagged out-of-order (still accepted).
    out_of_order_tolerance_ms: int = 2000
    # Evaluate every candidate final immediately (no batching).
    eval_batch_size: int = 1
    # Generate the summary automatically when a session ends.
    auto_summarize: bool = True
    provider: ProviderSettings = field(default_factory=ProviderSettings)


@dataclass
class GatewayConfig:
    """serve() configuration."""

    host: str = "127.0.0.1"
    port: int = 8710
    data_dir: str = "./data"
    profiles_dir: str = "./profiles"
    replays_dir: str = "./replays"
    # Per-subscriber outbound queue bound; overflow disconnects the subscriber.
    subscriber_queue_size: int = 1024
    static_dir: str = ""
    engine: EngineConfig = field(default_factory=EngineConfig)
