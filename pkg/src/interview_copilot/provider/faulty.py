"""Fault-injecting provider wrapper for degraded-mode testing."""

from __future__ import annotations

import random

from ..errors import ProviderFailure
from .base import Provider, ProviderRequest


class FaultInjectingProvider(Provider):
    """Delegates to an inner provider, failing a seeded fraction of calls
    with a transport-class ProviderFailure."""

    kind = "faulty"

    def __init__(self, inner: Provider, fail_rate: float = 0.3, seed: int = 0):
        self.inner = inner
        self.fail_rate = fail_rate
        self._rng = random.Random(seed)
        self.calls = 0
        self.failures = 0

    def complete(self, request: ProviderRequest, timeout_ms: int,
                 repair: str | None = None) -> str:
        self.calls += 1
        if self._rng.random() < self.fail_rate:
            self.failures += 1
            raise ProviderFailure("transport", "injected fault")
        return self.inner.complete(request, timeout_ms, repair=repair)
