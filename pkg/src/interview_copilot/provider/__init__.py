from .base import (
    AGENT_SCHEMA_IDS,
    InvokePolicy,
    Provider,
    ProviderRequest,
    ProviderResponse,
    load_schema,
    load_template,
    make_provider,
    parse_and_validate,
)
from .faulty import FaultInjectingProvider
from .http import HttpProvider
from .mock import MockProvider, mock_skill_eval

__all__ = [
    "AGENT_SCHEMA_IDS",
    "InvokePolicy",
    "Provider",
    "ProviderRequest",
    "ProviderResponse",
    "FaultInjectingProvider",
    "HttpProvider",
    "MockProvider",
    "load_schema",
    "load_template",
    "make_provider",
    "mock_skill_eval",
    "parse_and_validate",
]
