from ._backend import DEFAULT_BACKEND, available_backends
from .engine import (
    EVENT_KINDS,
    EventRecord,
    ReplicationSummary,
    SimConfig,
    derive_seed,
    events_with_warmup,
    replicate,
    simulate,
)

__all__ = [
    "DEFAULT_BACKEND",
    "EVENT_KINDS",
    "EventRecord",
    "ReplicationSummary",
    "SimConfig",
    "available_backends",
    "derive_seed",
    "events_with_warmup",
    "replicate",
    "simulate",
]
