"""Observational-semantics simulator: fluent-calculus interpreter and bundled specs."""

from .core import (
    EMPTY_STATE,
    FCState,
    Fluent,
    NotPossible,
    OSAction,
    OSSpec,
    OSTraceEvent,
    ScriptResult,
    Situation,
    SituationEvent,
    do_action,
    extraction,
    holds,
    initial_situation,
    run_script,
    state_add,
    state_remove,
)
from .fib import fib_spec
from .robots import robots_spec

__all__ = [
    "EMPTY_STATE",
    "FCState",
    "Fluent",
    "NotPossible",
    "OSAction",
    "OSSpec",
    "OSTraceEvent",
    "ScriptResult",
    "Situation",
    "SituationEvent",
    "do_action",
    "extraction",
    "holds",
    "initial_situation",
    "run_script",
    "state_add",
    "state_remove",
    "fib_spec",
    "robots_spec",
]
