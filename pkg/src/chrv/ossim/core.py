"""Generic interpreter for observational-semantics specifications.

A specification is a labelled transition system written in simple fluent
calculus: states are finite sets of ground fluents, each action has a
precondition (a predicate over the state) and an effect (state update plus
the attribute list of the trace event it emits).  The state algebra is the
set algebra of the foundational axioms — composition is union, so it is
associative, commutative and idempotent with the empty state as identity,
and removal satisfies Holds(f, z1 - z) iff Holds(f, z1) and not Holds(f, z).

A situation is the executed action history together with the state it
reaches; the actual trace falls out of the history by numbering its events
from 1.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Iterable, Optional, Union

Value = Union[str, int, tuple]

EMPTY_STATE: frozenset["Fluent"] = frozenset()


@dataclass(frozen=True)
class Fluent:
    symbol: str
    args: tuple[Value, ...] = ()

    def __str__(self) -> str:
        if not self.args:
            return self.symbol
        rendered = ",".join(_render_value(v) for v in self.args)
        return f"{self.symbol}({rendered})"


def _render_value(v: Value) -> str:
    if isinstance(v, tuple):
        return "[" + ",".join(_render_value(x) for x in v) + "]"
    return str(v)


FCState = frozenset


def holds(f: Fluent, z: FCState) -> bool:
    return f in z


def state_add(z: FCState, fluents: Iterable[Fluent]) -> FCState:
    return z | frozenset(fluents)


def state_remove(z: FCState, fluents: Iterable[Fluent]) -> FCState:
    return z - frozenset(fluents)


class NotPossible(Exception):
    """An action's precondition does not hold in the current state."""

    def __init__(self, action: str, args: tuple[Value, ...], reason: str = ""):
        detail = f" ({reason})" if reason else ""
        super().__init__(f"{action}{list(args)} is not possible{detail}")
        self.action = action
        self.args = args
        self.reason = reason


Precondition = Callable[[tuple[Value, ...], FCState], bool]
#: Effect returns the successor state and the event's attribute values.
Effect = Callable[[tuple[Value, ...], FCState], tuple[FCState, tuple[Value, ...]]]


@dataclass(frozen=True)
class OSAction:
    name: str
    kind: str  # trace event label (several actions may share one)
    attribute_names: tuple[str, ...]
    precondition: Precondition
    effect: Effect


@dataclass(frozen=True)
class OSSpec:
    name: str
    actions: tuple[OSAction, ...]
    initial: FCState

    def action(self, name: str) -> OSAction:
        for a in self.actions:
            if a.name == name:
                return a
        raise KeyError(f"{self.name}: no action named {name!r}")


@dataclass(frozen=True)
class SituationEvent:
    action: str
    args: tuple[Value, ...]
    kind: str
    attributes: tuple[Value, ...]


@dataclass(frozen=True)
class Situation:
    spec: OSSpec
    history: tuple[SituationEvent, ...]
    current: FCState


@dataclass(frozen=True)
class OSTraceEvent:
    chrono: int
    kind: str
    attributes: tuple[Value, ...]


def initial_situation(spec: OSSpec) -> Situation:
    return Situation(spec=spec, history=(), current=spec.initial)


def do_action(spec: OSSpec, name: str, args: tuple[Value, ...], sit: Situation) -> Situation:
    """Execute one action; the effect runs only when the precondition holds."""
    action = spec.action(name)
    if not action.precondition(args, sit.current):
        raise NotPossible(name, args)
    new_state, attributes = action.effect(args, sit.current)
    event = SituationEvent(action=name, args=args, kind=action.kind, attributes=attributes)
    return Situation(spec=spec, history=sit.history + (event,), current=new_state)


def extraction(sit: Situation) -> list[OSTraceEvent]:
    """The actual trace held in a situation: its events numbered from 1."""
    return [
        OSTraceEvent(chrono=i, kind=ev.kind, attributes=ev.attributes)
        for i, ev in enumerate(sit.history, start=1)
    ]


@dataclass
class ScriptResult:
    situation: Situation
    failure: Optional[NotPossible] = None
    failed_index: Optional[int] = None

    @property
    def completed(self) -> bool:
        return self.failure is None


def run_script(spec: OSSpec, script: Iterable[tuple[str, tuple[Value, ...]]]) -> ScriptResult:
    """Fold do_action over a script, stopping at the first impossible action."""
    sit = initial_situation(spec)
    for index, (name, args) in enumerate(script):
        try:
            sit = do_action(spec, name, tuple(args), sit)
        except NotPossible as exc:
            return ScriptResult(situation=sit, failure=exc, failed_index=index)
    return ScriptResult(situation=sit)
