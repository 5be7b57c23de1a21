"""Reconstruction of virtual states from an actual trace, and faithfulness.

The interpretative direction: each trace event determines (part of) the
virtual state ⟨Q, U, B⟩ after the transition that produced it.  Attribute
strings are parsed back with the CHR parser; attributes an event does not
carry keep their previous value exactly when the transition provably does
not touch them (introduce never changes B, apply without a udc/bic
attribute changed neither, fail changes nothing).

Two components are not in the trace at all and are therefore declared
unrecoverable: the propagation history P and the numeric identities of
store constraints.  Faithfulness is checked on the remaining fragment by
running the engine twice over — once for states, once through the tracer —
and comparing per chrono modulo a variable-renaming bijection.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from . import engine as eng
from .lang import (
    Constant,
    Constraint,
    Functional,
    Program,
    Query,
    Term,
    Variable,
    parse_constraints,
)
from .tracer import ActualTraceEvent, Trace, extract
from .unify import BuiltinStore

UNRECOVERABLE = ("propagation history (P)", "constraint identifiers (#i)")


class RebuildError(Exception):
    """Trace attributes could not be interpreted."""


@dataclass
class PartialVirtualState:
    goal: Optional[list[Constraint]] = None
    udcs: Optional[list[Constraint]] = None
    bics: Optional[list[Constraint]] = None
    next_id: Optional[int] = None

    def copy(self) -> "PartialVirtualState":
        return PartialVirtualState(
            goal=None if self.goal is None else list(self.goal),
            udcs=None if self.udcs is None else list(self.udcs),
            bics=None if self.bics is None else list(self.bics),
            next_id=self.next_id,
        )


def _parse_attr(event: ActualTraceEvent, name: str) -> list[Constraint]:
    value = event.attributes.get(name, "")
    try:
        return parse_constraints(str(value))
    except Exception as exc:
        raise RebuildError(f"chrono {event.chrono}: bad {name} attribute {value!r}: {exc}") from exc


def _tell_all(bstore: BuiltinStore, constraints: list[Constraint], event: ActualTraceEvent) -> None:
    for c in constraints:
        if not c.is_builtin:
            raise RebuildError(f"chrono {event.chrono}: non-builtin {c.symbol!r} in bic attribute")
        bstore.tell(c)


def rebuild(trace: Trace) -> list[PartialVirtualState]:
    """One partial virtual state per event, in chrono order.

    The built-in store is rebuilt by re-telling the traced equations in
    order, and carried-forward goal/store constraints are presented
    normalized by its solved form — an introduce that predates a solve is
    still reported the way the engine would render it afterwards.
    """
    states: list[PartialVirtualState] = []
    current = PartialVirtualState()
    bstore = BuiltinStore()
    for event in trace:
        current = current.copy()
        if event.kind == "initialState":
            current.goal = _parse_attr(event, "goal")
            current.udcs = []
            current.next_id = int(event.attributes["hind"])
            bstore = BuiltinStore()
        elif event.kind == "introduce":
            current.udcs = _parse_attr(event, "udc")
            current.goal = _parse_attr(event, "goal")
            current.next_id = int(event.attributes["hind"])
        elif event.kind == "solve":
            current.goal = _parse_attr(event, "goal")
            _tell_all(bstore, _parse_attr(event, "bic"), event)
        elif event.kind == "apply":
            current.goal = _parse_attr(event, "goal")
            if "udc" in event.attributes:
                current.udcs = _parse_attr(event, "udc")
            if "bic" in event.attributes:
                bstore = BuiltinStore()
                _tell_all(bstore, _parse_attr(event, "bic"), event)
        elif event.kind == "fail":
            pass
        else:
            raise RebuildError(f"chrono {event.chrono}: unknown kind {event.kind!r}")
        current.bics = [Constraint("=", pair) for pair in bstore.equations]
        snapshot = current.copy()
        if snapshot.goal is not None:
            snapshot.goal = [bstore.normalize_constraint(c) for c in snapshot.goal]
        if snapshot.udcs is not None:
            snapshot.udcs = [bstore.normalize_constraint(c) for c in snapshot.udcs]
        states.append(snapshot)
    return states


# ---------------------------------------------------------------------------
# Comparison modulo a variable renaming
# ---------------------------------------------------------------------------

class _Renaming:
    """A bijection between variable names, grown during comparison."""

    def __init__(self):
        self.forward: dict[str, str] = {}
        self.backward: dict[str, str] = {}

    def admits(self, a: str, b: str) -> bool:
        if self.forward.get(a, b) != b or self.backward.get(b, a) != a:
            return False
        self.forward[a] = b
        self.backward[b] = a
        return True


def _terms_equal(a: Term, b: Term, renaming: _Renaming) -> bool:
    if isinstance(a, Variable) and isinstance(b, Variable):
        return renaming.admits(a.name, b.name)
    if isinstance(a, Constant) and isinstance(b, Constant):
        return a.name == b.name
    if isinstance(a, Functional) and isinstance(b, Functional):
        return (
            a.symbol == b.symbol
            and len(a.args) == len(b.args)
            and all(_terms_equal(x, y, renaming) for x, y in zip(a.args, b.args))
        )
    return False


def constraints_equal(a: list[Constraint], b: list[Constraint], renaming: Optional[_Renaming] = None) -> bool:
    renaming = renaming or _Renaming()
    if len(a) != len(b):
        return False
    for ca, cb in zip(a, b):
        if ca.symbol != cb.symbol or len(ca.args) != len(cb.args):
            return False
        if not all(_terms_equal(x, y, renaming) for x, y in zip(ca.args, cb.args)):
            return False
    return True


# ---------------------------------------------------------------------------
# Faithfulness check
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ChronoComparison:
    chrono: int
    kind: str
    goal_ok: bool
    udcs_ok: bool
    bics_ok: bool

    @property
    def ok(self) -> bool:
        return self.goal_ok and self.udcs_ok and self.bics_ok


@dataclass
class FaithfulnessReport:
    faithful: bool
    rows: list[ChronoComparison]
    unrecoverable: tuple[str, ...] = UNRECOVERABLE

    def summary(self) -> str:
        lines = [f"faithful fragment (Q, U, B): {'yes' if self.faithful else 'NO'}"]
        for row in self.rows:
            status = "ok" if row.ok else (
                "mismatch:"
                + ("" if row.goal_ok else " goal")
                + ("" if row.udcs_ok else " udcs")
                + ("" if row.bics_ok else " bics")
            )
            lines.append(f"  chrono {row.chrono:>3} {row.kind:<13} {status}")
        lines.append("not reconstructible from the trace: " + "; ".join(self.unrecoverable))
        return "\n".join(lines)


def _engine_view(state: eng.ExecutionState) -> tuple[list[Constraint], list[Constraint], list[Constraint]]:
    goal = [state.bics.normalize_constraint(c) for c in state.goal.items()]
    udcs = [state.bics.normalize_constraint(ic.constraint) for ic in state.store]
    bics = [Constraint("=", (l, r)) for l, r in state.bics.equations]
    return goal, udcs, bics


def check_faithful(program: Program, query: Query, budget: int = eng.DEFAULT_BUDGET) -> FaithfulnessReport:
    """Run, trace, rebuild, and compare the recoverable fragment per chrono."""
    trace = Trace()
    states: list[eng.ExecutionState] = []

    def sink(t: eng.Transition) -> None:
        trace.append(extract(t, len(trace) + 1))
        states.append(t.post)

    eng.run(program, query, sink=sink, budget=budget)
    rebuilt = rebuild(trace)
    renaming = _Renaming()
    rows: list[ChronoComparison] = []
    for event, state, pvs in zip(trace, states, rebuilt):
        goal, udcs, bics = _engine_view(state)
        rows.append(
            ChronoComparison(
                chrono=event.chrono,
                kind=event.kind,
                goal_ok=pvs.goal is not None and constraints_equal(goal, pvs.goal, renaming),
                udcs_ok=pvs.udcs is not None and constraints_equal(udcs, pvs.udcs, renaming),
                bics_ok=pvs.bics is not None and constraints_equal(bics, pvs.bics, renaming),
            )
        )
    return FaithfulnessReport(faithful=all(r.ok for r in rows), rows=rows)
