"""Execution of CHR programs under the theoretical operational semantics.

States are tuples ⟨Q, U, B, P⟩_n: a goal of constraints waiting to be
processed, a store of identified user-defined constraints, the built-in
store, the propagation history and the next free constraint identifier.
Three transitions act on them:

* Solve    moves a built-in constraint from the goal into B,
* Introduce moves a user-defined constraint from the goal into U as c#n,
* Apply    fires a rule instance on store constraints: removed heads leave
  U, the instantiated body is executed (user-defined constraints join the
  goal, built-ins are told to B directly, as in the worked derivations),
  and the firing is recorded in P so it cannot repeat.

The transition relation is non-deterministic; this engine fixes one
strategy so that runs and traces are reproducible:

* the goal behaves as a stack of batches: the query is one batch processed
  first-constraint-first, and each fired body is a new batch processed
  before the older goal remainder;
* rules are tried in program order, head partners oldest-identifier-first,
  and Apply is retried to fixpoint after every goal step.

Each transition is surfaced once through an extraction callback, including
the initial pseudo-transition and a final failure notice when B becomes
inconsistent.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable, Iterator, Optional

from .lang import Constraint, Program, Query, Rule, Variable
from .unify import BuiltinStore, Subst, apply_subst_constraint, match_term

DEFAULT_BUDGET = 10_000

INIT = "initialState"
SOLVE = "solve"
INTRODUCE = "introduce"
APPLY = "apply"
FAIL = "fail"


class PreconditionViolation(Exception):
    """A transition was attempted on a state that does not admit it."""


class BudgetExceeded(Exception):
    """The run did not quiesce within the transition budget."""

    def __init__(self, budget: int):
        super().__init__(f"no quiescence within {budget} transitions")
        self.budget = budget


@dataclass(frozen=True)
class IdentifiedConstraint:
    constraint: Constraint
    id: int


class Goal:
    """The goal Q: an ordered bag of constraints with batch-wise processing.

    Rendering lists constraints in arrival order (query first, then each
    body in textual order); popping serves the youngest batch first and
    within a batch the leftmost constraint first.  This is the order the
    reference derivations follow: a body constraint is processed before the
    remainder of the query, yet prints after it.
    """

    def __init__(self, entries: Optional[list[tuple[int, Constraint]]] = None, next_batch: int = 0):
        self._entries: list[tuple[int, Constraint]] = entries if entries is not None else []
        self._next_batch = next_batch

    def copy(self) -> "Goal":
        return Goal(list(self._entries), self._next_batch)

    def push_batch(self, constraints: list[Constraint] | tuple[Constraint, ...]) -> None:
        batch = self._next_batch
        self._next_batch += 1
        self._entries.extend((batch, c) for c in constraints)

    def peek(self) -> Optional[Constraint]:
        if not self._entries:
            return None
        last_batch = self._entries[-1][0]
        for batch, c in self._entries:
            if batch == last_batch:
                return c
        return None

    def pop(self) -> Constraint:
        if not self._entries:
            raise PreconditionViolation("pop from an empty goal")
        last_batch = self._entries[-1][0]
        for i, (batch, _) in enumerate(self._entries):
            if batch == last_batch:
                return self._entries.pop(i)[1]
        raise AssertionError("unreachable")

    def items(self) -> list[Constraint]:
        return [c for _, c in self._entries]

    def __len__(self) -> int:
        return len(self._entries)

    def __bool__(self) -> bool:
        return bool(self._entries)


@dataclass
class ExecutionState:
    """One ω_t execution state ⟨Q, U, B, P⟩_n."""

    goal: Goal
    store: list[IdentifiedConstraint]
    bics: BuiltinStore
    history: set[tuple[tuple[int, ...], str]]
    next_id: int

    def copy(self) -> "ExecutionState":
        return ExecutionState(
            goal=self.goal.copy(),
            store=list(self.store),
            bics=self.bics.copy(),
            history=set(self.history),
            next_id=self.next_id,
        )

    def store_ids(self) -> list[int]:
        return [ic.id for ic in self.store]


@dataclass(frozen=True)
class MatchResult:
    rule: Rule
    kept_ids: tuple[int, ...]
    removed_ids: tuple[int, ...]
    e: Subst

    @property
    def record(self) -> tuple[tuple[int, ...], str]:
        return (self.kept_ids + self.removed_ids, self.rule.name)


@dataclass(frozen=True)
class Transition:
    """One observed transition, handed to the extraction callback."""

    kind: str
    pre: ExecutionState
    post: ExecutionState
    constraint: Optional[Constraint] = None  # Solve / Introduce subject
    match: Optional[MatchResult] = None  # Apply
    body_instance: tuple[Constraint, ...] = ()  # Apply body after e and renaming


def init_state(q: Query) -> ExecutionState:
    goal = Goal()
    goal.push_batch(q.constraints)
    return ExecutionState(goal=goal, store=[], bics=BuiltinStore(), history=set(), next_id=1)


def solve_step(s: ExecutionState, c: Constraint) -> ExecutionState:
    if not c.is_builtin:
        raise PreconditionViolation(f"Solve on user-defined constraint {c.symbol}")
    if s.goal.peek() != c:
        raise PreconditionViolation("Solve subject is not next in the goal")
    out = s.copy()
    out.goal.pop()
    out.bics.tell(c)
    return out


def introduce_step(s: ExecutionState, c: Constraint) -> ExecutionState:
    if c.is_builtin:
        raise PreconditionViolation(f"Introduce on built-in constraint {c.symbol}")
    if s.goal.peek() != c:
        raise PreconditionViolation("Introduce subject is not next in the goal")
    out = s.copy()
    out.goal.pop()
    out.store.append(IdentifiedConstraint(c, out.next_id))
    out.next_id += 1
    return out


def guard_entailed(bics: BuiltinStore, e: Subst, guard: tuple[Constraint, ...]) -> bool:
    """Ask-test for CT ⊨ B ⊃ ∃(e ∧ g) over the equality theory.

    Each guard equation must hold syntactically once both sides are
    instantiated by e and normalized by the solved form.  Guard-local
    variables (not bound by head matching) are existentially quantified and
    may be matched, but no store or goal variable is ever bound.
    """
    # Rename guard-local variables apart with a character the tokenizer
    # rejects, so they can never capture a store variable of the same name.
    inst = dict(e)
    locals_allowed: set[str] = set()
    for g in guard:
        for v in g.variables():
            if v not in inst:
                fresh = f"~{v}"
                inst[v] = Variable(fresh)
                locals_allowed.add(fresh)

    local: Subst = {}
    for g in guard:
        if g.is_true:
            continue
        if g.is_false:
            return False
        instance = apply_subst_constraint(apply_subst_constraint(g, inst), local)
        lhs = bics.normalize(instance.args[0])
        rhs = bics.normalize(instance.args[1])
        if lhs == rhs:
            continue
        if match_term(lhs, rhs, dict_local := dict(local), bindable=locals_allowed):
            local.update(dict_local)
            continue
        if match_term(rhs, lhs, dict_local := dict(local), bindable=locals_allowed):
            local.update(dict_local)
            continue
        return False
    return True


def find_apply(s: ExecutionState, p: Program) -> Optional[MatchResult]:
    """First applicable rule instance under the deterministic strategy."""
    if not s.bics.consistent:
        return None
    normalized = [(ic.id, s.bics.normalize_constraint(ic.constraint)) for ic in s.store]

    for rule in p.rules:
        heads = rule.heads
        n_kept = len(rule.kept)

        def search(pos: int, used: list[int], e: Subst) -> Optional[MatchResult]:
            if pos == len(heads):
                ids = tuple(used)
                m = MatchResult(rule, ids[:n_kept], ids[n_kept:], dict(e))
                if m.record in s.history:
                    return None
                if not guard_entailed(s.bics, m.e, rule.guard):
                    return None
                return m
            head = heads[pos]
            for cid, c in normalized:
                if cid in used:
                    continue
                if c.symbol != head.symbol or len(c.args) != len(head.args):
                    continue
                attempt = dict(e)
                if all(match_term(hp, cp, attempt) for hp, cp in zip(head.args, c.args)):
                    found = search(pos + 1, used + [cid], attempt)
                    if found is not None:
                        return found
            return None

        m = search(0, [], {})
        if m is not None:
            return m
    return None


def apply_step(
    s: ExecutionState,
    m: MatchResult,
    fresh: Optional[Callable[[str], str]] = None,
) -> tuple[ExecutionState, tuple[Constraint, ...]]:
    """Fire a matched rule instance; returns the new state and the body instance.

    Removed heads leave the store, the firing is recorded in the history,
    entailed guard equations are told to B (the update axiom adds them
    literally), and the instantiated body is executed: built-in constraints
    are told to B, user-defined ones join the goal as one batch with the
    leftmost constraint processed first.  Body variables not bound by head
    matching are renamed apart.
    """
    ids = set(m.kept_ids + m.removed_ids)
    if not ids.issubset(set(s.store_ids())):
        raise PreconditionViolation("stale match: head constraint no longer in store")
    if m.record in s.history:
        raise PreconditionViolation("stale match: firing already in history")

    out = s.copy()
    removed = set(m.removed_ids)
    out.store = [ic for ic in out.store if ic.id not in removed]
    out.history.add(m.record)

    for g in m.rule.guard:
        if g.is_eq:
            out.bics.tell(apply_subst_constraint(g, m.e))

    fresh = fresh or (lambda name: f"_{name}")
    e = dict(m.e)
    for c in m.rule.body:
        for v in sorted(c.variables()):
            if v not in e:
                e[v] = Variable(fresh(v))
    body_instance = tuple(apply_subst_constraint(c, e) for c in m.rule.body)

    batch = [c for c in body_instance if not c.is_builtin]
    for c in body_instance:
        if c.is_builtin:
            out.bics.tell(c)
    if batch:
        out.goal.push_batch(batch)
    return out, body_instance


class EngineRun:
    """A stepped run of one program against one query.

    ``step()`` performs the next transition under the deterministic
    strategy and returns it, or None at quiescence.  The first call yields
    the initial pseudo-transition; a built-in failure yields one final
    fail transition.
    """

    def __init__(self, program: Program, query: Query, budget: int = DEFAULT_BUDGET):
        if budget <= 0:
            raise ValueError("budget must be positive")
        self.program = program
        self.query = query
        self.budget = budget
        self.state = init_state(query)
        self.transitions_used = 0
        self._init_emitted = False
        self._fail_emitted = False
        self._finished = False
        self._fresh_names = itertools.count(1)
        self._taken = {v for c in query.constraints for v in c.variables()}

    def _fresh(self, name: str) -> str:
        while True:
            candidate = f"{name}_{next(self._fresh_names)}"
            if candidate not in self._taken:
                self._taken.add(candidate)
                return candidate

    def step(self) -> Optional[Transition]:
        if self._finished:
            return None
        if not self._init_emitted:
            self._init_emitted = True
            return Transition(INIT, pre=self.state, post=self.state)
        if not self.state.bics.consistent:
            self._fail_emitted = True
            self._finished = True
            return Transition(FAIL, pre=self.state, post=self.state)

        m = find_apply(self.state, self.program)
        if m is not None:
            self._charge()
            pre = self.state
            self.state, body_instance = apply_step(pre, m, self._fresh)
            return Transition(APPLY, pre=pre, post=self.state, match=m, body_instance=body_instance)

        c = self.state.goal.peek()
        if c is not None:
            self._charge()
            pre = self.state
            if c.is_builtin:
                self.state = solve_step(pre, c)
                return Transition(SOLVE, pre=pre, post=self.state, constraint=c)
            self.state = introduce_step(pre, c)
            return Transition(INTRODUCE, pre=pre, post=self.state, constraint=c)

        self._finished = True
        return None

    def _charge(self) -> None:
        if self.transitions_used >= self.budget:
            raise BudgetExceeded(self.budget)
        self.transitions_used += 1

    @property
    def finished(self) -> bool:
        return self._finished

    @property
    def failed(self) -> bool:
        return self._fail_emitted

    def transitions(self) -> Iterator[Transition]:
        while (t := self.step()) is not None:
            yield t


def run(
    program: Program,
    query: Query,
    sink: Optional[Callable[[Transition], None]] = None,
    budget: int = DEFAULT_BUDGET,
) -> ExecutionState:
    """Run to quiescence or failure, reporting every transition to ``sink``."""
    engine = EngineRun(program, query, budget)
    for t in engine.transitions():
        if sink is not None:
            sink(t)
    return engine.state
