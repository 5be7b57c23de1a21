"""Fibonacci growth as an observational-semantics specification.

One fluent Fib(xs) holds the population history newest-first, and one
action mg (monthly growing) appends the sum of the last two values.  The
trace event carries that new value, so five steps from [1,1] extract to
(1,2) (2,3) (3,5) (4,8) (5,13) while the virtual state ends
[1,1,2,3,5,8,13] when read oldest-first.
"""

from __future__ import annotations

from .core import Fluent, OSAction, OSSpec, Situation, do_action, initial_situation, state_add, state_remove

FIB = "Fib"
MG = "mg"


def _fib_fluent(state) -> Fluent:
    for f in state:
        if f.symbol == FIB:
            return f
    raise LookupError("no Fib fluent in state")


def _possible(args, state) -> bool:
    try:
        fluent = _fib_fluent(state)
    except LookupError:
        return False
    return len(fluent.args[0]) >= 2


def _grow(args, state):
    fluent = _fib_fluent(state)
    xs = fluent.args[0]  # newest-first
    value = xs[0] + xs[1]
    new = Fluent(FIB, ((value,) + xs,))
    return state_add(state_remove(state, [fluent]), [new]), (value,)


def fib_spec() -> OSSpec:
    return OSSpec(
        name="fib",
        actions=(
            OSAction(
                name=MG,
                kind=MG,
                attribute_names=("value",),
                precondition=_possible,
                effect=_grow,
            ),
        ),
        initial=frozenset({Fluent(FIB, ((1, 1),))}),
    )


def population(sit: Situation) -> tuple[int, ...]:
    """The virtual state's population list, oldest-first."""
    return tuple(reversed(_fib_fluent(sit.current).args[0]))


def grow(sit: Situation, steps: int = 1) -> Situation:
    for _ in range(steps):
        sit = do_action(sit.spec, MG, (), sit)
    return sit


def virtual_trace(steps: int) -> list[tuple[int, str, tuple[int, ...]]]:
    """(chrono, action, state oldest-first) triples for the first n steps."""
    sit = initial_situation(fib_spec())
    out = []
    for chrono in range(1, steps + 1):
        sit = grow(sit)
        out.append((chrono, MG, population(sit)))
    return out
