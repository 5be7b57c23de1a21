"""A small robot world: rooms, doors, objects, one agent carrying things.

Three rooms; door d12 joins r1-r2 and door d13 joins r1-r3 (the connection
relation is symmetric).  The agent can pick up and drop objects in its
room, walk to a door of its room, enter the room on the other side when
the door is open, and open a closed door it has the key code for.

Two points where this module deliberately differs from its source
material, so that the bundled reference trace replays:

* the initial state puts the agent and object o1 together in r1 and gives
  the agent the key code for d12 as well as d13 — the reference trace
  starts with a pickup in r1 and opens d12;
* entering a room clears the at-door position, otherwise a second walk to
  a door would never be possible.
"""

from __future__ import annotations

from .core import FCState, Fluent, OSAction, OSSpec, ScriptResult, Situation, holds, run_script, state_add, state_remove

AGENTS = ("a1",)
ROOMS = ("r1", "r2", "r3")
DOORS = ("d12", "d13")
OBJECTS = ("o1", "o2", "o3")

_CONNECTS_ONE_WAY = (("r1", "d12", "r2"), ("r1", "d13", "r3"))
CONNECTS = frozenset(_CONNECTS_ONE_WAY) | frozenset((r2, d, r1) for r1, d, r2 in _CONNECTS_ONE_WAY)


def connects(room: str, door: str, target: str) -> bool:
    return (room, door, target) in CONNECTS


def agent_in_room(a: str, r: str) -> Fluent:
    return Fluent("AgentInRoom", (a, r))


def at_door(a: str, d: str) -> Fluent:
    return Fluent("AtDoor", (a, d))


def closed(d: str) -> Fluent:
    return Fluent("Closed", (d,))


def carries(a: str, o: str) -> Fluent:
    return Fluent("Carries", (a, o))


def has_key_code(a: str, d: str) -> Fluent:
    return Fluent("HasKeyCode", (a, d))


def object_in_room(o: str, r: str) -> Fluent:
    return Fluent("ObjectInRoom", (o, r))


def request(r1: str, o: str, r2: str) -> Fluent:
    return Fluent("Request", (r1, o, r2))


def initial_state() -> FCState:
    return frozenset(
        {
            agent_in_room("a1", "r1"),
            object_in_room("o1", "r1"),
            object_in_room("o2", "r1"),
            object_in_room("o3", "r2"),
            closed("d12"),
            has_key_code("a1", "d12"),
            has_key_code("a1", "d13"),
            request("r3", "o1", "r2"),
            request("r1", "o2", "r3"),
            request("r2", "o3", "r1"),
        }
    )


def _room_of(a: str, z: FCState) -> str | None:
    for r in ROOMS:
        if holds(agent_in_room(a, r), z):
            return r
    return None


def _door_of(a: str, z: FCState) -> str | None:
    for d in DOORS:
        if holds(at_door(a, d), z):
            return d
    return None


# -- actions ---------------------------------------------------------------

def _pickup_possible(args, z):
    a, o, r = args
    return holds(agent_in_room(a, r), z) and holds(object_in_room(o, r), z) and not holds(carries(a, o), z)


def _pickup(args, z):
    a, o, r = args
    return state_add(z, [carries(a, o)]), (a, o, r)


def _drop_possible(args, z):
    a, o, r = args
    return holds(carries(a, o), z) and holds(agent_in_room(a, r), z)


def _drop(args, z):
    a, o, r = args
    return state_remove(z, [carries(a, o)]), (a, o, r)


def _gotodoor_possible(args, z):
    a, d, r = args
    return (
        holds(agent_in_room(a, r), z)
        and any(connects(r, d, other) for other in ROOMS)
        and _door_of(a, z) is None
    )


def _gotodoor(args, z):
    a, d, _r = args
    return state_add(z, [at_door(a, d)]), (a, d)


def _enterroom_possible(args, z):
    a, r, d, target = args
    return (
        holds(agent_in_room(a, r), z)
        and holds(at_door(a, d), z)
        and connects(r, d, target)
        and not holds(closed(d), z)
    )


def _enterroom(args, z):
    a, r, d, target = args
    z = state_add(z, [agent_in_room(a, target)])
    z = state_remove(z, [agent_in_room(a, r), at_door(a, d)])
    return z, (a, target)


def _open_possible(args, z):
    a, d = args
    return holds(at_door(a, d), z) and holds(has_key_code(a, d), z) and holds(closed(d), z)


def _open(args, z):
    a, d = args
    return state_remove(z, [closed(d)]), (a, d)


def robots_spec() -> OSSpec:
    return OSSpec(
        name="robots",
        actions=(
            OSAction("pickup", "pickup", ("agent", "object", "room"), _pickup_possible, _pickup),
            OSAction("drop", "drop", ("agent", "object", "room"), _drop_possible, _drop),
            OSAction("gotodoor", "walk", ("agent", "door"), _gotodoor_possible, _gotodoor),
            OSAction("enterroom", "walk", ("agent", "room"), _enterroom_possible, _enterroom),
            OSAction("open", "open", ("agent", "door"), _open_possible, _open),
        ),
        initial=initial_state(),
    )


#: The bundled reference trace: (kind, attribute values).
REFERENCE_TRACE: tuple[tuple[str, ...], ...] = (
    ("pickup", "a1", "o1", "r1"),
    ("walk", "a1", "d12"),
    ("open", "a1", "d12"),
    ("walk", "a1", "r2"),
    ("walk", "a1", "d12"),
    ("walk", "a1", "r1"),
    ("drop", "a1", "o1", "r1"),
    ("pickup", "a1", "o1", "r1"),
    ("drop", "a1", "o1", "r1"),
    ("walk", "a1", "d13"),
)


def script_from_trace(rows, spec: OSSpec | None = None) -> list[tuple[str, tuple]]:
    """Turn trace rows back into an executable action script.

    ``walk`` rows are ambiguous — walking to a door or into a room — and
    the action argument lists carry the current room and door, which the
    rows omit; both are resolved against the evolving state.
    """
    spec = spec or robots_spec()
    z = spec.initial
    script: list[tuple[str, tuple]] = []
    for row in rows:
        kind, args = row[0], tuple(row[1:])
        if kind in ("pickup", "drop"):
            name, action_args = kind, args
        elif kind == "open":
            name, action_args = "open", args
        elif kind == "walk":
            a, place = args
            room = _room_of(a, z)
            if place in DOORS:
                name, action_args = "gotodoor", (a, place, room)
            elif place in ROOMS:
                door = _door_of(a, z)
                name, action_args = "enterroom", (a, room, door, place)
            else:
                raise ValueError(f"walk target {place!r} is neither a door nor a room")
        else:
            raise ValueError(f"unknown trace row kind {kind!r}")
        script.append((name, action_args))
        action = spec.action(name)
        if action.precondition(action_args, z):
            z, _ = action.effect(action_args, z)
    return script


def replay_trace(rows=REFERENCE_TRACE) -> ScriptResult:
    """Replay trace rows against the specification from the initial state."""
    spec = robots_spec()
    return run_script(spec, script_from_trace(rows, spec))
