"""Unification, matching and built-in store behavior."""

import random

from hypothesis import given, strategies as st

from chrv.lang import Constant, Constraint, Functional, Variable
from chrv.unify import BuiltinStore, apply_subst, match_term, unify


def var(n):
    return Variable(n)


def const(n):
    return Constant(n)


def f(*args):
    return Functional("f", tuple(args))


class TestUnify:
    def test_var_binds(self):
        subst = unify(var("X"), const("a"), {})
        assert subst == {"X": const("a")}

    def test_var_var_orientation(self):
        subst = unify(var("A"), var("C"), {})
        assert subst == {"A": var("C")}

    def test_clash(self):
        assert unify(const("a"), const("b"), {}) is None
        assert unify(f(var("X")), Functional("g", (var("X"),)), {}) is None

    def test_occurs_check(self):
        assert unify(var("X"), f(var("X")), {}) is None

    def test_compose_keeps_idempotent(self):
        subst = unify(var("X"), var("Y"), {})
        subst = unify(var("Y"), const("a"), subst)
        assert subst["X"] == const("a")
        for value in subst.values():
            assert apply_subst(value, subst) == value

    def test_functional_descends(self):
        subst = unify(f(var("X"), const("a")), f(const("b"), var("Y")), {})
        assert subst == {"X": const("b"), "Y": const("a")}


def random_ground_term(rng: random.Random, depth: int = 2):
    if depth == 0 or rng.random() < 0.4:
        return const(rng.choice(["a", "b", 1]))
    return Functional(rng.choice(["f", "g"]), tuple(random_ground_term(rng, depth - 1) for _ in range(rng.randint(1, 2))))


@given(st.integers(min_value=0, max_value=5_000))
def test_ground_unification_is_structural_equality(seed):
    """Oracle: on ground terms, unifiability is exactly structural equality."""
    rng = random.Random(seed)
    t1 = random_ground_term(rng)
    t2 = t1 if rng.random() < 0.5 else random_ground_term(rng)
    assert (unify(t1, t2, {}) is not None) == (t1 == t2)


class TestMatch:
    def test_one_way_only(self):
        e = {}
        assert match_term(var("X"), const("a"), e)
        assert e == {"X": const("a")}
        assert not match_term(const("a"), var("X"), {})

    def test_consistent_rebinding(self):
        e = {}
        assert match_term(f(var("X"), var("X")), f(const("a"), const("a")), e)
        assert not match_term(f(var("X"), var("X")), f(const("a"), const("b")), {})

    def test_bindable_restriction(self):
        assert not match_term(var("X"), const("a"), {}, bindable=set())
        assert match_term(var("X"), const("a"), {}, bindable={"X"})


class TestBuiltinStore:
    def test_tell_eq_extends_solved_form(self):
        store = BuiltinStore()
        store.tell_eq(var("A"), var("C"))
        assert store.consistent
        assert store.normalize(var("A")) == var("C")
        assert store.render() == "A=C"

    def test_equations_stored_normalized_at_add(self):
        store = BuiltinStore()
        store.tell_eq(var("A"), var("C"))
        store.tell_eq(var("A"), var("B"))
        assert store.render() == "A=C, C=B"
        assert store.normalize(var("A")) == var("B")

    def test_ground_clash_marks_inconsistent(self):
        store = BuiltinStore()
        store.tell_eq(const("a"), const("b"))
        assert not store.consistent
        assert store.render().endswith("false")

    def test_true_is_noop_false_fails(self):
        store = BuiltinStore()
        store.tell(Constraint("true"))
        assert store.consistent and store.equations == []
        store.tell(Constraint("false"))
        assert not store.consistent

    def test_copy_is_independent(self):
        store = BuiltinStore()
        store.tell_eq(var("A"), const("a"))
        twin = store.copy()
        twin.tell_eq(var("B"), const("b"))
        assert len(store.equations) == 1
        assert len(twin.equations) == 2


@given(st.integers(min_value=0, max_value=5_000))
def test_solved_form_idempotent(seed):
    """Applying the solved form twice equals applying it once."""
    rng = random.Random(seed)
    store = BuiltinStore()
    names = ["A", "B", "C", "D"]
    for _ in range(rng.randint(1, 5)):
        lhs = var(rng.choice(names)) if rng.random() < 0.7 else random_ground_term(rng, 1)
        rhs = var(rng.choice(names)) if rng.random() < 0.5 else random_ground_term(rng, 1)
        store.tell_eq(lhs, rhs)
        if not store.consistent:
            return
    probe = f(*(var(n) for n in names))
    once = apply_subst(probe, store.solved_form)
    assert apply_subst(once, store.solved_form) == once
    # every stored equation is satisfied by the solved form
    for lhs, rhs in store.equations:
        assert store.normalize(lhs) == store.normalize(rhs)
