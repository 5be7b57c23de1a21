"""Substitutions, unification and one-way matching over Herbrand terms.

The built-in store keeps two synchronized views of the same information: the
list of equations in the order they were told (this is what trace attributes
show) and an idempotent solved form used to normalize terms.  Equations are
stored already normalized by the solved form that existed when they were
added, so the stored list is stable under later bindings.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from .lang import Constant, Constraint, Functional, Term, Variable, render_term

Subst = dict[str, Term]


def apply_subst(t: Term, s: Subst) -> Term:
    if isinstance(t, Variable):
        bound = s.get(t.name)
        return t if bound is None else bound
    if isinstance(t, Functional):
        return Functional(t.symbol, tuple(apply_subst(a, s) for a in t.args))
    return t


def apply_subst_constraint(c: Constraint, s: Subst) -> Constraint:
    return Constraint(c.symbol, tuple(apply_subst(a, s) for a in c.args))


def occurs(name: str, t: Term) -> bool:
    if isinstance(t, Variable):
        return t.name == name
    if isinstance(t, Functional):
        return any(occurs(name, a) for a in t.args)
    return False


def unify(t1: Term, t2: Term, subst: Subst) -> Optional[Subst]:
    """Extend an idempotent substitution so that t1 and t2 become equal.

    Returns None when the terms do not unify (clash or occurs check).  The
    input substitution is not modified.
    """
    out = dict(subst)
    if _unify(apply_subst(t1, out), apply_subst(t2, out), out):
        return out
    return None


def _bind(name: str, value: Term, subst: Subst) -> bool:
    if isinstance(value, Variable) and value.name == name:
        return True
    if occurs(name, value):
        return False
    one = {name: value}
    for k in subst:
        subst[k] = apply_subst(subst[k], one)
    subst[name] = value
    return True


def _unify(a: Term, b: Term, subst: Subst) -> bool:
    a = apply_subst(a, subst)
    b = apply_subst(b, subst)
    if isinstance(a, Variable):
        return _bind(a.name, b, subst)
    if isinstance(b, Variable):
        return _bind(b.name, a, subst)
    if isinstance(a, Constant) and isinstance(b, Constant):
        return a.name == b.name
    if isinstance(a, Functional) and isinstance(b, Functional):
        if a.symbol != b.symbol or len(a.args) != len(b.args):
            return False
        return all(_unify(x, y, subst) for x, y in zip(a.args, b.args))
    return False


def match_term(pattern: Term, target: Term, e: Subst, bindable: Optional[set[str]] = None) -> bool:
    """One-way matching: bind pattern variables so that pattern equals target.

    Target variables are never bound (ask semantics); when ``bindable`` is
    given, only pattern variables in that set may be bound and any other
    variable behaves like a constant.  Extends ``e`` in place on success.
    """
    if isinstance(pattern, Variable):
        if bindable is not None and pattern.name not in bindable:
            return pattern == target
        bound = e.get(pattern.name)
        if bound is not None:
            return bound == target
        if occurs(pattern.name, target) and pattern != target:
            return False
        e[pattern.name] = target
        return True
    if isinstance(pattern, Constant):
        return pattern == target
    if isinstance(target, Functional) and pattern.symbol == target.symbol and len(pattern.args) == len(target.args):
        return all(match_term(p, t, e, bindable) for p, t in zip(pattern.args, target.args))
    return False


@dataclass
class BuiltinStore:
    """The built-in constraint store B: told equations plus their solved form."""

    equations: list[tuple[Term, Term]] = field(default_factory=list)
    solved_form: Subst = field(default_factory=dict)
    consistent: bool = True

    def copy(self) -> "BuiltinStore":
        return BuiltinStore(list(self.equations), dict(self.solved_form), self.consistent)

    def normalize(self, t: Term) -> Term:
        return apply_subst(t, self.solved_form)

    def normalize_constraint(self, c: Constraint) -> Constraint:
        return apply_subst_constraint(c, self.solved_form)

    def tell_eq(self, lhs: Term, rhs: Term) -> None:
        """Add one equation, normalized by the current solved form."""
        lhs = self.normalize(lhs)
        rhs = self.normalize(rhs)
        self.equations.append((lhs, rhs))
        extended = unify(lhs, rhs, self.solved_form)
        if extended is None:
            self.consistent = False
        else:
            self.solved_form = extended

    def tell(self, c: Constraint) -> None:
        """Add a built-in constraint: equality, the no-op true, or false."""
        if c.is_true:
            return
        if c.is_false:
            self.consistent = False
            return
        if not c.is_eq:
            raise ValueError(f"not a built-in constraint: {c.symbol}/{len(c.args)}")
        self.tell_eq(c.args[0], c.args[1])

    def render(self) -> str:
        parts = [f"{render_term(l)}={render_term(r)}" for l, r in self.equations]
        if not self.consistent:
            parts.append("false")
        return ", ".join(parts)
