import random
from pathlib import Path

import pytest

from chrv.lang import Constant, Constraint, Program, Query, Rule, Variable, parse_program, parse_query

DATA = Path(__file__).parent / "data"

LEQ_SOURCE = """\
% Less-than-or-equal solver over syntactic equality.
reflexivity   r1@ leq(X,Y) <=> X=Y | true.
antisymmetry  r2@ leq(X,Y), leq(Y,X) <=> X=Y.
idempotence   r3@ leq(X,Y) \\ leq(X,Y) <=> true.
transitivity  r4@ leq(X,Y), leq(Y,Z) ==> leq(X,Z).
"""

LEQ_QUERY = "leq(A,B), leq(B,C), leq(C,A)"


@pytest.fixture
def leq_program() -> Program:
    return parse_program(LEQ_SOURCE)


@pytest.fixture
def leq_query() -> Query:
    return parse_query(LEQ_QUERY)


@pytest.fixture
def golden_leq_xml() -> str:
    return (DATA / "leq_golden.chrv.xml").read_text(encoding="utf-8")


# ---------------------------------------------------------------------------
# Random program generator for faithfulness and property suites
# ---------------------------------------------------------------------------

def random_program_and_query(rng: random.Random, max_rules: int = 3, max_query: int = 4) -> tuple[Program, Query]:
    """A small random CHR program and query over symbols p/q/r, vars X/Y, constants a/b."""
    symbols = ["p", "q", "r"]
    constants = ["a", "b"]

    def term(vars_pool):
        pick = rng.random()
        if pick < 0.5:
            return Variable(rng.choice(vars_pool))
        return Constant(rng.choice(constants))

    def udc(vars_pool):
        symbol = rng.choice(symbols)
        arity = rng.randint(1, 2)
        return Constraint(symbol, tuple(term(vars_pool) for _ in range(arity)))

    rules = []
    for i in range(rng.randint(1, max_rules)):
        vars_pool = ["X", "Y"]
        heads = [udc(vars_pool) for _ in range(rng.randint(1, 2))]
        split = rng.randint(0, len(heads))
        kept, removed = tuple(heads[:split]), tuple(heads[split:])
        guard = ()
        if rng.random() < 0.3:
            guard = (Constraint("=", (term(vars_pool), term(vars_pool))),)
        body = []
        # Propagation rules regenerate their heads forever on fresh ids unless
        # the body shrinks; keep generated bodies small and mostly built-in.
        for _ in range(rng.randint(0, 2)):
            if rng.random() < 0.5:
                body.append(Constraint("=", (term(vars_pool), term(vars_pool))))
            elif removed:
                body.append(udc(vars_pool))
        rules.append(Rule(f"g{i + 1}", kept, removed, guard, tuple(body)))

    query_vars = ["A", "B", "C"]
    query = []
    for _ in range(rng.randint(1, max_query)):
        if rng.random() < 0.2:
            query.append(Constraint("=", (term(query_vars), term(query_vars))))
        else:
            query.append(udc(query_vars))
    return Program(tuple(rules)), Query(tuple(query))
