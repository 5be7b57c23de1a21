"""Trace extraction and the chrv XML format: golden trace, round-trips, schema."""

import random

import pytest
from hypothesis import given, settings, strategies as st

from chrv import engine as eng
from chrv.lang import parse_constraints, parse_program, parse_query
from chrv.rebuild import constraints_equal, _Renaming
from chrv.tracer import (
    ATTRIBUTE_MODEL,
    ActualTraceEvent,
    ChronoError,
    SchemaError,
    Trace,
    extract,
    from_xml,
    to_xml,
    trace_run,
    validate_xml,
)
from conftest import LEQ_QUERY, random_program_and_query


def assert_traces_match(actual: Trace, expected: Trace):
    """Kinds and attribute values equal modulo whitespace and variable renaming."""
    assert len(actual) == len(expected)
    renaming = _Renaming()
    for a, b in zip(actual, expected):
        assert a.chrono == b.chrono
        assert a.kind == b.kind
        assert set(a.attributes) == set(b.attributes), f"chrono {a.chrono}"
        for name in a.attributes:
            if name == "hind":
                assert a.attributes[name] == b.attributes[name]
                continue
            left, right = str(a.attributes[name]), str(b.attributes[name])
            if name == "rule":
                # rule instances parse as one-rule programs (body "==>" shape)
                lr = parse_program(left + ".").rules[0]
                rr = parse_program(right + ".").rules[0]
                assert lr.name == rr.name
                assert constraints_equal(list(lr.heads), list(rr.heads), renaming)
                assert constraints_equal(list(lr.body), list(rr.body), renaming)
            else:
                assert constraints_equal(
                    parse_constraints(left), parse_constraints(right), renaming
                ), f"chrono {a.chrono} {name}: {left!r} != {right!r}"


@pytest.fixture
def leq_trace(leq_program, leq_query) -> Trace:
    trace, _ = trace_run(leq_program, leq_query)
    return trace


class TestExtract:
    def test_init_event(self, leq_trace):
        event = leq_trace.events[0]
        assert event.chrono == 1 and event.kind == "initialState"
        assert event.attributes == {"goal": "leq(A,B), leq(B,C), leq(C,A)", "hind": 1}

    def test_first_introduce(self, leq_trace):
        event = leq_trace.events[1]
        assert event.kind == "introduce"
        assert event.attributes == {"udc": "leq(A,B)", "goal": "leq(B,C), leq(C,A)", "hind": 2}

    def test_propagation_apply_omits_unchanged_stores(self, leq_trace):
        event = leq_trace.events[3]
        assert event.kind == "apply"
        assert event.attributes == {
            "rule": "r4@ leq(A,B), leq(B,C) ==> leq(A,C)",
            "goal": "leq(C,A), leq(A,C)",
        }

    def test_antisymmetry_apply(self, leq_trace):
        event = leq_trace.events[6]
        assert event.attributes == {
            "rule": "r2@ leq(A,C), leq(C,A) ==> A=C",
            "goal": "",
            "udc": "leq(C,B), leq(B,C)",
            "bic": "A=C",
        }

    def test_final_apply_renders_through_solved_form(self, leq_trace):
        event = leq_trace.events[7]
        assert event.attributes == {
            "rule": "r2@ leq(C,B), leq(B,C) ==> C=B",
            "goal": "",
            "udc": "",
            "bic": "A=C, C=B",
        }

    def test_chrono_contiguity(self, leq_trace):
        assert [e.chrono for e in leq_trace] == list(range(1, 9))

    def test_determinism(self, leq_program, leq_query):
        first, _ = trace_run(leq_program, leq_query)
        second, _ = trace_run(leq_program, leq_query)
        assert first.events == second.events

    def test_kind_attribute_discipline(self, leq_trace):
        for event in leq_trace:
            model = ATTRIBUTE_MODEL[event.kind]
            allowed = {name for name, _ in model}
            required = {name for name, req in model if req}
            assert required <= set(event.attributes) <= allowed

    def test_solve_and_fail_events(self):
        trace, state = trace_run(parse_program(""), parse_query("X=a, a=b"))
        assert [e.kind for e in trace] == ["initialState", "solve", "solve", "fail"]
        assert trace.events[1].attributes == {"bic": "X=a", "goal": "a=b"}
        assert trace.events[3].attributes == {"goal": ""}
        assert not state.bics.consistent


class TestGolden:
    def test_matches_reference_document(self, leq_trace, golden_leq_xml):
        assert_traces_match(leq_trace, from_xml(golden_leq_xml))

    def test_golden_is_schema_valid(self, golden_leq_xml):
        validate_xml(golden_leq_xml)

    def test_emitted_xml_canonicalizes_golden(self, leq_trace, golden_leq_xml):
        # decoding the loosely indented reference document and re-encoding gives our bytes
        assert to_xml(from_xml(golden_leq_xml)) == to_xml(leq_trace)


class TestXml:
    def test_leq_round_trip(self, leq_trace):
        assert from_xml(to_xml(leq_trace)).events == leq_trace.events

    def test_empty_trace(self):
        document = to_xml(Trace())
        validate_xml(document)
        assert len(from_xml(document)) == 0

    def test_single_event_round_trip(self):
        trace = Trace()
        trace.append(ActualTraceEvent(1, "initialState", {"goal": "p(X)", "hind": 1}))
        assert from_xml(to_xml(trace)).events == trace.events

    def test_emitted_documents_validate(self, leq_trace):
        validate_xml(to_xml(leq_trace))

    def test_escaping(self):
        trace = Trace()
        trace.append(ActualTraceEvent(1, "initialState", {"goal": "p(a) & <odd>", "hind": 1}))
        document = to_xml(trace)
        validate_xml(document)
        assert from_xml(document).events[0].attributes["goal"] == "p(a) & <odd>"

    def test_duplicate_chrono(self, golden_leq_xml):
        broken = golden_leq_xml.replace('chrono="4"', 'chrono="3"', 1)
        with pytest.raises(ChronoError):
            from_xml(broken)

    def test_chrono_gap(self, golden_leq_xml):
        broken = golden_leq_xml.replace('chrono="8"', 'chrono="9"', 1)
        with pytest.raises(ChronoError):
            from_xml(broken)

    def test_schema_error_reports_element(self, golden_leq_xml):
        broken = golden_leq_xml.replace("<hind> 1 </hind>", "<mystery> 1 </mystery>", 1)
        with pytest.raises(SchemaError) as exc:
            from_xml(broken)
        assert "mystery" in str(exc.value)
        with pytest.raises(SchemaError):
            validate_xml(broken)

    def test_missing_required_attribute(self):
        document = to_xml(Trace()).replace(
            "</chrv>", '\t<event chrono="1">\n\t\t<solve>\n\t\t\t<bic>X=a</bic>\n\t\t</solve>\n\t</event>\n</chrv>'
        )
        with pytest.raises(SchemaError):
            from_xml(document)
        with pytest.raises(SchemaError):
            validate_xml(document)

    def test_wrong_root_rejected(self):
        with pytest.raises(SchemaError):
            from_xml('<?xml version="1.0"?><trace/>')

    def test_out_of_order_attributes(self, golden_leq_xml):
        broken = golden_leq_xml.replace(
            "<udc> leq(A,B) </udc>\n\t\t\t<goal> leq(B,C), leq(C,A) </goal>",
            "<goal> leq(B,C), leq(C,A) </goal>\n\t\t\t<udc> leq(A,B) </udc>",
        )
        assert broken != golden_leq_xml
        with pytest.raises(SchemaError):
            from_xml(broken)


def random_trace(rng: random.Random) -> Trace:
    """Arbitrary schema-shaped traces, including awkward attribute text."""
    alphabet = "abcXYZ,()=<>& _"
    trace = Trace()
    for chrono in range(1, rng.randint(1, 12) + 1):
        kind = rng.choice(list(ATTRIBUTE_MODEL))
        attrs = {}
        for name, required in ATTRIBUTE_MODEL[kind]:
            if not required and rng.random() < 0.4:
                continue
            if name == "hind":
                attrs[name] = rng.randint(1, 99)
            else:
                attrs[name] = "".join(rng.choice(alphabet) for _ in range(rng.randint(0, 14))).strip()
        trace.append(ActualTraceEvent(chrono, kind, attrs))
    return trace


@settings(max_examples=100, deadline=None)
@given(st.integers(min_value=0, max_value=100_000))
def test_round_trip_random_traces(seed):
    trace = random_trace(random.Random(seed))
    document = to_xml(trace)
    validate_xml(document)
    assert from_xml(document).events == trace.events
