"""Extraction of actual trace events and the chrv XML trace format.

Every engine transition becomes one trace event ``(chrono, kind,
attributes)``.  The five kinds and their attributes:

* ``initialState``: goal (the query), hind (always 1)
* ``introduce``: udc (the whole store after the step), goal, hind
* ``solve``: bic (the one constraint told), goal
* ``apply``: rule (the fired rule instance), goal, and — only when the
  step changed them — udc (whole store) and bic (whole built-in store)
* ``fail``: goal at the moment the built-in store became inconsistent

Constraint text is rendered normalized by the built-in solved form, so a
store entry leq(A,B) prints as leq(C,B) once A=C has been told.  The rule
attribute shows the fired instance uniformly as ``name@ heads ==> body``
(heads are kept then removed), normalized by the solved form as it stood
before the step.

Traces serialize to XML documents with root ``chrv`` in the namespace
http://orcas.org.br/chrv; the schema ships as ``data/chrv.xsd``.
"""

from __future__ import annotations

import io
import re
import xml.etree.ElementTree as ET
from dataclasses import dataclass, field
from importlib import resources
from typing import Mapping, Optional, Union
from xml.sax.saxutils import escape

from . import engine as eng
from . import xsdlite
from .lang import Constraint, render_body, render_constraint, render_constraints
from .unify import apply_subst_constraint

NAMESPACE = "http://orcas.org.br/chrv"
SCHEMA_LOCATION = f"{NAMESPACE} chrv.xsd"

EVENT_KINDS = ("initialState", "introduce", "solve", "apply", "fail")

#: Attribute elements per event kind, in document order; False = optional.
ATTRIBUTE_MODEL: dict[str, tuple[tuple[str, bool], ...]] = {
    "initialState": (("goal", True), ("hind", True)),
    "introduce": (("udc", True), ("goal", True), ("hind", True)),
    "solve": (("bic", True), ("goal", True)),
    "apply": (("rule", True), ("goal", True), ("udc", False), ("bic", False)),
    "fail": (("rule", False), ("goal", False)),
}

AttributeValue = Union[str, int]


class SchemaError(Exception):
    """A document does not conform to the chrv trace schema."""


class ChronoError(Exception):
    """Chronos are not the contiguous sequence 1..n."""


@dataclass(frozen=True)
class ActualTraceEvent:
    chrono: int
    kind: str
    attributes: Mapping[str, AttributeValue]

    def attribute(self, name: str) -> Optional[AttributeValue]:
        return self.attributes.get(name)


@dataclass
class Trace:
    events: list[ActualTraceEvent] = field(default_factory=list)
    #: s0, the virtual state both traces start from; not part of the XML
    #: encoding, populated when the trace is captured from a live engine.
    initial_state: Optional["eng.ExecutionState"] = None

    def append(self, event: ActualTraceEvent) -> None:
        expected = len(self.events) + 1
        if event.chrono != expected:
            raise ChronoError(f"expected chrono {expected}, got {event.chrono}")
        self.events.append(event)

    def __len__(self) -> int:
        return len(self.events)

    def __iter__(self):
        return iter(self.events)


# ---------------------------------------------------------------------------
# Extraction
# ---------------------------------------------------------------------------

def _render_goal(state: eng.ExecutionState) -> str:
    return render_constraints([state.bics.normalize_constraint(c) for c in state.goal.items()])


def _render_store(state: eng.ExecutionState) -> str:
    return render_constraints([state.bics.normalize_constraint(ic.constraint) for ic in state.store])


def _render_rule_instance(t: eng.Transition) -> str:
    m = t.match
    assert m is not None
    pre = t.pre.bics
    heads = [pre.normalize_constraint(apply_subst_constraint(h, m.e)) for h in m.rule.heads]
    body = [pre.normalize_constraint(c) for c in t.body_instance]
    return f"{m.rule.name}@ {render_constraints(heads)} ==> {render_body(body)}"


def extract(transition: eng.Transition, chrono: int) -> ActualTraceEvent:
    """Map one engine transition to its actual trace event."""
    kind = transition.kind
    post = transition.post
    attrs: dict[str, AttributeValue] = {}
    if kind == eng.INIT:
        attrs["goal"] = _render_goal(post)
        attrs["hind"] = post.next_id
    elif kind == eng.INTRODUCE:
        attrs["udc"] = _render_store(post)
        attrs["goal"] = _render_goal(post)
        attrs["hind"] = post.next_id
    elif kind == eng.SOLVE:
        assert transition.constraint is not None
        attrs["bic"] = render_constraint(transition.pre.bics.normalize_constraint(transition.constraint))
        attrs["goal"] = _render_goal(post)
    elif kind == eng.APPLY:
        attrs["rule"] = _render_rule_instance(transition)
        attrs["goal"] = _render_goal(post)
        if transition.match and transition.match.removed_ids:
            attrs["udc"] = _render_store(post)
        pre_bics = transition.pre.bics
        if len(post.bics.equations) != len(pre_bics.equations) or post.bics.consistent != pre_bics.consistent:
            attrs["bic"] = post.bics.render()
    elif kind == eng.FAIL:
        attrs["goal"] = _render_goal(transition.pre)
    else:
        raise ValueError(f"unknown transition kind {kind!r}")
    return ActualTraceEvent(chrono=chrono, kind=kind, attributes=attrs)


def trace_run(program, query, budget: int = eng.DEFAULT_BUDGET) -> tuple[Trace, eng.ExecutionState]:
    """Convenience: run the engine and collect the full actual trace."""
    trace = Trace()

    def sink(t: eng.Transition) -> None:
        if trace.initial_state is None:
            trace.initial_state = t.pre
        trace.append(extract(t, len(trace) + 1))

    state = eng.run(program, query, sink=sink, budget=budget)
    return trace, state


# ---------------------------------------------------------------------------
# XML encoding
# ---------------------------------------------------------------------------

def to_xml(trace: Trace) -> str:
    out = io.StringIO()
    out.write('<?xml version="1.0" encoding="UTF-8"?>\n')
    out.write("<chrv\n")
    out.write(f'\txmlns="{NAMESPACE}"\n')
    out.write('\txmlns:xsi="http://www.w3.org/2001/XMLSchema-instance"\n')
    out.write(f'\txsi:schemaLocation="{SCHEMA_LOCATION}">\n')
    for event in trace:
        out.write(f'\t<event chrono="{event.chrono}">\n')
        out.write(f"\t\t<{event.kind}>\n")
        for name, required in ATTRIBUTE_MODEL[event.kind]:
            value = event.attributes.get(name)
            if value is None:
                if required:
                    raise SchemaError(f"event {event.chrono}: missing required attribute {name!r}")
                continue
            out.write(f"\t\t\t<{name}>{escape(str(value))}</{name}>\n")
        out.write(f"\t\t</{event.kind}>\n")
        out.write("\t</event>\n")
    out.write("</chrv>\n")
    return out.getvalue()


def _strip_ns(tag: str) -> str:
    return tag.rsplit("}", 1)[-1]


def from_xml(document: str) -> Trace:
    """Decode a chrv document, checking structure and chrono contiguity."""
    try:
        root = ET.fromstring(document)
    except ET.ParseError as exc:
        raise SchemaError(f"not well-formed XML: {exc}") from exc
    if root.tag != f"{{{NAMESPACE}}}chrv":
        raise SchemaError(f"root element is {root.tag!r}, expected chrv in {NAMESPACE}")
    events: list[ActualTraceEvent] = []
    seen: set[int] = set()
    for el in root:
        if _strip_ns(el.tag) != "event":
            raise SchemaError(f"unexpected element {_strip_ns(el.tag)!r} under chrv")
        chrono_text = el.get("chrono")
        if chrono_text is None:
            raise SchemaError("event without required attribute 'chrono'")
        try:
            chrono = int(chrono_text.strip())
        except ValueError:
            raise SchemaError(f"chrono {chrono_text!r} is not an integer") from None
        if chrono in seen:
            raise ChronoError(f"duplicate chrono {chrono}")
        seen.add(chrono)
        kids = list(el)
        if len(kids) != 1:
            raise SchemaError(f"event {chrono}: expected exactly one kind element, found {len(kids)}")
        kind = _strip_ns(kids[0].tag)
        if kind not in ATTRIBUTE_MODEL:
            raise SchemaError(f"event {chrono}: unknown kind element {kind!r}")
        attrs: dict[str, AttributeValue] = {}
        model = ATTRIBUTE_MODEL[kind]
        order = [name for name, _ in model]
        cursor = -1
        for attr_el in kids[0]:
            name = _strip_ns(attr_el.tag)
            if name not in order:
                raise SchemaError(f"event {chrono}: unexpected element {name!r} in {kind}")
            index = order.index(name)
            if index <= cursor:
                raise SchemaError(f"event {chrono}: element {name!r} out of order in {kind}")
            cursor = index
            text = (attr_el.text or "").strip()
            attrs[name] = int(text) if name == "hind" else text
        for name, required in model:
            if required and name not in attrs:
                raise SchemaError(f"event {chrono}: missing required element {name!r} in {kind}")
        events.append(ActualTraceEvent(chrono=chrono, kind=kind, attributes=attrs))

    events.sort(key=lambda e: e.chrono)
    for i, event in enumerate(events, start=1):
        if event.chrono != i:
            raise ChronoError(f"chronos not contiguous: missing {i}")
    trace = Trace()
    for event in events:
        trace.append(event)
    return trace


def canonicalize(document: str) -> str:
    """Reserialize a document in the canonical layout used by to_xml."""
    return to_xml(from_xml(document))


def normalized_for_comparison(document: str) -> str:
    """Whitespace-insensitive form: collapsed runs, no padding at tag edges."""
    text = re.sub(r"\s+", " ", document.strip())
    text = re.sub(r">\s+", ">", text)
    return re.sub(r"\s+<", "<", text)


def schema_text() -> str:
    return resources.files("chrv").joinpath("data/chrv.xsd").read_text(encoding="utf-8")


_schema: Optional[xsdlite.Schema] = None


def validate_xml(document: str) -> None:
    """Validate a document against the shipped chrv.xsd; raises SchemaError."""
    global _schema
    if _schema is None:
        _schema = xsdlite.Schema(schema_text())
    try:
        _schema.validate(document)
    except xsdlite.XsdError as exc:
        raise SchemaError(str(exc)) from exc
