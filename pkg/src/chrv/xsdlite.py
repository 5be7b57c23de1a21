"""A minimal, schema-driven XSD validator for the trace format.

No XML Schema processor is available in this environment, so this module
interprets the subset of XSD the shipped schema uses: nested anonymous
complex types built from ``xs:sequence`` and ``xs:choice`` of local
``xs:element`` declarations with ``minOccurs``/``maxOccurs``, the simple
types ``xs:string`` and ``xs:integer``, required attributes, and
``xs:unique`` identity constraints with child-axis selectors.  It validates
instance documents directly against the schema document, so the schema file
stays the single source of truth for the wire format.
"""

from __future__ import annotations

import xml.etree.ElementTree as ET
from dataclasses import dataclass, field
from typing import Optional

XS = "{http://www.w3.org/2001/XMLSchema}"


class XsdError(Exception):
    """Instance document does not validate against the schema."""


def _local(tag: str) -> str:
    return tag.rsplit("}", 1)[-1]


def _int_occurs(value: Optional[str], default: int) -> Optional[int]:
    if value is None:
        return default
    if value == "unbounded":
        return None
    return int(value)


@dataclass
class ElementDecl:
    name: str
    min_occurs: int = 1
    max_occurs: Optional[int] = 1  # None = unbounded
    simple_type: Optional[str] = None  # 'string' | 'integer'
    model: Optional["ContentModel"] = None
    attributes: list[tuple[str, bool]] = field(default_factory=list)  # (name, required)
    uniques: list[tuple[str, str]] = field(default_factory=list)  # (selector element, field attr)


@dataclass
class ContentModel:
    kind: str  # 'sequence' | 'choice'
    children: list[ElementDecl]


class Schema:
    def __init__(self, schema_document: str):
        root = ET.fromstring(schema_document)
        if root.tag != f"{XS}schema":
            raise XsdError("not an XML Schema document")
        self.target_namespace = root.get("targetNamespace", "")
        self.roots: dict[str, ElementDecl] = {}
        for child in root:
            if child.tag == f"{XS}element":
                decl = self._parse_element(child)
                self.roots[decl.name] = decl

    # -- schema parsing -----------------------------------------------------

    def _parse_element(self, el: ET.Element) -> ElementDecl:
        decl = ElementDecl(
            name=el.get("name", ""),
            min_occurs=_int_occurs(el.get("minOccurs"), 1) or 0,
            max_occurs=_int_occurs(el.get("maxOccurs"), 1),
        )
        declared_type = el.get("type")
        if declared_type:
            decl.simple_type = declared_type.split(":")[-1]
        for child in el:
            tag = child.tag
            if tag == f"{XS}complexType":
                self._parse_complex_type(child, decl)
            elif tag == f"{XS}unique":
                selector_el = child.find(f"{XS}selector")
                field_el = child.find(f"{XS}field")
                if selector_el is None or field_el is None:
                    raise XsdError("xs:unique without selector/field")
                selector = selector_el.get("xpath", "").split(":")[-1]
                fieldpath = field_el.get("xpath", "")
                if not fieldpath.startswith("@"):
                    raise XsdError(f"unsupported unique field {fieldpath!r}")
                decl.uniques.append((selector, fieldpath[1:]))
        return decl

    def _parse_complex_type(self, ct: ET.Element, decl: ElementDecl) -> None:
        for child in ct:
            tag = child.tag
            if tag in (f"{XS}sequence", f"{XS}choice"):
                decl.model = ContentModel(
                    kind=_local(tag),
                    children=[self._parse_element(e) for e in child if e.tag == f"{XS}element"],
                )
            elif tag == f"{XS}attribute":
                decl.attributes.append((child.get("name", ""), child.get("use") == "required"))

    # -- instance validation --------------------------------------------------

    def validate(self, document: str) -> None:
        try:
            root = ET.fromstring(document)
        except ET.ParseError as exc:
            raise XsdError(f"not well-formed XML: {exc}") from exc
        name = _local(root.tag)
        namespace = root.tag[1:].split("}")[0] if root.tag.startswith("{") else ""
        if namespace != self.target_namespace:
            raise XsdError(f"root namespace {namespace!r} != target {self.target_namespace!r}")
        decl = self.roots.get(name)
        if decl is None:
            raise XsdError(f"no global element declaration for {name!r}")
        self._validate_element(root, decl, path=name)

    def _validate_element(self, el: ET.Element, decl: ElementDecl, path: str) -> None:
        for attr_name, required in decl.attributes:
            if required and el.get(attr_name) is None:
                raise XsdError(f"{path}: missing required attribute {attr_name!r}")
        for selector, attr in decl.uniques:
            seen: set[str] = set()
            for child in el:
                if _local(child.tag) != selector:
                    continue
                value = child.get(attr)
                if value in seen:
                    raise XsdError(f"{path}: duplicate {selector}/@{attr} value {value!r}")
                if value is not None:
                    seen.add(value)
        if decl.model is not None:
            children = list(el)
            if decl.model.kind == "sequence":
                self._validate_sequence(children, decl.model, path)
            else:
                self._validate_choice(children, decl.model, path)
        elif decl.simple_type is not None:
            text = (el.text or "").strip()
            if decl.simple_type == "integer":
                try:
                    int(text)
                except ValueError:
                    raise XsdError(f"{path}: {text!r} is not an integer") from None
            if len(el):
                raise XsdError(f"{path}: element content not allowed in simple type")

    def _validate_sequence(self, children: list[ET.Element], model: ContentModel, path: str) -> None:
        i = 0
        for part in model.children:
            count = 0
            while i < len(children) and _local(children[i].tag) == part.name:
                self._validate_element(children[i], part, f"{path}/{part.name}")
                count += 1
                i += 1
                if part.max_occurs is not None and count == part.max_occurs:
                    break
            if count < part.min_occurs:
                raise XsdError(f"{path}: expected element {part.name!r} ({count} < {part.min_occurs})")
        if i != len(children):
            raise XsdError(f"{path}: unexpected element {_local(children[i].tag)!r}")

    def _validate_choice(self, children: list[ET.Element], model: ContentModel, path: str) -> None:
        if len(children) != 1:
            raise XsdError(f"{path}: choice requires exactly one child element, found {len(children)}")
        child = children[0]
        for part in model.children:
            if part.name == _local(child.tag):
                self._validate_element(child, part, f"{path}/{part.name}")
                return
        raise XsdError(f"{path}: element {_local(child.tag)!r} not allowed by choice")
