"""Restricted JSON-LD annotation profile: parsing, canonical form, validation.

Profile in brief: the document is a single JSON object whose ``@context`` is
the schema.org context in string form, every node carries exactly one
``@type`` string, values are scalars, objects, or arrays thereof, ``@id`` is
allowed and ignored, and the multi-graph keywords (``@graph``, ``@reverse``,
``@list``, ``@value``, ``@language``) are rejected. JSON ``null`` values and
empty arrays are dropped during canonicalization, as JSON-LD expansion would
drop them.

Canonical serialization is UTF-8 with no insignificant whitespace and keys
ordered ``@context``, ``@type``, ``@id`` first, then lexicographically.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from urllib.parse import quote, urlsplit

from annohub.counting import count_statements
from annohub.domainspec import DomainSpecification, PropertyConstraint
from annohub.vocab import PRIMITIVE_KINDS, UnknownClass, VocabularyGraph, is_subclass_of

ALLOWED_CONTEXTS = ("http://schema.org", "https://schema.org", "http://schema.org/")

_KEYWORD_ORDER = {"@context": 0, "@type": 1, "@id": 2}


class ProfileError(ValueError):
    """A document is outside the accepted annotation profile.

    ``code`` is one of NotJson, NotAnObject, EmptyDocument, MissingContext,
    WrongContext, MissingType, UnsupportedKeyword.
    """

    def __init__(self, code: str, message: str, path: str = ""):
        self.code = code
        self.path = path
        super().__init__(f"{code}: {message}" + (f" (at {path})" if path else ""))
        self.message = message


@dataclass(frozen=True)
class AnnotationDocument:
    body: dict
    raw_bytes: bytes
    statement_count: int
    url_value: str | None
    root_type: str


@dataclass(frozen=True)
class Violation:
    path: str
    code: str
    message: str

    def to_json(self) -> dict:
        return {"path": self.path, "code": self.code, "message": self.message}


@dataclass(frozen=True)
class ValidationReport:
    ok: bool
    violations: tuple[Violation, ...]

    def to_json(self) -> dict:
        return {"ok": self.ok, "violations": [v.to_json() for v in self.violations]}


def parse_annotation(data: bytes | str) -> AnnotationDocument:
    """Parse one annotation from raw text; see module docstring for the profile."""
    if isinstance(data, bytes):
        try:
            data = data.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise ProfileError("NotJson", f"invalid UTF-8: {exc}") from None
    try:
        obj = json.loads(data)
    except json.JSONDecodeError as exc:
        raise ProfileError("NotJson", f"{exc.msg} (line {exc.lineno}, column {exc.colno})") from None
    return parse_annotation_object(obj)


def parse_annotation_object(obj) -> AnnotationDocument:
    """Parse one annotation from an already-decoded JSON value.

    Used directly by the bulk upload route, which receives a JSON array and
    treats each element as an independent annotation.
    """
    if not isinstance(obj, dict):
        raise ProfileError("NotAnObject", f"annotation root must be a JSON object, got {_kind_name(obj)}")
    if not obj:
        raise ProfileError("EmptyDocument", "annotation carries no statements")

    context = obj.get("@context")
    if context is None:
        raise ProfileError("MissingContext", "@context is required on the root node")
    if context not in ALLOWED_CONTEXTS:
        raise ProfileError("WrongContext", f"unsupported @context: {json.dumps(context)}")

    body = _canonical_node(obj, path="", at_root=True)
    url_value = body.get("url") if isinstance(body.get("url"), str) else None
    return AnnotationDocument(
        body=body,
        raw_bytes=canonical_bytes(body),
        statement_count=count_statements(body),
        url_value=url_value,
        root_type=body["@type"],
    )


def canonical_bytes(body: dict) -> bytes:
    """Serialize a canonical tree; stable byte-for-byte for equal trees."""
    return json.dumps(body, separators=(",", ":"), ensure_ascii=False).encode("utf-8")


def _kind_name(value) -> str:
    return {dict: "object", list: "array", str: "string", bool: "boolean",
            int: "number", float: "number", type(None): "null"}.get(type(value), type(value).__name__)


def _canonical_node(node: dict, path: str, at_root: bool) -> dict:
    type_value = node.get("@type")
    properties: list[tuple[str, object]] = []
    node_id = None

    for key, value in node.items():
        if key.startswith("@"):
            if key == "@context":
                if not at_root:
                    raise ProfileError("UnsupportedKeyword", "@context is only allowed on the root node", path)
                continue
            if key == "@type":
                continue
            if key == "@id":
                if not isinstance(value, str):
                    raise ProfileError("UnsupportedKeyword", "@id must be a string", path)
                node_id = value
                continue
            raise ProfileError("UnsupportedKeyword", f"keyword {key} is outside the profile", path)
        properties.append((key, value))

    if type_value is None:
        raise ProfileError("MissingType", "every node needs a @type", path)
    if not isinstance(type_value, str) or not type_value:
        raise ProfileError("MissingType", "@type must be a single nonempty string", path)

    out: dict = {}
    if at_root:
        out["@context"] = "http://schema.org"
    out["@type"] = type_value
    if node_id is not None:
        out["@id"] = node_id

    for key, value in sorted(properties, key=lambda kv: kv[0]):
        child_path = f"{path}.{key}" if path else key
        if isinstance(value, list):
            items = []
            for i, item in enumerate(value):
                if item is None:
                    continue
                items.append(_canonical_value(item, f"{child_path}[{i}]"))
            if items:
                out[key] = items
        elif value is None:
            continue
        else:
            out[key] = _canonical_value(value, child_path)
    return out


def _canonical_value(value, path: str):
    if isinstance(value, dict):
        return _canonical_node(value, path, at_root=False)
    if isinstance(value, list):
        raise ProfileError("UnsupportedKeyword", "nested arrays (@list of lists) are outside the profile", path)
    return value


# --- retrieval keys -------------------------------------------------------

_UNRESERVED = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789-._~"


class NotAbsoluteUrl(ValueError):
    pass


def is_absolute_http_url(value: str) -> bool:
    try:
        parts = urlsplit(value)
    except ValueError:
        return False
    return parts.scheme in ("http", "https") and bool(parts.netloc)


def url_retrieval_key(url_value: str) -> str:
    """Percent-encode a page URL into its exact-match retrieval key.

    Every byte outside the RFC 3986 unreserved set is encoded; the input is
    not normalized in any way (case, trailing slashes and query order are all
    significant).
    """
    if not is_absolute_http_url(url_value):
        raise NotAbsoluteUrl(f"not an absolute http(s) URL: {url_value!r}")
    return quote(url_value, safe="")


# --- scalar kind checks ---------------------------------------------------

_DATE_RE = re.compile(r"^\d{4}-\d{2}-\d{2}$")
_TIME_RE = re.compile(r"^\d{2}:\d{2}(:\d{2}(\.\d+)?)?(Z|[+-]\d{2}:\d{2})?$")
_DATETIME_RE = re.compile(
    r"^\d{4}-\d{2}-\d{2}T\d{2}:\d{2}(:\d{2}(\.\d+)?)?(Z|[+-]\d{2}:\d{2})?$"
)


def _valid_date(s: str) -> bool:
    if not _DATE_RE.match(s):
        return False
    import datetime

    try:
        datetime.date.fromisoformat(s)
        return True
    except ValueError:
        return False


def _valid_datetime(s: str) -> bool:
    if not _DATETIME_RE.match(s):
        return False
    return _valid_date(s[:10])


def matches_primitive(kind: str, value) -> bool:
    """Lexical check of a scalar against a primitive kind. Never coerces."""
    if kind == "Text":
        return isinstance(value, str)
    if kind == "URL":
        return isinstance(value, str) and is_absolute_http_url(value)
    if kind == "Boolean":
        return isinstance(value, bool)
    if kind == "Number" or kind == "Float":
        return isinstance(value, (int, float)) and not isinstance(value, bool)
    if kind == "Integer":
        if isinstance(value, bool):
            return False
        return isinstance(value, int) or (isinstance(value, float) and value.is_integer())
    if kind == "Date":
        return isinstance(value, str) and _valid_date(value)
    if kind == "DateTime":
        return isinstance(value, str) and _valid_datetime(value)
    if kind == "Time":
        return isinstance(value, str) and bool(_TIME_RE.match(value))
    raise ValueError(f"unknown primitive kind: {kind}")


# --- validation against a domain specification ----------------------------


def validate_against_ds(
    doc: AnnotationDocument, ds: DomainSpecification, g: VocabularyGraph
) -> ValidationReport:
    """Check a parsed document against a DS; all violations are collected.

    Per node: the type must equal the DS node's type or a subclass of it,
    every required constraint needs at least one value, single-multiplicity
    constraints exactly one, properties absent from the DS are flagged
    (closed world), and each value must match one of the allowed ranges.
    """
    violations: list[Violation] = []
    root = doc.body
    if not _type_matches(root.get("@type"), ds.target_type, g):
        violations.append(
            Violation("@type", "TypeMismatch",
                      f"expected {ds.target_type} or a subclass, got {root.get('@type')}")
        )
    else:
        _validate_node(root, ds.constraints, g, "", violations)

    seen = set()
    unique = []
    for v in violations:
        if (v.path, v.code) not in seen:
            seen.add((v.path, v.code))
            unique.append(v)
    return ValidationReport(ok=not unique, violations=tuple(unique))


def _type_matches(actual, expected: str, g: VocabularyGraph) -> bool:
    if not isinstance(actual, str):
        return False
    try:
        return is_subclass_of(actual, expected, g)
    except UnknownClass:
        return False


def _validate_node(
    node: dict,
    constraints: tuple[PropertyConstraint, ...],
    g: VocabularyGraph,
    prefix: str,
    violations: list[Violation],
) -> None:
    by_property = {c.property: c for c in constraints}

    for constraint in constraints:
        path = f"{prefix}.{constraint.property}" if prefix else constraint.property
        raw = node.get(constraint.property)
        values = raw if isinstance(raw, list) else ([] if raw is None else [raw])
        if constraint.required and not values:
            violations.append(Violation(path, "MissingRequired", f"{constraint.property} is required"))
            continue
        if constraint.multiplicity == "single" and len(values) > 1:
            violations.append(
                Violation(path, "CardinalityExceeded",
                          f"{constraint.property} allows one value, got {len(values)}")
            )
        indexed = isinstance(raw, list)
        for i, value in enumerate(values):
            value_path = f"{path}[{i}]" if indexed else path
            _validate_value(value, constraint, g, value_path, violations)

    for key in node:
        if key.startswith("@"):
            continue
        if key not in by_property:
            path = f"{prefix}.{key}" if prefix else key
            violations.append(Violation(path, "UnknownProperty", f"{key} is not part of the specification"))


def _validate_value(value, constraint: PropertyConstraint, g, path: str, violations: list[Violation]) -> None:
    if isinstance(value, dict):
        nested_alternatives = [r for r in constraint.allowed_ranges if r.kind == "nestedType"]
        if not nested_alternatives:
            violations.append(
                Violation(path, "WrongRangeKind", f"{constraint.property} does not allow nested objects")
            )
            return
        node_type = value.get("@type")
        for alt in nested_alternatives:
            if _type_matches(node_type, alt.nested_type, g):
                _validate_node(value, alt.constraints, g, path, violations)
                return
        expected = ", ".join(r.nested_type for r in nested_alternatives)
        violations.append(
            Violation(path, "WrongNestedType", f"expected a node of type {expected}, got {node_type}")
        )
        return

    primitive_alternatives = [r for r in constraint.allowed_ranges if r.kind == "primitive"]
    if not primitive_alternatives:
        violations.append(
            Violation(path, "WrongRangeKind", f"{constraint.property} requires a nested object")
        )
        return
    if not any(matches_primitive(r.primitive, value) for r in primitive_alternatives):
        expected = ", ".join(r.primitive for r in primitive_alternatives)
        violations.append(
            Violation(path, "WrongRangeKind", f"value does not match any of: {expected}")
        )


def semantic_validate(doc: AnnotationDocument, ds: DomainSpecification) -> ValidationReport:
    """Rule-based semantic validation hook; intentionally accepts everything.

    Kept as a named extension point so a rule engine can be plugged in
    without touching callers.
    """
    return ValidationReport(ok=True, violations=())
