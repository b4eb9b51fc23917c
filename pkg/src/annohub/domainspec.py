"""Domain specifications: restricted schema.org subsets and derived editor forms.

A DS names one target type and a tree of property constraints. Saving a DS
checks every token against the active vocabulary; a valid DS deterministically
yields a form schema for the annotation editor.
"""

from __future__ import annotations

import json
import re
import threading
import uuid
from dataclasses import dataclass, field

from annohub.vocab import (
    PRIMITIVE_KINDS,
    VocabularyGraph,
    is_subclass_of,
    primitive_subsumes,
)


class DomainSpecError(ValueError):
    """DS rejected at save/parse time.

    Codes: UnknownType, UnknownProperty, PropertyNotApplicable, EmptyDS,
    RangeNotInVocabulary, DuplicateProperty, MalformedDS, StaleVersion,
    NotFound.
    """

    def __init__(self, code: str, message: str):
        self.code = code
        super().__init__(f"{code}: {message}")
        self.message = message


@dataclass(frozen=True)
class RangeConstraint:
    kind: str  # "primitive" | "nestedType"
    primitive: str | None = None
    nested_type: str | None = None
    constraints: tuple["PropertyConstraint", ...] = ()


@dataclass(frozen=True)
class PropertyConstraint:
    property: str
    required: bool
    multiplicity: str  # "single" | "many"
    allowed_ranges: tuple[RangeConstraint, ...]


@dataclass(frozen=True)
class DomainSpecification:
    ds_id: str | None
    name: str
    target_type: str
    constraints: tuple[PropertyConstraint, ...]
    version: int = 0


@dataclass(frozen=True)
class FormField:
    label: str
    property_token: str
    required: bool
    multiplicity: str
    widget: str  # text | number | checkbox | date | datetime | url | subform
    subform: "FormSchema | None" = None
    range_options: tuple[str, ...] = ()


@dataclass(frozen=True)
class FormSchema:
    root_label: str
    fields: tuple[FormField, ...]


_WIDGET_FOR_PRIMITIVE = {
    "Text": "text",
    "URL": "url",
    "Integer": "number",
    "Float": "number",
    "Number": "number",
    "Boolean": "checkbox",
    "Date": "date",
    "DateTime": "datetime",
    "Time": "datetime",
}


# --- JSON round trip --------------------------------------------------------


def ds_to_json(ds: DomainSpecification) -> dict:
    return {
        "dsId": ds.ds_id,
        "name": ds.name,
        "targetType": ds.target_type,
        "version": ds.version,
        "constraints": [_constraint_to_json(c) for c in ds.constraints],
    }


def _constraint_to_json(c: PropertyConstraint) -> dict:
    ranges = []
    for r in c.allowed_ranges:
        if r.kind == "primitive":
            ranges.append({"kind": "primitive", "primitive": r.primitive})
        else:
            ranges.append(
                {
                    "kind": "nestedType",
                    "nestedType": {
                        "type": r.nested_type,
                        "constraints": [_constraint_to_json(n) for n in r.constraints],
                    },
                }
            )
    return {
        "property": c.property,
        "required": c.required,
        "multiplicity": c.multiplicity,
        "ranges": ranges,
    }


def ds_from_json(raw) -> DomainSpecification:
    if not isinstance(raw, dict):
        raise DomainSpecError("MalformedDS", "DS must be a JSON object")
    name = raw.get("name")
    target = raw.get("targetType")
    if not isinstance(name, str) or not name:
        raise DomainSpecError("MalformedDS", "name must be a nonempty string")
    if not isinstance(target, str) or not target:
        raise DomainSpecError("MalformedDS", "targetType must be a nonempty string")
    ds_id = raw.get("dsId")
    if ds_id is not None and not isinstance(ds_id, str):
        raise DomainSpecError("MalformedDS", "dsId must be a string")
    version = raw.get("version", 0)
    if not isinstance(version, int) or isinstance(version, bool) or version < 0:
        raise DomainSpecError("MalformedDS", "version must be a non-negative integer")
    constraints = raw.get("constraints")
    if not isinstance(constraints, list):
        raise DomainSpecError("MalformedDS", "constraints must be a list")
    return DomainSpecification(
        ds_id=ds_id,
        name=name,
        target_type=target,
        constraints=tuple(_constraint_from_json(c) for c in constraints),
        version=version,
    )


def _constraint_from_json(raw) -> PropertyConstraint:
    if not isinstance(raw, dict):
        raise DomainSpecError("MalformedDS", "constraint must be an object")
    prop = raw.get("property")
    if not isinstance(prop, str) or not prop:
        raise DomainSpecError("MalformedDS", "constraint property must be a nonempty string")
    required = raw.get("required", False)
    if not isinstance(required, bool):
        raise DomainSpecError("MalformedDS", f"{prop}: required must be a boolean")
    multiplicity = raw.get("multiplicity", "single")
    if multiplicity not in ("single", "many"):
        raise DomainSpecError("MalformedDS", f"{prop}: multiplicity must be single or many")
    ranges_raw = raw.get("ranges")
    if not isinstance(ranges_raw, list):
        raise DomainSpecError("MalformedDS", f"{prop}: ranges must be a list")
    ranges = []
    for r in ranges_raw:
        if not isinstance(r, dict):
            raise DomainSpecError("MalformedDS", f"{prop}: range must be an object")
        kind = r.get("kind")
        if kind == "primitive":
            primitive = r.get("primitive")
            if not isinstance(primitive, str):
                raise DomainSpecError("MalformedDS", f"{prop}: primitive range needs a primitive token")
            ranges.append(RangeConstraint(kind="primitive", primitive=primitive))
        elif kind == "nestedType":
            nested = r.get("nestedType")
            if not isinstance(nested, dict) or not isinstance(nested.get("type"), str):
                raise DomainSpecError("MalformedDS", f"{prop}: nestedType range needs a type")
            inner = nested.get("constraints", [])
            if not isinstance(inner, list):
                raise DomainSpecError("MalformedDS", f"{prop}: nested constraints must be a list")
            ranges.append(
                RangeConstraint(
                    kind="nestedType",
                    nested_type=nested["type"],
                    constraints=tuple(_constraint_from_json(c) for c in inner),
                )
            )
        else:
            raise DomainSpecError("MalformedDS", f"{prop}: range kind must be primitive or nestedType")
    return PropertyConstraint(
        property=prop, required=required, multiplicity=multiplicity, allowed_ranges=tuple(ranges)
    )


# --- validation against the vocabulary --------------------------------------


def check_domain_specification(ds: DomainSpecification, g: VocabularyGraph) -> None:
    """Raise DomainSpecError unless every DS invariant holds against ``g``."""
    if not g.has_class(ds.target_type):
        raise DomainSpecError("UnknownType", f"target type {ds.target_type} is not in the vocabulary")
    if not ds.constraints or not any(c.required for c in ds.constraints):
        raise DomainSpecError("EmptyDS", "a DS must require at least one property")
    _check_constraints(ds.constraints, ds.target_type, g)


def _check_constraints(
    constraints: tuple[PropertyConstraint, ...], enclosing_type: str, g: VocabularyGraph
) -> None:
    seen: set[str] = set()
    for c in constraints:
        if c.property in seen:
            raise DomainSpecError("DuplicateProperty", f"{c.property} appears twice on {enclosing_type}")
        seen.add(c.property)

        prop = g.properties.get(c.property)
        if prop is None:
            raise DomainSpecError("UnknownProperty", f"{c.property} is not in the vocabulary")
        closure = g.ancestors_of(enclosing_type)
        if not closure.intersection(prop.domains):
            raise DomainSpecError(
                "PropertyNotApplicable", f"{c.property} does not apply to {enclosing_type}"
            )
        if not c.allowed_ranges:
            raise DomainSpecError("RangeNotInVocabulary", f"{c.property}: no ranges given")
        for r in c.allowed_ranges:
            _check_range(r, prop, g)


def _check_range(r: RangeConstraint, prop, g: VocabularyGraph) -> None:
    if r.kind == "primitive":
        if r.primitive not in PRIMITIVE_KINDS:
            raise DomainSpecError("RangeNotInVocabulary", f"{prop.name}: unknown primitive {r.primitive}")
        allowed = any(
            vocab_range in PRIMITIVE_KINDS and primitive_subsumes(vocab_range, r.primitive)
            for vocab_range in prop.ranges
        )
        if not allowed:
            raise DomainSpecError(
                "RangeNotInVocabulary",
                f"{prop.name} does not admit {r.primitive} (vocabulary ranges: {', '.join(prop.ranges)})",
            )
    else:
        if not g.has_class(r.nested_type):
            raise DomainSpecError("UnknownType", f"{prop.name}: unknown nested type {r.nested_type}")
        allowed = any(
            vocab_range not in PRIMITIVE_KINDS
            and g.has_class(vocab_range)
            and is_subclass_of(r.nested_type, vocab_range, g)
            for vocab_range in prop.ranges
        )
        if not allowed:
            raise DomainSpecError(
                "RangeNotInVocabulary",
                f"{prop.name} does not admit nested {r.nested_type} "
                f"(vocabulary ranges: {', '.join(prop.ranges)})",
            )
        _check_constraints(r.constraints, r.nested_type, g)


# --- form schema derivation --------------------------------------------------

_CAMEL_SPLIT = re.compile(r"(?<=[a-z0-9])(?=[A-Z])")


def humanize(token: str) -> str:
    return _CAMEL_SPLIT.sub(" ", token).title() if token else token


def derive_form_schema(ds: DomainSpecification) -> FormSchema:
    """Deterministically map a valid DS to the editor's rendering model."""
    return FormSchema(root_label=ds.name, fields=_fields_for(ds.constraints))


def _fields_for(constraints: tuple[PropertyConstraint, ...]) -> tuple[FormField, ...]:
    fields = []
    for c in constraints:
        fields.append(_field_for(c))
    return tuple(fields)


def _field_for(c: PropertyConstraint) -> FormField:
    common = dict(
        label=humanize(c.property),
        property_token=c.property,
        required=c.required,
        multiplicity=c.multiplicity,
    )
    if len(c.allowed_ranges) == 1:
        r = c.allowed_ranges[0]
        if r.kind == "primitive":
            return FormField(widget=_WIDGET_FOR_PRIMITIVE[r.primitive], **common)
        return FormField(
            widget="subform",
            subform=FormSchema(root_label=humanize(r.nested_type), fields=_fields_for(r.constraints)),
            **common,
        )
    # mixed or multiple alternatives: plain text input, the range list rides
    # along so the UI can render a type picker
    options = tuple(
        r.primitive if r.kind == "primitive" else r.nested_type for r in c.allowed_ranges
    )
    return FormField(widget="text", range_options=options, **common)


def form_schema_to_json(schema: FormSchema) -> dict:
    return {
        "rootLabel": schema.root_label,
        "fields": [_field_to_json(f) for f in schema.fields],
    }


def _field_to_json(f: FormField) -> dict:
    out = {
        "label": f.label,
        "propertyToken": f.property_token,
        "required": f.required,
        "multiplicity": f.multiplicity,
        "widget": f.widget,
    }
    if f.subform is not None:
        out["subform"] = form_schema_to_json(f.subform)
    if f.range_options:
        out["rangeOptions"] = list(f.range_options)
    return out


def form_schema_bytes(schema: FormSchema) -> bytes:
    return json.dumps(form_schema_to_json(schema), separators=(",", ":"), ensure_ascii=False).encode("utf-8")


# --- persistence -------------------------------------------------------------

DS_COLLECTION = "domain_specs"


class DsStore:
    """Versioned DS persistence over a document-store backend.

    Writes are serialized; a save presenting a stale base version is rejected
    so concurrent editors cannot silently overwrite each other.
    """

    def __init__(self, backend):
        self._backend = backend
        self._lock = threading.Lock()

    def save(self, ds: DomainSpecification, g: VocabularyGraph, organization_id: str | None = None) -> str:
        check_domain_specification(ds, g)
        with self._lock:
            ds_id = ds.ds_id or uuid.uuid4().hex[:12]
            existing = self._backend.get(DS_COLLECTION, ds_id)
            if existing is None:
                version = 1
            else:
                if ds.version != existing["version"]:
                    raise DomainSpecError(
                        "StaleVersion",
                        f"{ds_id} was edited concurrently (stored version {existing['version']}, "
                        f"save based on {ds.version})",
                    )
                version = existing["version"] + 1
                if organization_id is None:
                    organization_id = existing.get("organizationId")
            record = ds_to_json(
                DomainSpecification(
                    ds_id=ds_id,
                    name=ds.name,
                    target_type=ds.target_type,
                    constraints=ds.constraints,
                    version=version,
                )
            )
            record["organizationId"] = organization_id
            self._backend.put(DS_COLLECTION, ds_id, record)
            return ds_id

    def get(self, ds_id: str) -> DomainSpecification:
        record = self._backend.get(DS_COLLECTION, ds_id)
        if record is None:
            raise DomainSpecError("NotFound", f"no DS with id {ds_id}")
        return ds_from_json(record)

    def owner_of(self, ds_id: str) -> str | None:
        record = self._backend.get(DS_COLLECTION, ds_id)
        if record is None:
            raise DomainSpecError("NotFound", f"no DS with id {ds_id}")
        return record.get("organizationId")

    def list(self) -> list[tuple[str, str, str, int]]:
        rows = [
            (doc["dsId"], doc["name"], doc["targetType"], doc["version"])
            for _, doc in self._backend.items(DS_COLLECTION)
        ]
        rows.sort(key=lambda r: (r[1], r[0]))
        return rows
