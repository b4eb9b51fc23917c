"""Pinned schema.org vocabulary: loading, subclass queries, property lookup.

The vocabulary is consumed from a compact JSON file (see ``load_vocabulary``)
rather than from RDF dumps. A loaded graph is immutable; hot-reload swaps the
whole graph atomically via :class:`VocabularyHolder`.
"""

from __future__ import annotations

import json
import threading
from dataclasses import dataclass
from importlib import resources

# Scalar kinds a property range may name besides classes. schema.org's
# structured DataType subtree is collapsed onto this closed set.
PRIMITIVE_KINDS = frozenset(
    {"Text", "Number", "Integer", "Float", "Boolean", "Date", "DateTime", "Time", "URL"}
)

# Kind subsumption inside the closed set: URL is a kind of Text,
# Integer and Float are kinds of Number.
_PRIMITIVE_PARENTS = {"URL": "Text", "Integer": "Number", "Float": "Number"}

_TOP_LEVEL_KEYS = {"version", "classes", "properties"}


class VocabularyError(Exception):
    """Base class for vocabulary problems."""


class FileMissing(VocabularyError):
    pass


class ParseError(VocabularyError):
    """The file is not valid vocabulary JSON. Carries line/col when known."""

    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        self.line = line
        self.column = column
        if line is not None:
            message = f"{message} (line {line}, column {column})"
        super().__init__(message)


class GraphError(VocabularyError):
    """Cycle or dangling reference; ``token`` names the offender."""

    def __init__(self, message: str, token: str):
        self.token = token
        super().__init__(f"{message}: {token}")


class UnknownClass(VocabularyError):
    def __init__(self, token: str):
        self.token = token
        super().__init__(f"unknown class: {token}")


@dataclass(frozen=True)
class ClassDef:
    name: str
    parents: tuple[str, ...]
    description: str = ""


@dataclass(frozen=True)
class PropertyDef:
    name: str
    domains: tuple[str, ...]
    ranges: tuple[str, ...]
    description: str = ""


class VocabularyGraph:
    """Immutable class/property graph for one schema.org release."""

    def __init__(self, version: str, classes: dict[str, ClassDef], properties: dict[str, PropertyDef]):
        self.version = version
        self.classes = classes
        self.properties = properties
        # ancestor closure (reflexive), precomputed once; lookups are hot
        # during validation and DS editing.
        self._ancestors: dict[str, frozenset[str]] = {}
        for name in classes:
            self._ancestors[name] = frozenset(self._walk_ancestors(name))

    def _walk_ancestors(self, name: str) -> set[str]:
        seen = {name}
        stack = [name]
        while stack:
            for parent in self.classes[stack.pop()].parents:
                if parent not in seen:
                    seen.add(parent)
                    stack.append(parent)
        return seen

    def has_class(self, token: str) -> bool:
        return token in self.classes

    def has_property(self, token: str) -> bool:
        return token in self.properties

    def ancestors_of(self, token: str) -> frozenset[str]:
        """Reflexive ancestor closure of a class."""
        try:
            return self._ancestors[token]
        except KeyError:
            raise UnknownClass(token) from None


def is_subclass_of(child: str, ancestor: str, g: VocabularyGraph) -> bool:
    """True iff ``ancestor`` is reachable from ``child`` over parent edges (reflexive)."""
    if ancestor not in g.classes:
        raise UnknownClass(ancestor)
    return ancestor in g.ancestors_of(child)


def properties_of(class_token: str, g: VocabularyGraph) -> list[PropertyDef]:
    """All properties whose domains intersect the ancestor closure of the class, name-sorted."""
    closure = g.ancestors_of(class_token)
    hits = [p for p in g.properties.values() if closure.intersection(p.domains)]
    hits.sort(key=lambda p: p.name)
    return hits


def primitive_subsumes(parent: str, child: str) -> bool:
    """True iff scalar kind ``child`` is ``parent`` or a sub-kind of it."""
    while True:
        if child == parent:
            return True
        nxt = _PRIMITIVE_PARENTS.get(child)
        if nxt is None:
            return False
        child = nxt


def load_vocabulary(path: str) -> VocabularyGraph:
    """Load and check a vocabulary file.

    Format: UTF-8 JSON object with exactly the keys ``version``, ``classes``
    (list of ``{"name", "parents": [...], "description"}``) and ``properties``
    (list of ``{"name", "domains": [...], "ranges": [...], "description"}``).
    """
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except FileNotFoundError:
        raise FileMissing(f"vocabulary file not found: {path}") from None
    return parse_vocabulary(text)


def parse_vocabulary(text: str) -> VocabularyGraph:
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, line=exc.lineno, column=exc.colno) from None

    if not isinstance(raw, dict):
        raise ParseError("vocabulary file must be a JSON object")
    unknown = set(raw) - _TOP_LEVEL_KEYS
    if unknown:
        raise ParseError(f"unknown top-level keys: {sorted(unknown)}")
    missing = _TOP_LEVEL_KEYS - set(raw)
    if missing:
        raise ParseError(f"missing top-level keys: {sorted(missing)}")
    if not isinstance(raw["version"], str) or not raw["version"]:
        raise ParseError("version must be a nonempty string")

    classes: dict[str, ClassDef] = {}
    for entry in _expect_list(raw["classes"], "classes"):
        cd = _parse_class(entry)
        if cd.name in classes:
            raise ParseError(f"duplicate class: {cd.name}")
        classes[cd.name] = cd

    properties: dict[str, PropertyDef] = {}
    for entry in _expect_list(raw["properties"], "properties"):
        pd = _parse_property(entry)
        if pd.name in properties:
            raise ParseError(f"duplicate property: {pd.name}")
        properties[pd.name] = pd

    _check_references(classes, properties)
    _check_acyclic(classes)

    # ordering-normalized: same bytes always produce an identical graph
    classes = {k: classes[k] for k in sorted(classes)}
    properties = {k: properties[k] for k in sorted(properties)}
    return VocabularyGraph(raw["version"], classes, properties)


def _expect_list(value, what: str) -> list:
    if not isinstance(value, list):
        raise ParseError(f"{what} must be a list")
    return value


def _parse_class(entry) -> ClassDef:
    if not isinstance(entry, dict):
        raise ParseError("class entry must be an object")
    name = entry.get("name")
    if not isinstance(name, str) or not name:
        raise ParseError("class name must be a nonempty string")
    parents = entry.get("parents", [])
    if not isinstance(parents, list) or not all(isinstance(p, str) for p in parents):
        raise ParseError(f"class {name}: parents must be a list of strings")
    description = entry.get("description", "")
    if not isinstance(description, str):
        raise ParseError(f"class {name}: description must be a string")
    return ClassDef(name, tuple(parents), description)


def _parse_property(entry) -> PropertyDef:
    if not isinstance(entry, dict):
        raise ParseError("property entry must be an object")
    name = entry.get("name")
    if not isinstance(name, str) or not name:
        raise ParseError("property name must be a nonempty string")
    domains = entry.get("domains", [])
    ranges = entry.get("ranges", [])
    for field, val in (("domains", domains), ("ranges", ranges)):
        if not isinstance(val, list) or not all(isinstance(x, str) for x in val):
            raise ParseError(f"property {name}: {field} must be a list of strings")
    if not ranges:
        raise ParseError(f"property {name}: ranges must be nonempty")
    description = entry.get("description", "")
    if not isinstance(description, str):
        raise ParseError(f"property {name}: description must be a string")
    return PropertyDef(name, tuple(domains), tuple(ranges), description)


def _check_references(classes: dict[str, ClassDef], properties: dict[str, PropertyDef]) -> None:
    for cd in classes.values():
        for parent in cd.parents:
            if parent not in classes:
                raise GraphError(f"class {cd.name} has undefined parent", parent)
    for pd in properties.values():
        for token in pd.domains:
            if token not in classes and token not in PRIMITIVE_KINDS:
                raise GraphError(f"property {pd.name} has undefined domain", token)
        for token in pd.ranges:
            if token not in classes and token not in PRIMITIVE_KINDS:
                raise GraphError(f"property {pd.name} has undefined range", token)


def _check_acyclic(classes: dict[str, ClassDef]) -> None:
    WHITE, GRAY, BLACK = 0, 1, 2
    color = dict.fromkeys(classes, WHITE)

    def visit(name: str) -> None:
        color[name] = GRAY
        for parent in classes[name].parents:
            if color[parent] == GRAY:
                raise GraphError("subclass cycle through", parent)
            if color[parent] == WHITE:
                visit(parent)
        color[name] = BLACK

    for name in classes:
        if color[name] == WHITE:
            visit(name)


def bundled_vocabulary_path() -> str:
    """Path of the schema.org subset shipped with the package."""
    return str(resources.files("annohub").joinpath("data/schema_org_v3.json"))


class VocabularyHolder:
    """Shares one graph across readers; ``reload`` swaps it atomically."""

    def __init__(self, path: str):
        self._path = path
        self._lock = threading.Lock()
        self._graph = load_vocabulary(path)

    @property
    def graph(self) -> VocabularyGraph:
        return self._graph

    def reload(self, path: str | None = None) -> VocabularyGraph:
        new_graph = load_vocabulary(path or self._path)
        with self._lock:
            if path:
                self._path = path
            self._graph = new_graph
        return new_graph
