"""Independent reference implementations used only to check the real code.

Each oracle is deliberately written in a different style from the production
code (brute force, no shared helpers) so that agreement between the two is
meaningful.
"""

from __future__ import annotations

import itertools


# --- triple expansion (statement counting reference) -------------------------


def expand_triples(root: dict) -> list[tuple]:
    """Textbook JSON-LD-to-triples expansion restricted to the profile.

    Emits (blank-subject, "rdf:type", class) per typed node, one triple per
    scalar value, and one linking triple per nested object. ``@context`` and
    ``@id`` contribute nothing.
    """
    triples: list[tuple] = []
    counter = itertools.count()

    def visit(node: dict) -> str:
        subject = f"_:b{next(counter)}"
        triples.append((subject, "rdf:type", node["@type"]))
        for key, value in node.items():
            if key.startswith("@"):
                continue
            values = value if isinstance(value, list) else [value]
            for item in values:
                if isinstance(item, dict):
                    child = visit(item)
                    triples.append((subject, key, child))
                else:
                    triples.append((subject, key, repr(item)))
        return subject

    visit(root)
    return triples


# --- subclass reachability (BFS over the raw vocabulary file) ----------------


def bfs_is_subclass(child: str, ancestor: str, raw_vocab: dict) -> bool:
    parents = {c["name"]: list(c.get("parents", [])) for c in raw_vocab["classes"]}
    frontier = [child]
    seen = set()
    while frontier:
        current = frontier.pop(0)
        if current == ancestor:
            return True
        if current in seen:
            continue
        seen.add(current)
        frontier.extend(parents.get(current, []))
    return False


def quadratic_properties_of(class_token: str, raw_vocab: dict) -> list[str]:
    """Name-sorted properties applicable to a class, by scanning every
    property and testing every domain with the BFS oracle."""
    names = []
    for prop in raw_vocab["properties"]:
        for domain in prop["domains"]:
            if bfs_is_subclass(class_token, domain, raw_vocab):
                names.append(prop["name"])
                break
    return sorted(names)


# --- RFC 3986 percent decoding (url key round-trip reference) ----------------


def rfc3986_decode(encoded: str) -> str:
    """Manual percent-decoder: no urllib involved."""
    out = bytearray()
    i = 0
    raw = encoded.encode("ascii")
    while i < len(raw):
        byte = raw[i]
        if byte == 0x25:  # '%'
            out.append(int(raw[i + 1 : i + 3].decode("ascii"), 16))
            i += 3
        else:
            out.append(byte)
            i += 1
    return out.decode("utf-8")


UNRESERVED = set(
    "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789-._~"
)


def is_rfc3986_fully_encoded(encoded: str) -> bool:
    """True iff every character is unreserved or part of a %XX escape."""
    i = 0
    while i < len(encoded):
        ch = encoded[i]
        if ch == "%":
            if i + 2 >= len(encoded) + 1:
                return False
            pair = encoded[i + 1 : i + 3]
            if len(pair) != 2 or any(c not in "0123456789ABCDEFabcdef" for c in pair):
                return False
            i += 3
        elif ch in UNRESERVED:
            i += 1
        else:
            return False
    return True


# --- form schema leaf counting ------------------------------------------------


def count_ds_constraints(ds_json: dict) -> int:
    """Number of PropertyConstraint nodes in a DS tree (JSON form)."""

    def walk(constraints: list) -> int:
        total = 0
        for c in constraints:
            total += 1
            for r in c.get("ranges", []):
                if r.get("kind") == "nestedType":
                    total += walk(r["nestedType"].get("constraints", []))
        return total

    return walk(ds_json["constraints"])


def count_form_fields(schema_json: dict) -> int:
    """Number of FormField nodes in a serialized FormSchema."""
    total = 0
    for field in schema_json["fields"]:
        total += 1
        if "subform" in field:
            total += count_form_fields(field["subform"])
    return total
