import json
import random

import pytest

from annohub.vocab import (
    FileMissing,
    GraphError,
    ParseError,
    UnknownClass,
    VocabularyHolder,
    bundled_vocabulary_path,
    is_subclass_of,
    load_vocabulary,
    parse_vocabulary,
    primitive_subsumes,
    properties_of,
)
from oracles import bfs_is_subclass, quadratic_properties_of

MINIMAL = json.dumps(
    {
        "version": "0.1",
        "classes": [{"name": "Thing", "parents": [], "description": "root"}],
        "properties": [
            {"name": "name", "domains": ["Thing"], "ranges": ["Text"], "description": ""}
        ],
    }
)


def test_minimal_file_loads():
    g = parse_vocabulary(MINIMAL)
    assert len(g.classes) == 1
    assert len(g.properties) == 1
    assert g.version == "0.1"


def test_dangling_parent_is_a_graph_error():
    raw = json.loads(MINIMAL)
    raw["classes"].append({"name": "Hotel", "parents": ["LodgingBusiness"], "description": ""})
    with pytest.raises(GraphError) as exc_info:
        parse_vocabulary(json.dumps(raw))
    assert exc_info.value.token == "LodgingBusiness"


def test_bundled_fixture_chain(vocab_graph):
    g = vocab_graph
    for cls in ("Hotel", "LodgingBusiness", "LocalBusiness", "Organization", "Thing"):
        assert g.has_class(cls)
    assert is_subclass_of("Hotel", "LodgingBusiness", g)
    assert is_subclass_of("Hotel", "LocalBusiness", g)
    assert is_subclass_of("Hotel", "Organization", g)
    assert is_subclass_of("Hotel", "Thing", g)


def test_subclass_reflexive(vocab_graph):
    assert is_subclass_of("Thing", "Thing", vocab_graph)


def test_subclass_directed(vocab_graph):
    assert not is_subclass_of("Thing", "Hotel", vocab_graph)


def test_subclass_unknown_token(vocab_graph):
    with pytest.raises(UnknownClass):
        is_subclass_of("NoSuchClass", "Thing", vocab_graph)
    with pytest.raises(UnknownClass):
        is_subclass_of("Thing", "NoSuchClass", vocab_graph)


def test_subclass_matches_bfs_oracle(vocab_graph, raw_vocab):
    rng = random.Random(7)
    names = sorted(vocab_graph.classes)
    for _ in range(300):
        child, ancestor = rng.choice(names), rng.choice(names)
        assert is_subclass_of(child, ancestor, vocab_graph) == bfs_is_subclass(
            child, ancestor, raw_vocab
        )


def test_properties_of_minimal():
    g = parse_vocabulary(MINIMAL)
    assert [p.name for p in properties_of("Thing", g)] == ["name"]


def test_properties_inherit_down_the_chain(vocab_graph):
    hotel = {p.name for p in properties_of("Hotel", vocab_graph)}
    organization = {p.name for p in properties_of("Organization", vocab_graph)}
    assert organization <= hotel


def test_properties_of_matches_quadratic_oracle(vocab_graph, raw_vocab):
    for cls in sorted(vocab_graph.classes):
        ours = [p.name for p in properties_of(cls, vocab_graph)]
        assert ours == quadratic_properties_of(cls, raw_vocab)


def test_properties_of_unknown_class(vocab_graph):
    with pytest.raises(UnknownClass):
        properties_of("Zeppelin", vocab_graph)


def test_load_is_deterministic():
    with open(bundled_vocabulary_path(), "r", encoding="utf-8") as fh:
        text = fh.read()
    a = parse_vocabulary(text)
    b = parse_vocabulary(text)
    assert a.version == b.version
    assert a.classes == b.classes
    assert a.properties == b.properties
    assert list(a.classes) == sorted(a.classes)
    assert list(a.properties) == sorted(a.properties)


def test_membership_biconditional(vocab_graph):
    """p ∈ properties_of(c) ⇔ some domain of p is an ancestor of c."""
    g = vocab_graph
    rng = random.Random(13)
    classes = rng.sample(sorted(g.classes), 10)
    for cls in classes:
        applicable = {p.name for p in properties_of(cls, g)}
        for prop in g.properties.values():
            expected = any(is_subclass_of(cls, d, g) for d in prop.domains if g.has_class(d))
            assert (prop.name in applicable) == expected


def test_cycle_rejected():
    raw = json.loads(MINIMAL)
    raw["classes"] = [
        {"name": "Thing", "parents": [], "description": ""},
        {"name": "A", "parents": ["B"], "description": ""},
        {"name": "B", "parents": ["A"], "description": ""},
    ]
    with pytest.raises(GraphError):
        parse_vocabulary(json.dumps(raw))


def test_unknown_top_level_key_rejected():
    raw = json.loads(MINIMAL)
    raw["extensions"] = []
    with pytest.raises(ParseError):
        parse_vocabulary(json.dumps(raw))


def test_duplicate_class_rejected():
    raw = json.loads(MINIMAL)
    raw["classes"].append({"name": "Thing", "parents": [], "description": "again"})
    with pytest.raises(ParseError):
        parse_vocabulary(json.dumps(raw))


def test_parse_error_carries_position():
    with pytest.raises(ParseError) as exc_info:
        parse_vocabulary("{\n  broken")
    assert exc_info.value.line == 2


def test_missing_file():
    with pytest.raises(FileMissing):
        load_vocabulary("/nonexistent/vocab.json")


def test_dangling_domain_and_range():
    raw = json.loads(MINIMAL)
    raw["properties"].append(
        {"name": "weird", "domains": ["Ghost"], "ranges": ["Text"], "description": ""}
    )
    with pytest.raises(GraphError) as exc_info:
        parse_vocabulary(json.dumps(raw))
    assert exc_info.value.token == "Ghost"


def test_primitive_kinds_allowed_in_ranges_only_from_closed_set():
    raw = json.loads(MINIMAL)
    raw["properties"][0]["ranges"] = ["Text", "URL", "Number"]
    g = parse_vocabulary(json.dumps(raw))
    assert g.properties["name"].ranges == ("Text", "URL", "Number")


def test_primitive_subsumption():
    assert primitive_subsumes("Text", "URL")
    assert primitive_subsumes("Number", "Integer")
    assert primitive_subsumes("Number", "Float")
    assert primitive_subsumes("Number", "Number")
    assert not primitive_subsumes("URL", "Text")
    assert not primitive_subsumes("Integer", "Number")
    assert not primitive_subsumes("Text", "Number")


def test_holder_reload_swaps_atomically(tmp_path):
    path = tmp_path / "vocab.json"
    path.write_text(MINIMAL, encoding="utf-8")
    holder = VocabularyHolder(str(path))
    assert holder.graph.version == "0.1"

    raw = json.loads(MINIMAL)
    raw["version"] = "0.2"
    path.write_text(json.dumps(raw), encoding="utf-8")
    holder.reload()
    assert holder.graph.version == "0.2"

    # a bad replacement leaves the previous graph in place
    path.write_text("not json", encoding="utf-8")
    with pytest.raises(ParseError):
        holder.reload()
    assert holder.graph.version == "0.2"
