import json
import random
import re

import numpy as np
import pytest
from hypothesis import given, settings

from gen import random_structure, structures
from hyperstruct import BondId, Product, PropertyAssignment, decode, encode, export_dot, from_layers
from hyperstruct.errors import ParseError, SchemaError, ValidationError
from hyperstruct.serialize import FORMAT_VERSION, decode_value, encode_value, read_matrix_csv

O = [f"o{i}" for i in range(1, 7)]


@pytest.fixture
def fig1():
    return from_layers(O, {"u": O[:3], "v": O[3:]}, {"w": ["u", "v"]})


def test_round_trip_figure_one(fig1):
    text = encode(fig1)
    doc = decode(text)
    assert doc.structure == fig1
    assert doc.report.ok
    assert json.loads(text)["format_version"] == FORMAT_VERSION


def test_round_trip_with_properties(fig1):
    props = [
        PropertyAssignment(0, {BondId(0, o): 1 for o in O}),
        PropertyAssignment(1, {BondId(1, "u"): "red", BondId(1, "v"): Product("xy")}),
        PropertyAssignment(2, {BondId(2, "w"): (1.5, 2.0)}),
    ]
    doc = decode(encode(fig1, props, {"source": "test"}))
    assert [a.values for a in doc.assignments] == [a.values for a in props]
    assert doc.metadata == {"source": "test"}


def test_level_zero_has_no_boundary_key(fig1):
    doc = json.loads(encode(fig1))
    assert all("boundary" not in row for row in doc["levels"][0])
    assert doc["levels"][2] == [{"boundary": ["u", "v"], "id": "w"}]


@settings(max_examples=100, deadline=None)
@given(structures(max_levels=4, max_width=8, dims=True))
def test_decode_encode_identity(h):
    text = encode(h)
    assert decode(text).structure == h
    assert encode(decode(text).structure) == text


def test_byte_stable():
    rng = random.Random(5)
    for _ in range(30):
        h = random_structure(rng, max_levels=4)
        rebuilt = from_layers(
            [b.local_id for b in reversed(h.level(0))],
            *[{b.local_id: [m.local_id for m in h.boundary[b]] for b in reversed(h.level(i))} for i in range(1, h.height + 1)],
        )
        assert encode(h) == encode(rebuilt)


class TestErrors:
    def test_not_json(self):
        with pytest.raises(ParseError):
            decode("{nope")

    def test_schema(self):
        with pytest.raises(SchemaError):
            decode(json.dumps({"format_version": FORMAT_VERSION}))
        with pytest.raises(SchemaError):
            decode(json.dumps({"format_version": FORMAT_VERSION, "levels": [[{"id": 3}]]}))
        with pytest.raises(SchemaError):
            decode(json.dumps({"format_version": "other/9", "levels": [[{"id": "a"}]]}))
        with pytest.raises(SchemaError):
            decode(json.dumps({"format_version": FORMAT_VERSION, "levels": [[{"id": "a", "boundary": ["b"]}]]}))

    def test_bad_property(self):
        row = {"id": "a", "property": {"kind": "number", "value": "text"}}
        with pytest.raises(SchemaError):
            decode(json.dumps({"format_version": FORMAT_VERSION, "levels": [[row]]}))

    def test_dangling(self, fig1):
        doc = json.loads(encode(fig1))
        doc["levels"][1][0]["boundary"].append("ghost")
        with pytest.raises(ValidationError) as err:
            decode(json.dumps(doc))
        assert err.value.rules == ["DanglingReference"]
        loose = decode(json.dumps(doc), check=False)
        assert not loose.report.ok

    def test_duplicate(self):
        doc = {"format_version": FORMAT_VERSION, "levels": [[{"id": "a"}, {"id": "a"}]]}
        with pytest.raises(ValidationError) as err:
            decode(json.dumps(doc))
        assert "DuplicateId" in err.value.rules


@pytest.mark.parametrize(
    "value, kind",
    [(3, "number"), (2.5, "number"), ("x", "label"), (Product("ab"), "product"), ((1, 2), "vector")],
)
def test_value_kinds(value, kind):
    record = encode_value(value)
    assert record["kind"] == kind
    assert decode_value(record) == value


class TestDot:
    def test_figure_one(self, fig1):
        text = export_dot(fig1)
        assert len(re.findall(r"^\s+\"\d:[^\"]+\" \[label=", text, re.M)) == 9
        assert text.count("->") == 8
        assert len(re.findall(r"subgraph cluster_level\d", text)) == 3
        assert text.count("∂") == 8

    def test_overlap_in_degree(self):
        h = from_layers(["o1", "o2", "o3"], {"u": ["o1", "o2"], "v": ["o2", "o3"]}, {"w": ["u", "v"]})
        text = export_dot(h)
        assert text.count('-> "0:o2"') == 2

    def test_properties_in_labels(self, fig1):
        text = export_dot(fig1, [PropertyAssignment(2, {BondId(2, "w"): 6})])
        assert 'label="w\\n6"' in text


class TestMatrixCsv:
    def test_plain(self):
        m, labels = read_matrix_csv("0,1\n1,0\n")
        assert labels is None and np.array_equal(m, [[0, 1], [1, 0]])

    def test_header(self):
        m, labels = read_matrix_csv("a,b\n0,2\n2,0\n")
        assert labels == ["a", "b"] and m[0, 1] == 2

    def test_not_square(self):
        with pytest.raises(ParseError):
            read_matrix_csv("0,1,2\n1,0,3\n")

    def test_non_numeric(self):
        with pytest.raises(ParseError):
            read_matrix_csv("0,1\nx,0\n")
