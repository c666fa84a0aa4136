"""JSON documents, DOT export and the small config/CSV formats.

Document layout (``format_version`` ``"hyperstruct/1"``)::

    {
      "format_version": "hyperstruct/1",
      "levels": [
        [{"id": "o1", "dim": 0, "property": {"kind": "number", "value": 1}}, ...],
        [{"id": "u", "boundary": ["o1", "o2", "o3"]}, ...],
        ...
      ],
      "metadata": {}
    }

Boundary ids name bonds one level down.  ``dim`` and ``property`` are
optional.  Encoding is canonical: levels ascending, bonds and boundary ids
sorted, keys sorted, two-space indent, trailing newline.
"""
from __future__ import annotations

import csv
import io
import json
import numbers
from collections.abc import Mapping, Sequence
from fractions import Fraction
from typing import Any, NamedTuple

import jsonschema
import numpy as np

from .core import BondId, Hyperstructure, ValidationReport, Violation, validate
from .errors import ParseError, SchemaError, ValidationError
from .globalizer import Product, PropertyAssignment

FORMAT_VERSION = "hyperstruct/1"

PROPERTY_SCHEMA = {
    "type": "object",
    "required": ["kind", "value"],
    "additionalProperties": False,
    "properties": {
        "kind": {"enum": ["number", "label", "vector", "product"]},
        "value": {},
    },
    "allOf": [
        {"if": {"properties": {"kind": {"const": "number"}}}, "then": {"properties": {"value": {"type": "number"}}}},
        {"if": {"properties": {"kind": {"const": "label"}}}, "then": {"properties": {"value": {"type": "string"}}}},
        {"if": {"properties": {"kind": {"const": "product"}}}, "then": {"properties": {"value": {"type": "string"}}}},
        {
            "if": {"properties": {"kind": {"const": "vector"}}},
            "then": {"properties": {"value": {"type": "array", "items": {"type": "number"}}}},
        },
    ],
}

DOCUMENT_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "hyperstruct document",
    "type": "object",
    "required": ["format_version", "levels"],
    "additionalProperties": False,
    "properties": {
        "format_version": {"type": "string"},
        "levels": {
            "type": "array",
            "minItems": 1,
            "items": {
                "type": "array",
                "items": {
                    "type": "object",
                    "required": ["id"],
                    "additionalProperties": False,
                    "properties": {
                        "id": {"type": "string"},
                        "boundary": {"type": "array", "items": {"type": "string"}},
                        "dim": {"type": "integer"},
                        "property": PROPERTY_SCHEMA,
                    },
                },
            },
        },
        "metadata": {"type": "object"},
    },
}


class Document(NamedTuple):
    structure: Hyperstructure
    assignments: list[PropertyAssignment]
    metadata: dict
    report: ValidationReport


def encode_value(value: Any) -> dict:
    if isinstance(value, bool):
        raise TypeError("booleans are not property values; use a label")
    if isinstance(value, Product):
        return {"kind": "product", "value": value.token}
    if isinstance(value, str):
        return {"kind": "label", "value": value}
    if isinstance(value, Fraction):
        value = int(value) if value.denominator == 1 else float(value)
    if isinstance(value, np.generic):
        value = value.item()
    if isinstance(value, numbers.Integral):
        return {"kind": "number", "value": int(value)}
    if isinstance(value, numbers.Real):
        return {"kind": "number", "value": float(value)}
    if isinstance(value, (tuple, list, np.ndarray)):
        return {"kind": "vector", "value": [encode_value(v)["value"] for v in value]}
    raise TypeError(f"cannot serialize property value {value!r}")


def decode_value(record: Mapping) -> Any:
    kind, value = record["kind"], record["value"]
    if kind == "product":
        return Product(value)
    if kind == "vector":
        return tuple(value)
    return value


def to_document(
    h: Hyperstructure,
    assignments: Sequence[PropertyAssignment] | None = None,
    metadata: Mapping | None = None,
) -> dict:
    props: dict[BondId, Any] = {}
    for a in assignments or ():
        props.update(a.values)
    levels = []
    for i in range(h.height + 1):
        rows = []
        for b in h.level(i):
            row: dict[str, Any] = {"id": b.local_id}
            if i > 0:
                row["boundary"] = sorted(m.local_id for m in h.boundary[b])
            d = h.dim(b)
            if d is not None:
                row["dim"] = d
            if b in props:
                row["property"] = encode_value(props[b])
            rows.append(row)
        levels.append(rows)
    return {"format_version": FORMAT_VERSION, "levels": levels, "metadata": dict(metadata or {})}


def encode(
    h: Hyperstructure,
    assignments: Sequence[PropertyAssignment] | None = None,
    metadata: Mapping | None = None,
) -> str:
    """Canonical JSON text; byte-identical for equal inputs."""
    doc = to_document(h, assignments, metadata)
    return json.dumps(doc, sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def from_document(doc: Any, check: bool = True) -> Document:
    try:
        jsonschema.validate(doc, DOCUMENT_SCHEMA)
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise SchemaError(f"{where}: {exc.message}") from exc
    if doc["format_version"] != FORMAT_VERSION:
        raise SchemaError(f"unsupported format_version {doc['format_version']!r}")

    duplicates = []
    levels = []
    bmap = {}
    dims = {}
    values: list[dict[BondId, Any]] = []
    for i, rows in enumerate(doc["levels"]):
        seen = set()
        here = {}
        for row in rows:
            b = BondId(i, row["id"])
            if b in seen:
                duplicates.append(Violation("DuplicateId", b, f"{b} appears twice"))
            seen.add(b)
            if "boundary" in row:
                if i == 0:
                    raise SchemaError(f"level-0 bond {row['id']!r} cannot have a boundary")
                bmap[b] = frozenset(BondId(i - 1, m) for m in row["boundary"])
            if "dim" in row:
                dims[b] = row["dim"]
            if "property" in row:
                here[b] = decode_value(row["property"])
        levels.append(frozenset(seen))
        values.append(here)

    h = Hyperstructure(tuple(levels), bmap, dims or None)
    report = validate(h)
    report.violations[:0] = duplicates
    if check and not report.ok:
        raise ValidationError(report)
    assignments = [PropertyAssignment(i, v) for i, v in enumerate(values)]
    return Document(h, assignments, dict(doc.get("metadata", {})), report)


def decode(text: str, check: bool = True) -> Document:
    """Parse and validate a document; ``check=False`` returns the report instead of raising."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"not valid JSON: {exc}") from exc
    return from_document(doc, check=check)


# -- DOT ---------------------------------------------------------------------

def _q(text: str) -> str:
    return '"' + text.replace("\\", "\\\\").replace('"', '\\"') + '"'


def export_dot(h: Hyperstructure, assignments: Sequence[PropertyAssignment] | None = None) -> str:
    """Graphviz text: one cluster per level, ``∂`` edges from bonds to members."""
    props: dict[BondId, Any] = {}
    for a in assignments or ():
        props.update(a.values)
    lines = ["digraph hyperstructure {", "  rankdir=BT;", "  node [shape=circle];"]
    for i in range(h.height + 1):
        lines.append(f"  subgraph cluster_level{i} {{")
        lines.append(f"    label={_q(f'B{i}')};")
        for b in h.level(i):
            label = _q(b.local_id)
            if b in props:
                # DOT line break goes between the escaped halves
                label = label[:-1] + "\\n" + _q(str(props[b]))[1:]
            lines.append(f"    {_q(str(b))} [label={label}];")
        lines.append("  }")
    for b in sorted(h.boundary):
        for m in sorted(h.boundary[b]):
            lines.append(f"  {_q(str(b))} -> {_q(str(m))} [label=\"∂\"];")
    lines.append("}")
    return "\n".join(lines) + "\n"


# -- CSV ---------------------------------------------------------------------

def _is_number(cell: str) -> bool:
    try:
        float(cell)
    except ValueError:
        return False
    return True


def read_matrix_csv(text: str) -> tuple[np.ndarray, list[str] | None]:
    """Square comma-separated matrix with an optional header row of labels."""
    rows = [r for r in csv.reader(io.StringIO(text)) if any(c.strip() for c in r)]
    labels = None
    if rows and not all(_is_number(c) for c in rows[0]):
        labels = [c.strip() for c in rows[0]]
        rows = rows[1:]
    if any(len(r) != len(rows) for r in rows):
        raise ParseError("matrix CSV must be square")
    try:
        matrix = np.array([[float(c) for c in r] for r in rows], dtype=float)
    except ValueError as exc:
        raise ParseError(f"matrix CSV has a non-numeric cell: {exc}") from exc
    if labels is not None and len(labels) != len(rows):
        raise ParseError("header row must name every column")
    return matrix.reshape(len(rows), len(rows)), labels
