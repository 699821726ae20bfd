"""JSON documents for weight diagrams.

A document is ``{"kind": ..., "params": {...}, "table": {...}, "tail": {...}}``.
Builder kinds (tensor, diagonal_core, fig2, drury_arveson, quasinormal) are
rebuilt from ``params``. Any other diagram is written as ``kind: "table"``
with finite ``alpha``/``beta`` tables (row k2 is a list over k1) plus its
tail; Python's float repr keeps every value exact through a round trip.
"""
from __future__ import annotations

import json
from typing import Any

import jsonschema

from .errors import SchemaError
from .lattice import LatticeWindow, Tail, WeightDiagram, table_diagram
from .measures import AtomicMeasure1D
from .sequences import sequence_from_json

_POSITIVE_ROWS = {
    "type": "array",
    "minItems": 1,
    "items": {"type": "array", "minItems": 1, "items": {"type": "number", "exclusiveMinimum": 0}},
}

_SEQUENCE = {
    "oneOf": [
        {"type": "number", "exclusiveMinimum": 0},
        {"type": "array", "minItems": 1, "items": {"type": "number", "exclusiveMinimum": 0}},
        {"type": "object", "required": ["period"],
         "properties": {"head": {"type": "array", "items": {"type": "number"}},
                        "period": {"type": "array", "minItems": 1, "items": {"type": "number"}}}},
        {"type": "object", "required": ["measure"],
         "properties": {"measure": {"type": "array", "items": {"type": "array", "minItems": 2, "maxItems": 2}}}},
    ]
}

_POS = {"type": "number", "exclusiveMinimum": 0}
_MEASURE = {"type": "array", "minItems": 1,
            "items": {"type": "array", "minItems": 2, "maxItems": 2, "items": {"type": "number"}}}

DIAGRAM_SCHEMA: dict = {
    "type": "object",
    "required": ["kind"],
    "properties": {
        "kind": {"enum": ["table", "tensor", "diagonal_core", "fig2", "drury_arveson", "quasinormal"]},
        "params": {"type": "object"},
        "table": {"type": "object", "required": ["alpha", "beta"],
                  "properties": {"alpha": _POSITIVE_ROWS, "beta": _POSITIVE_ROWS}},
        "tail": {"type": "object",
                 "properties": {
                     "start": {"type": "array", "minItems": 2, "maxItems": 2,
                               "items": {"type": ["integer", "null"], "minimum": 0}},
                     "period": {"type": "array", "minItems": 2, "maxItems": 2,
                                "items": {"type": "integer", "minimum": 1}},
                     "core": {"type": "array", "minItems": 2, "maxItems": 2,
                              "items": {"type": "integer", "minimum": 0}},
                 }},
    },
    "allOf": [
        {"if": {"properties": {"kind": {"const": "table"}}}, "then": {"required": ["table"]}},
        {"if": {"properties": {"kind": {"const": "tensor"}}},
         "then": {"properties": {"params": {"required": ["sigma", "tau"],
                                            "properties": {"sigma": _SEQUENCE, "tau": _SEQUENCE}}},
                  "required": ["params"]}},
        {"if": {"properties": {"kind": {"const": "diagonal_core"}}},
         "then": {"properties": {"params": {"required": ["omega"], "properties": {"omega": _SEQUENCE}}},
                  "required": ["params"]}},
        {"if": {"properties": {"kind": {"const": "fig2"}}},
         "then": {"properties": {"params": {"required": ["x0", "a"],
                                            "properties": {"x0": _POS, "a": _POS, "x1": _POS, "y0": _POS,
                                                           "y1": _POS, "xi": _MEASURE, "omega": _SEQUENCE,
                                                           "tau": _SEQUENCE}}},
                  "required": ["params"]}},
        {"if": {"properties": {"kind": {"const": "quasinormal"}}},
         "then": {"properties": {"params": {"required": ["row"],
                                            "properties": {"row": _SEQUENCE, "C": _POS}}},
                  "required": ["params"]}},
    ],
}


def _path(error: jsonschema.ValidationError) -> str:
    out = "$"
    for part in error.absolute_path:
        out += f"[{part}]" if isinstance(part, int) else f".{part}"
    return out


def validate_document(doc: Any) -> None:
    """Raise ``SchemaError`` (with a JSON path) if doc is not a diagram document."""
    validator = jsonschema.Draft202012Validator(DIAGRAM_SCHEMA)
    errors = sorted(validator.iter_errors(doc), key=lambda e: len(list(e.absolute_path)), reverse=True)
    if errors:
        e = errors[0]
        raise SchemaError(e.message, _path(e))


def diagram_to_json(d: WeightDiagram, window: LatticeWindow | None = None) -> dict:
    """Serialize d. Builder-made diagrams keep their parameters; others are
    tabulated over ``window`` enlarged to cover the tail's representative box."""
    if d.source is not None:
        return {"kind": d.source["kind"], "params": d.source["params"], "tail": d.tail.to_json()}
    box = d.tail.representative_box()
    if window is None and box is None:
        raise ValueError("a window is needed to tabulate a diagram without a stationary tail")
    w = window if window is not None else box
    if box is not None:
        w = w.union(box.grow(1))
    w = d.usable(w)
    a, b = d.weights(w)
    return {"kind": "table", "params": {"window": str(w)},
            "table": {"alpha": a.T.tolist(), "beta": b.T.tolist()},
            "tail": d.tail.to_json()}


def diagram_from_json(doc: dict) -> WeightDiagram:
    from . import families

    validate_document(doc)
    kind = doc["kind"]
    params = doc.get("params", {})
    try:
        if kind == "table":
            tail = Tail.from_json(doc.get("tail", {}))
            return table_diagram(doc["table"]["alpha"], doc["table"]["beta"], tail, label="table")
        if kind == "tensor":
            return families.build_tensor(sequence_from_json(params["sigma"]), sequence_from_json(params["tau"]))
        if kind == "diagonal_core":
            return families.build_diagonal_core(sequence_from_json(params["omega"]))
        if kind == "drury_arveson":
            return families.build_drury_arveson()
        if kind == "quasinormal":
            return families.build_quasinormal_from_row(sequence_from_json(params["row"]), float(params.get("C", 1.0)))
        # fig2: the general form when the free corner weights are present
        if "x1" in params:
            return families.build_fig2_general(params["x0"], params["x1"], params["y0"], params["y1"],
                                               params["a"], sequence_from_json(params["omega"]),
                                               sequence_from_json(params["tau"]))
        if "xi" in params:
            return families.build_fig2_family(params["x0"], params["a"], AtomicMeasure1D.from_json(params["xi"]))
        if "omega" in params:
            return families.build_fig2_family(params["x0"], params["a"], omega=sequence_from_json(params["omega"]))
        raise SchemaError("fig2 needs xi or omega", "$.params")
    except SchemaError:
        raise
    except (KeyError, ValueError, TypeError) as exc:
        raise SchemaError(str(exc), "$.params") from exc


def dumps(d: WeightDiagram, window: LatticeWindow | None = None) -> str:
    return json.dumps(diagram_to_json(d, window), indent=1)


def loads(text: str) -> WeightDiagram:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"invalid JSON: {exc.msg} (line {exc.lineno}, column {exc.colno})", "$") from exc
    return diagram_from_json(doc)


def load(path) -> WeightDiagram:
    with open(path, encoding="utf-8") as fh:
        return loads(fh.read())


def dump(d: WeightDiagram, path, window: LatticeWindow | None = None) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps(d, window))
        fh.write("\n")
