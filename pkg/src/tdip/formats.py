"""JSON documents for instances, decompositions and reports.

Instance document::

    {"rows": 1, "cols": 2, "matrix": [[0, 0, 1], [0, 1, 1]], "b": [2],
     "lower": [0, 0], "upper": ["+inf", 2],
     "objective": [{"type": "linear", "weight": 2},
                   {"type": "quad", "a": 1, "b": 0, "c": 0}]}

Integers may be written as decimal strings of any length; bounds also accept
"-inf" and "+inf".  Piecewise terms are
``{"type": "pwl", "breakpoints": [...], "values": [...], "left_slope": s,
"right_slope": s}`` with both slopes optional.
"""

from __future__ import annotations

import json
from typing import Any

from .errors import TdipError
from .instance import INF, IpInstance, Linear, PiecewiseLinear, Quadratic, SeparableObjective, SparseIntMatrix
from .structure import DUAL, PRIMAL, TdDecomposition


class ParseError(TdipError):
    def __init__(self, msg: str, line: int | None = None, col: int | None = None) -> None:
        self.line, self.col = line, col
        where = f" (line {line}, column {col})" if line is not None else ""
        super().__init__(msg + where)


def _load(text: str) -> Any:
    try:
        return json.loads(text)
    except json.JSONDecodeError as e:
        raise ParseError(f"malformed JSON: {e.msg}", e.lineno, e.colno) from None


def _int(v, where: str) -> int:
    if isinstance(v, bool):
        raise ParseError(f"{where}: expected an integer, got a boolean")
    if isinstance(v, int):
        return v
    if isinstance(v, str):
        s = v.strip()
        body = s[1:] if s[:1] in "+-" else s
        if body.isdigit():
            return int(s)
    if isinstance(v, float) and v.is_integer():
        return int(v)
    raise ParseError(f"{where}: expected an integer, got {v!r}")


def _bound(v, where: str):
    if v in ("-inf", "+inf", "inf"):
        return -INF if v == "-inf" else INF
    return _int(v, where)


def _term(d, where: str):
    if not isinstance(d, dict) or "type" not in d:
        raise ParseError(f"{where}: expected an object with a \"type\" key")
    kind = d["type"]
    if kind == "linear":
        return Linear(_int(d.get("weight", 0), where + ".weight"))
    if kind == "quad":
        return Quadratic(*(_int(d.get(k, 0), f"{where}.{k}") for k in ("a", "b", "c")))
    if kind == "pwl":
        bp = [_int(v, f"{where}.breakpoints") for v in d.get("breakpoints", [])]
        vals = [_int(v, f"{where}.values") for v in d.get("values", [])]
        ls = d.get("left_slope")
        rs = d.get("right_slope")
        return PiecewiseLinear(tuple(bp), tuple(vals),
                               None if ls is None else _int(ls, where + ".left_slope"),
                               None if rs is None else _int(rs, where + ".right_slope"))
    raise ParseError(f"{where}: unknown term type {kind!r}")


def instance_from_dict(doc: dict) -> IpInstance:
    if not isinstance(doc, dict):
        raise ParseError("instance document must be a JSON object")
    for key in ("rows", "cols", "matrix", "b", "lower", "upper", "objective"):
        if key not in doc:
            raise ParseError(f"missing key {key!r}")
    rows, cols = _int(doc["rows"], "rows"), _int(doc["cols"], "cols")
    entries = {}
    for k, t in enumerate(doc["matrix"]):
        if not isinstance(t, list) or len(t) != 3:
            raise ParseError(f"matrix[{k}]: expected an [i, j, v] triplet")
        i, j, v = (_int(x, f"matrix[{k}]") for x in t)
        if not (0 <= i < rows and 0 <= j < cols):
            raise ParseError(f"matrix[{k}]: entry ({i},{j}) outside a {rows}x{cols} matrix")
        if (i, j) in entries:
            raise ParseError(f"matrix[{k}]: duplicate entry ({i},{j})")
        if v:
            entries[(i, j)] = v
    a = SparseIntMatrix(rows, cols, tuple((i, j, v) for (i, j), v in entries.items()))
    b = tuple(_int(v, f"b[{k}]") for k, v in enumerate(doc["b"]))
    lower = tuple(_bound(v, f"lower[{k}]") for k, v in enumerate(doc["lower"]))
    upper = tuple(_bound(v, f"upper[{k}]") for k, v in enumerate(doc["upper"]))
    terms = tuple(_term(d, f"objective[{k}]") for k, d in enumerate(doc["objective"]))
    return IpInstance(a, b, lower, upper, SeparableObjective(terms))


def parse_instance_text(text: str) -> IpInstance:
    return instance_from_dict(_load(text))


def parse_instance(path: str) -> IpInstance:
    with open(path, encoding="utf-8") as fh:
        return parse_instance_text(fh.read())


def _big(v: int):
    return v if abs(v) < 2**53 else str(v)


def _bound_out(v):
    if v == INF:
        return "+inf"
    if v == -INF:
        return "-inf"
    return _big(v)


def _term_out(t) -> dict:
    if isinstance(t, Linear):
        return {"type": "linear", "weight": _big(t.weight)}
    if isinstance(t, Quadratic):
        return {"type": "quad", "a": _big(t.a), "b": _big(t.b), "c": _big(t.c)}
    if isinstance(t, PiecewiseLinear):
        out = {"type": "pwl", "breakpoints": [_big(v) for v in t.breakpoints],
               "values": [_big(v) for v in t.values]}
        if t.left_slope is not None:
            out["left_slope"] = _big(t.left_slope)
        if t.right_slope is not None:
            out["right_slope"] = _big(t.right_slope)
        return out
    raise TypeError(f"cannot serialize objective term {type(t).__name__}")


def instance_to_dict(inst: IpInstance) -> dict:
    return {
        "rows": inst.a.rows,
        "cols": inst.a.cols,
        "matrix": [[i, j, _big(v)] for i, j, v in inst.a.entries],
        "b": [_big(v) for v in inst.b],
        "lower": [_bound_out(v) for v in inst.lower],
        "upper": [_bound_out(v) for v in inst.upper],
        "objective": [_term_out(t) for t in inst.objective.terms],
    }


def serialize_instance(inst: IpInstance) -> str:
    return json.dumps(instance_to_dict(inst), indent=1)


# ---------------------------------------------------------------------------
# decompositions


def td_from_dict(doc: dict) -> TdDecomposition:
    if not isinstance(doc, dict) or "parent" not in doc:
        raise ParseError("decomposition document needs a \"parent\" array")
    orient = doc.get("orientation", PRIMAL)
    if orient not in (PRIMAL, DUAL):
        raise ParseError(f"orientation must be {PRIMAL!r} or {DUAL!r}")
    parent = tuple(_int(v, f"parent[{k}]") for k, v in enumerate(doc["parent"]))
    try:
        return TdDecomposition(parent, orient)
    except TdipError as e:
        raise ParseError(f"invalid decomposition: {e}") from None


def parse_td(path: str) -> TdDecomposition:
    with open(path, encoding="utf-8") as fh:
        return td_from_dict(_load(fh.read()))


def dumps(obj: Any) -> str:
    """Deterministic JSON text (sorted keys, fixed indentation)."""
    return json.dumps(obj, indent=2, sort_keys=True)
