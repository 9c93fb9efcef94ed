"""File formats and deterministic JSON.

Measures:  JSON ``{"atoms": [{"x": .., "w": ..}, ...]}``, CSV ``x,w``, or a
piecewise-uniform density ``{"density": [{"lo": .., "hi": .., "mass": ..}], "n": N}``
which is discretized on load.
Couplings: JSON ``{"rows": [{"x": .., "kernel": [{"y": .., "w": ..}]}]}`` or CSV ``x,y,w``.

Numbers may be JSON numbers or strings such as ``"-5/2"``.  On output exact
values are written as ``"p/q"`` strings and floats with 17 significant digits.
"""

from __future__ import annotations

import csv
import io
import json
import math
from fractions import Fraction
from numbers import Rational
from pathlib import Path

import numpy as np

from .coupling import Coupling
from .errors import ParseError
from .measure import DiscreteMeasure
from .numeric import fmt, to_scalar


def _num(value, mode: str):
    try:
        return to_scalar(value, mode)
    except (ValueError, TypeError, ZeroDivisionError) as exc:
        raise ParseError(f"not a number: {value!r}") from exc


def _rows_from_csv(text: str, width: int) -> list[list[str]]:
    rows = []
    for row in csv.reader(io.StringIO(text)):
        cells = [c.strip() for c in row]
        if not cells or all(c == "" for c in cells) or cells[0].startswith("#"):
            continue
        if len(cells) != width:
            raise ParseError(f"expected {width} columns, got {len(cells)}: {row}")
        rows.append(cells)
    # header row, if any, is the one whose first cell is not numeric
    if rows:
        try:
            Fraction(rows[0][0])
        except ValueError:
            rows = rows[1:]
    return rows


def measure_from_obj(obj, mode: str = "rational") -> DiscreteMeasure:
    if not isinstance(obj, dict):
        raise ParseError("measure JSON must be an object")
    if "density" in obj:
        from .figures import discretize_piecewise_uniform

        n = obj.get("n")
        if not isinstance(n, int) or n <= 0:
            raise ParseError("density specification needs a positive integer 'n'")
        try:
            pieces = [(_num(p["lo"], "rational"), _num(p["hi"], "rational"), _num(p["mass"], "rational"))
                      for p in obj["density"]]
        except (KeyError, TypeError) as exc:
            raise ParseError("density pieces need 'lo', 'hi' and 'mass'") from exc
        try:
            m = discretize_piecewise_uniform(pieces, n)
        except ValueError as exc:
            raise ParseError(str(exc)) from exc
        return m if mode == "rational" else DiscreteMeasure((float(x), float(w)) for x, w in m)
    try:
        atoms = [(_num(a["x"], mode), _num(a["w"], mode)) for a in obj["atoms"]]
    except (KeyError, TypeError) as exc:
        raise ParseError("measure JSON needs 'atoms' with 'x' and 'w'") from exc
    return DiscreteMeasure(atoms)


def parse_measure(text: str, fmt_hint: str = "json", mode: str = "rational") -> DiscreteMeasure:
    if fmt_hint == "json":
        try:
            obj = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ParseError(f"invalid JSON: {exc}") from exc
        return measure_from_obj(obj, mode)
    return DiscreteMeasure((_num(x, mode), _num(w, mode)) for x, w in _rows_from_csv(text, 2))


def coupling_from_obj(obj, mode: str = "rational") -> Coupling:
    try:
        rows = [
            (_num(r["x"], mode), DiscreteMeasure((_num(k["y"], mode), _num(k["w"], mode)) for k in r["kernel"]))
            for r in obj["rows"]
        ]
    except (KeyError, TypeError) as exc:
        raise ParseError("coupling JSON needs 'rows' with 'x' and 'kernel' entries") from exc
    return Coupling(rows)


def parse_coupling(text: str, fmt_hint: str = "json", mode: str = "rational") -> Coupling:
    if fmt_hint == "json":
        try:
            obj = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ParseError(f"invalid JSON: {exc}") from exc
        return coupling_from_obj(obj, mode)
    return Coupling.from_entries((_num(x, mode), _num(y, mode), _num(w, mode)) for x, y, w in _rows_from_csv(text, 3))


def _hint(path: str | Path) -> str:
    return "csv" if str(path).lower().endswith(".csv") else "json"


def load_measure(path: str | Path, mode: str = "rational") -> DiscreteMeasure:
    return parse_measure(Path(path).read_text(), _hint(path), mode)


def load_coupling(path: str | Path, mode: str = "rational") -> Coupling:
    return parse_coupling(Path(path).read_text(), _hint(path), mode)


def measure_to_obj(m: DiscreteMeasure) -> dict:
    return {"atoms": [{"x": x, "w": w} for x, w in m]}


def coupling_to_obj(p: Coupling) -> dict:
    return {"rows": [{"x": x, "kernel": [{"y": y, "w": w} for y, w in k]} for x, k in p.rows]}


def coupling_to_csv(p: Coupling) -> str:
    lines = ["x,y,w"] + [f"{fmt(x)},{fmt(y)},{fmt(w)}" for x, y, w in p.entries()]
    return "\n".join(lines) + "\n"


def _sorted_set(values) -> list:
    try:
        return sorted(values)
    except TypeError:
        return sorted(values, key=repr)


def _key(k) -> str:
    return fmt(k) if isinstance(k, (Rational, float)) and not isinstance(k, bool) else str(k)


def _encode(value, indent: int, level: int) -> str:
    pad = "\n" + " " * (indent * (level + 1)) if indent else ""
    end = "\n" + " " * (indent * level) if indent else ""
    sep = "," + pad if indent else ", "
    if value is None or isinstance(value, (bool, np.bool_)):
        return json.dumps(None if value is None else bool(value))
    if isinstance(value, (Rational, float, np.floating, np.integer)):
        if isinstance(value, np.integer):
            value = int(value)
        if isinstance(value, np.floating):
            value = float(value)
        if isinstance(value, Rational) and not isinstance(value, int):
            # integral fractions print as bare integers so equal values encode alike
            return fmt(value) if value.denominator == 1 else json.dumps(fmt(value))
        if isinstance(value, int):
            return str(value)
        if math.isnan(value):
            return json.dumps("nan")
        return json.dumps(fmt(value)) if math.isinf(value) else format(value, ".17g")
    if isinstance(value, str):
        return json.dumps(value)
    if isinstance(value, dict):
        if not value:
            return "{}"
        items = [f"{json.dumps(_key(k))}: {_encode(v, indent, level + 1)}" for k, v in value.items()]
        return "{" + pad + sep.join(items) + end + "}"
    if isinstance(value, (list, tuple, frozenset, set, np.ndarray)):
        seq = _sorted_set(value) if isinstance(value, (set, frozenset)) else list(value)
        if not seq:
            return "[]"
        return "[" + pad + sep.join(_encode(v, indent, level + 1) for v in seq) + end + "]"
    if hasattr(value, "to_dict"):
        return _encode(value.to_dict(), indent, level)
    return json.dumps(str(value))


def dumps(obj, indent: int = 2) -> str:
    """Deterministic JSON: insertion-ordered keys, ``"p/q"`` for exact values, 17-digit floats."""
    return _encode(obj, indent, 0) + "\n"
