"""File formats: manifold specs, cycles and reports as versioned JSON.

Floats are written with 17 significant digits so reports are diff-stable
and re-parse to the same doubles.
"""

import json
import math
from importlib import resources
from pathlib import Path

import numpy as np

from .algebra import ManifoldSpec, MetricLieAlgebra
from .currents import Chain
from .errors import ParseError, SpecError
from .models import BUILTIN

MANIFOLD_SCHEMA = "isofill.manifold/1"
CYCLE_SCHEMA = "isofill.cycle/1"


# --- writer ----------------------------------------------------------------


def _scalar(x):
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if x is None:
        return "null"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        x = float(x)
        if not math.isfinite(x):
            raise ValueError(f"cannot serialize non-finite float {x}")
        out = format(x, ".17g")
        if not any(ch in out for ch in ".en"):
            out += ".0"
        return out
    if isinstance(x, str):
        return json.dumps(x, ensure_ascii=False)
    raise TypeError(f"cannot serialize {type(x).__name__}")


def _is_flat(seq):
    return all(not isinstance(v, (dict, list, tuple, np.ndarray)) for v in seq)


def dumps(obj, indent=0):
    """Deterministic JSON text with ``%.17g`` floats; flat lists stay on one line."""
    pad = "  " * indent
    inner = "  " * (indent + 1)
    if isinstance(obj, np.ndarray):
        obj = obj.tolist()
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{inner}{json.dumps(str(k))}: {dumps(v, indent + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + pad + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        if _is_flat(obj):
            return "[" + ", ".join(_scalar(v) for v in obj) + "]"
        items = [inner + dumps(v, indent + 1) for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + pad + "]"
    return _scalar(obj)


def write_json(path, obj):
    text = dumps(obj) + "\n"
    if path is None or str(path) == "-":
        return text
    Path(path).write_text(text, encoding="utf-8")
    return text


# --- reader helpers --------------------------------------------------------------


def _load(text, source):
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{source}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from None


def _field(doc, key, source, kind=None):
    if key not in doc:
        raise ParseError(f"{source}: missing field '{key}'")
    val = doc[key]
    if kind is not None and not isinstance(val, kind):
        raise ParseError(f"{source}: field '{key}' has type {type(val).__name__}")
    return val


def _numbers(val, where, source, length=None):
    if not isinstance(val, list) or not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in val):
        raise ParseError(f"{source}: field '{where}' must be a list of numbers")
    if length is not None and len(val) != length:
        raise ParseError(f"{source}: field '{where}' must have length {length}, got {len(val)}")
    return [float(v) for v in val]


def _check_schema(doc, expected, source):
    if not isinstance(doc, dict):
        raise ParseError(f"{source}: top level must be an object")
    schema = _field(doc, "schema", source, str)
    if schema != expected:
        raise ParseError(f"{source}: field 'schema' is {schema!r}, expected {expected!r}")


# --- manifolds -------------------------------------------------------------------


def manifold_to_dict(spec):
    alg = spec.algebra
    return {
        "schema": MANIFOLD_SCHEMA,
        "name": spec.name,
        "basis": list(alg.basis),
        "dim_m0": spec.dim_m0,
        "a_idx": list(alg.a_idx),
        "n_idx": list(alg.n_idx),
        "structure_constants": [[i, j, k, c] for i, j, k, c in alg.structure_constants],
        "gram": alg.gram.tolist(),
    }


def manifold_from_dict(doc, source="<manifold>"):
    _check_schema(doc, MANIFOLD_SCHEMA, source)
    basis = _field(doc, "basis", source, list)
    n = len(basis)
    a_idx = _field(doc, "a_idx", source, list)
    n_idx = _field(doc, "n_idx", source, list)
    consts = []
    for pos, entry in enumerate(_field(doc, "structure_constants", source, list)):
        where = f"structure_constants[{pos}]"
        if not isinstance(entry, list) or len(entry) != 4:
            raise ParseError(f"{source}: field '{where}' must be [i, j, k, c]")
        i, j, k, c = entry
        if not all(isinstance(x, int) and not isinstance(x, bool) for x in (i, j, k)):
            raise ParseError(f"{source}: field '{where}' indices must be integers")
        consts.append((i, j, k, _numbers([c], where, source)[0]))
    gram_rows = _field(doc, "gram", source, list)
    gram = [_numbers(row, f"gram[{r}]", source, n) for r, row in enumerate(gram_rows)]
    dim_m0 = doc.get("dim_m0", 0)
    if not isinstance(dim_m0, int) or isinstance(dim_m0, bool):
        raise ParseError(f"{source}: field 'dim_m0' must be an integer")
    try:
        alg = MetricLieAlgebra(tuple(basis), tuple(a_idx), tuple(n_idx), tuple(consts), np.array(gram))
        return ManifoldSpec(alg, dim_m0, str(doc.get("name", "")))
    except SpecError as exc:
        raise ParseError(f"{source}: {exc.args[0]}") from None


def load_manifold(ref):
    """A builtin name, a bundled data file name, or a path to a manifold JSON file."""
    if ref in BUILTIN:
        return BUILTIN[ref]()
    path = Path(ref)
    if not path.exists():
        raise ParseError(f"{ref}: no such file or builtin manifold (builtins: {', '.join(sorted(BUILTIN))})")
    return manifold_from_dict(_load(path.read_text(encoding="utf-8"), ref), ref)


# --- cycles ------------------------------------------------------------------------


def cycle_to_dict(chain, is_cycle=None):
    lay = chain.layout
    cut1, cut2 = lay.dim_m0, lay.dim_m0 + lay.dim_n
    points = chain.vertices()
    index = {p: i for i, p in enumerate(points)}
    cells = []
    for (kind, verts), m in chain.sorted_cells():
        if kind != "affine":
            raise ValueError("only affine chains can be written as cycle files")
        cells.append({"vertices": [index[p] for p in verts], "mult": int(m)})
    return {
        "schema": CYCLE_SCHEMA,
        "dim": chain.dim,
        "cycle": chain.is_cycle() if is_cycle is None else bool(is_cycle),
        "layout": [lay.dim_m0, lay.dim_n, lay.dim_a],
        "vertices": [{"m0": list(p[:cut1]), "u": list(p[cut1:cut2]), "h": list(p[cut2:])} for p in points],
        "cells": cells,
    }


def cycle_from_dict(doc, source="<cycle>", spec=None):
    _check_schema(doc, CYCLE_SCHEMA, source)
    dim = _field(doc, "dim", source, int)
    if dim < 0:
        raise ParseError(f"{source}: field 'dim' must be non-negative")
    layout = _field(doc, "layout", source, list)
    if len(layout) != 3 or not all(isinstance(x, int) and x >= 0 for x in layout):
        raise ParseError(f"{source}: field 'layout' must be three non-negative integers")
    if spec is not None and tuple(layout) != tuple(spec.layout):
        raise ParseError(f"{source}: layout {layout} does not match the manifold layout {list(spec.layout)}")
    dm0, dn, da = layout
    verts = []
    for pos, v in enumerate(_field(doc, "vertices", source, list)):
        if not isinstance(v, dict):
            raise ParseError(f"{source}: field 'vertices[{pos}]' must be an object")
        parts = []
        for key, size in (("m0", dm0), ("u", dn), ("h", da)):
            parts += _numbers(v.get(key, [] if size == 0 else None), f"vertices[{pos}].{key}", source, size)
        verts.append(parts)
    simplices, mults = [], []
    for pos, cell in enumerate(_field(doc, "cells", source, list)):
        where = f"cells[{pos}]"
        if not isinstance(cell, dict):
            raise ParseError(f"{source}: field '{where}' must be an object")
        idx = cell.get("vertices")
        if not isinstance(idx, list) or len(idx) != dim + 1 or not all(isinstance(i, int) for i in idx):
            raise ParseError(f"{source}: field '{where}.vertices' must list {dim + 1} vertex indices")
        if any(not 0 <= i < len(verts) for i in idx):
            raise ParseError(f"{source}: field '{where}.vertices' has an index out of range")
        m = cell.get("mult", 1)
        if not isinstance(m, int) or isinstance(m, bool) or m == 0:
            raise ParseError(f"{source}: field '{where}.mult' must be a non-zero integer")
        simplices.append(tuple(idx))
        mults.append(m)
    chain = Chain.from_simplices(dim, tuple(layout), np.array(verts).reshape(len(verts), dm0 + dn + da), simplices, mults)
    declared = doc.get("cycle", False)
    if declared and dim > 0 and not chain.is_cycle():
        raise ParseError(f"{source}: declared a cycle but its boundary is non-zero")
    return chain


def _bundled(name):
    return resources.files("isofill").joinpath("data", name)


def load_cycle(ref, spec=None):
    """A path to a cycle JSON file, or the name of a bundled cycle (e.g. ``circle_r1``)."""
    path = Path(ref)
    if path.exists():
        return cycle_from_dict(_load(path.read_text(encoding="utf-8"), ref), ref, spec)
    bundled = _bundled(ref if ref.endswith(".json") else ref + ".json")
    if bundled.is_file():
        return cycle_from_dict(_load(bundled.read_text(encoding="utf-8"), ref), ref, spec)
    raise ParseError(f"{ref}: no such cycle file")
