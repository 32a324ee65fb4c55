"""Operator and field files: JSON operators, JSON-header grid fields, catalog references."""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .errors import ArgumentError
from .fields import GridField
from .operator import OperatorSpec
from .poly import MultiPoly

PAYLOAD_SENTINEL = b"\n--payload--\n"


def _parse_json(text, source):
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ArgumentError(f"{source}: line {exc.lineno} column {exc.colno}: {exc.msg}") from None


def _require(obj, key, source, kind=None):
    if key not in obj:
        raise ArgumentError(f"{source}: missing key {key!r}")
    value = obj[key]
    if kind is not None and (not isinstance(value, kind) or isinstance(value, bool)):
        raise ArgumentError(f"{source}: key {key!r} must be {getattr(kind, '__name__', kind)}")
    return value


def _matrix(entries, rows, cols, n, where):
    if not isinstance(entries, list) or len(entries) != rows:
        raise ArgumentError(f"{where}: expected {rows} rows")
    out = np.empty((rows, cols), dtype=object)
    for i, row in enumerate(entries):
        if not isinstance(row, list) or len(row) != cols:
            raise ArgumentError(f"{where}[{i}]: expected {cols} entries")
        for j, e in enumerate(row):
            out[i, j] = MultiPoly.from_json(e, n, f"{where}[{i}][{j}]")
    return out


def operator_from_dict(obj, source="operator"):
    if not isinstance(obj, dict):
        raise ArgumentError(f"{source}: top level must be an object")
    n = _require(obj, "n", source, int)
    E = _require(obj, "dimE", source, int)
    F = _require(obj, "dimF", source, int)
    if min(n, E, F) < 1:
        raise ArgumentError(f"{source}: n, dimE and dimF must be positive")
    A = _require(obj, "A", source, list)
    if len(A) != n:
        raise ArgumentError(f"{source}: A must hold {n} matrices, one per partial derivative, got {len(A)}")
    mats = np.array([_matrix(A[j], F, E, n, f"{source}: A[{j}]") for j in range(n)], dtype=object)
    B = obj.get("B")
    Bm = np.full((F, E), MultiPoly(n), dtype=object) if B is None else _matrix(B, F, E, n, f"{source}: B")
    return OperatorSpec(n, E, F, mats, Bm, name=str(obj.get("name", "operator")))


def operator_to_dict(op):
    def mat(m):
        return [[e.to_json() for e in row] for row in m]

    return {"name": op.name, "n": op.n, "dimE": op.dimE, "dimF": op.dimF, "A": [mat(m) for m in op.A], "B": mat(op.B)}


def load_operator(ref):
    """A catalog id or the path of an operator JSON file."""
    from . import catalog

    path = Path(ref)
    if path.suffix == ".json" or path.exists():
        if not path.exists():
            raise ArgumentError(f"operator file {ref} does not exist")
        return operator_from_dict(_parse_json(path.read_text(), str(path)), str(path))
    return catalog.get_operator(ref)


def dump_operator(op, path):
    Path(path).write_text(json.dumps(operator_to_dict(op), indent=2, sort_keys=True) + "\n")


def write_grid_field(fld, path, sibling=False):
    """Header JSON then raw little-endian float64 samples, inline after a sentinel or in ``<path>.bin``."""
    path = Path(path)
    header = {
        "n": fld.n,
        "dimE": fld.dimE,
        "origin": list(map(float, fld.origin)),
        "extents": list(map(float, fld.extents)),
        "shape": list(fld.shape),
        "order": "row-major",
        "dtype": "f64-le",
        "name": fld.name,
    }
    payload = np.ascontiguousarray(fld.samples, dtype="<f8").tobytes()
    if sibling:
        header["payload"] = path.name + ".bin"
        path.with_name(header["payload"]).write_bytes(payload)
        path.write_text(json.dumps(header, sort_keys=True) + "\n")
    else:
        path.write_bytes(json.dumps(header, sort_keys=True).encode() + PAYLOAD_SENTINEL + payload)


def read_grid_field(path):
    path = Path(path)
    raw = path.read_bytes()
    head, sep, payload = raw.partition(PAYLOAD_SENTINEL)
    try:
        text = head.decode("utf-8")
    except UnicodeDecodeError:
        raise ArgumentError(f"{path}: header is not UTF-8 JSON") from None
    header = _parse_json(text, str(path))
    if not isinstance(header, dict):
        raise ArgumentError(f"{path}: header must be an object")
    if "catalog" in header:
        from . import catalog

        return catalog.get_field(header["catalog"])
    n = _require(header, "n", str(path), int)
    E = _require(header, "dimE", str(path), int)
    shape = _require(header, "shape", str(path), list)
    origin = _require(header, "origin", str(path), list)
    extents = _require(header, "extents", str(path), list)
    if header.get("order", "row-major") != "row-major" or header.get("dtype", "f64-le") != "f64-le":
        raise ArgumentError(f"{path}: only row-major f64-le payloads are supported")
    if len(shape) != n or len(origin) != n or len(extents) != n:
        raise ArgumentError(f"{path}: shape, origin and extents need {n} entries")
    if not sep:
        if "payload" not in header:
            raise ArgumentError(f"{path}: no inline payload and no 'payload' sibling file named")
        sib = path.with_name(header["payload"])
        if not sib.exists():
            raise ArgumentError(f"{path}: payload file {sib} does not exist")
        payload = sib.read_bytes()
    expected = int(np.prod(shape)) * E
    data = np.frombuffer(payload, dtype="<f8")
    if data.size != expected:
        raise ArgumentError(f"{path}: payload holds {data.size} values, header implies {expected}")
    return GridField(tuple(map(float, origin)), tuple(map(float, extents)), data.reshape(tuple(shape) + (E,)).copy(), name=header.get("name", path.stem))


def load_field(ref):
    """A catalog id or the path of a grid field file."""
    from . import catalog

    path = Path(ref)
    if path.exists():
        return read_grid_field(path)
    if path.suffix in (".json", ".grid", ".bin"):
        raise ArgumentError(f"field file {ref} does not exist")
    return catalog.get_field(ref)
