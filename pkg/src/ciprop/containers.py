"""On-disk containers for matrices.

Two interchangeable formats, chosen by file extension:

``.json``
    A self-describing JSON object::

        {"format": "ciprop-matrix", "version": 1, "shape": [R, C],
         "kind": "exp" | "pos" | "neg" | "maxnorm" | "pcorr" | null,
         "node_ids": [...] | null, "data": [[...], ...]}

``.cim``
    A single binary file: one UTF-8 JSON header line (same keys as above
    minus ``data``, plus ``dtype``) terminated by ``\\n``, followed by the
    raw little-endian C-order float64 payload.

Any external tool that can emit either layout can feed matrices into the
propagation CLI.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .errors import DataError

_FORMAT = "ciprop-matrix"
_VERSION = 1


def save_matrix(path, matrix, kind=None, node_ids=None):
    """Write a 2-D float array to ``path`` (.json or .cim)."""
    path = Path(path)
    m = np.asarray(matrix, dtype=np.float64)
    if m.ndim != 2:
        raise DataError(f"matrix container stores 2-D arrays, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise DataError("matrix contains non-finite values")
    if node_ids is not None and len(node_ids) != m.shape[0]:
        raise DataError(f"{len(node_ids)} node_ids for {m.shape[0]} matrix rows")
    header = {
        "format": _FORMAT,
        "version": _VERSION,
        "shape": [int(m.shape[0]), int(m.shape[1])],
        "kind": kind,
        "node_ids": list(node_ids) if node_ids is not None else None,
    }
    if path.suffix == ".json":
        header["data"] = m.tolist()
        path.write_text(json.dumps(header))
    elif path.suffix == ".cim":
        header["dtype"] = "<f8"
        with open(path, "wb") as fh:
            fh.write(json.dumps(header).encode("utf-8") + b"\n")
            fh.write(np.ascontiguousarray(m, dtype="<f8").tobytes())
    else:
        raise DataError(f"unknown matrix container extension {path.suffix!r} (use .json or .cim)")


def load_matrix(path):
    """Read a matrix container; returns ``(array, meta)``.

    ``meta`` carries the ``kind`` and ``node_ids`` fields (possibly None).
    """
    path = Path(path)
    if not path.exists():
        raise DataError(f"matrix file not found: {path}")
    if path.suffix == ".json":
        try:
            obj = json.loads(path.read_text())
        except json.JSONDecodeError as exc:
            raise DataError(f"{path}: not valid JSON ({exc})") from exc
        _check_header(obj, path)
        data = np.asarray(obj["data"], dtype=np.float64)
    elif path.suffix == ".cim":
        with open(path, "rb") as fh:
            line = fh.readline()
            try:
                obj = json.loads(line.decode("utf-8"))
            except (UnicodeDecodeError, json.JSONDecodeError) as exc:
                raise DataError(f"{path}: bad .cim header ({exc})") from exc
            _check_header(obj, path)
            payload = fh.read()
        rows, cols = obj["shape"]
        expected = rows * cols * 8
        if len(payload) != expected:
            raise DataError(f"{path}: payload is {len(payload)} bytes, expected {expected}")
        data = np.frombuffer(payload, dtype="<f8").reshape(rows, cols).copy()
    else:
        raise DataError(f"unknown matrix container extension {path.suffix!r} (use .json or .cim)")
    if list(data.shape) != list(obj["shape"]):
        raise DataError(f"{path}: data shape {data.shape} disagrees with header {obj['shape']}")
    if not np.all(np.isfinite(data)):
        raise DataError(f"{path}: matrix contains non-finite values")
    meta = {"kind": obj.get("kind"), "node_ids": obj.get("node_ids")}
    return data, meta


def _check_header(obj, path):
    if not isinstance(obj, dict) or obj.get("format") != _FORMAT:
        raise DataError(f"{path}: not a {_FORMAT} container")
    if obj.get("version") != _VERSION:
        raise DataError(f"{path}: unsupported container version {obj.get('version')}")
    shape = obj.get("shape")
    if (
        not isinstance(shape, list)
        or len(shape) != 2
        or not all(isinstance(s, int) and s >= 0 for s in shape)
    ):
        raise DataError(f"{path}: bad shape field {shape!r}")
