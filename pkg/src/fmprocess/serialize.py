"""JSON encoding of systems, cascades, chains, processes and reports.

Complex numbers are ``[re, im]`` pairs, matrices are lists of rows of
complex numbers, words are integer arrays.  Plain real numbers are
accepted on input.  Every document carries ``"schema_version"``.
"""

from __future__ import annotations

import json

import numpy as np

from .errors import SchemaError
from .fmsystem import FMSystem

__all__ = ["SCHEMA_VERSION", "encode_matrix", "decode_matrix", "system_to_json",
           "system_from_json", "cascade_spec_to_json", "cascade_spec_from_json",
           "chain_to_json", "chain_from_json", "process_to_json", "to_jsonable",
           "dumps", "flatten", "detect_kind"]

SCHEMA_VERSION = 1


def encode_complex(z):
    z = complex(z)
    return [float(z.real), float(z.imag)]


def encode_matrix(M):
    M = np.asarray(M, dtype=complex)
    if M.ndim != 2:
        raise SchemaError(f"expected a matrix, got shape {M.shape}")
    return [[encode_complex(z) for z in row] for row in M]


def _decode_entry(x, name):
    if isinstance(x, bool):
        raise SchemaError(f"{name}: booleans are not numbers")
    if isinstance(x, (int, float)):
        return complex(x)
    if isinstance(x, (list, tuple)) and len(x) == 2 and all(
            isinstance(v, (int, float)) and not isinstance(v, bool) for v in x):
        return complex(x[0], x[1])
    raise SchemaError(f"{name}: cannot read {x!r} as a complex number")


def decode_matrix(obj, name="matrix", rows=None, cols=None):
    if not isinstance(obj, list) or not all(isinstance(r, list) for r in obj):
        raise SchemaError(f"{name} must be a list of rows")
    data = [[_decode_entry(x, name) for x in r] for r in obj]
    widths = {len(r) for r in data}
    if len(widths) > 1:
        raise SchemaError(f"{name} has rows of different lengths")
    width = widths.pop() if widths else (cols or 0)
    M = np.array(data, dtype=complex).reshape(len(data), width)
    if rows is not None and cols is not None and M.size == 0:
        M = M.reshape(rows, cols)
    return M


def _require(obj, keys, what):
    if not isinstance(obj, dict):
        raise SchemaError(f"{what} must be a JSON object")
    missing = [k for k in keys if k not in obj]
    if missing:
        raise SchemaError(f"{what} is missing {', '.join(missing)}")


def _int(obj, key, what):
    v = obj[key]
    if not isinstance(v, int) or isinstance(v, bool):
        raise SchemaError(f"{what}.{key} must be an integer")
    return v


def system_to_json(sys: FMSystem):
    return {"schema_version": SCHEMA_VERSION, "kind": "system", "d": sys.d,
            "dim_x": sys.dim_x, "dim_u": sys.dim_u, "dim_y": sys.dim_y,
            "A": [encode_matrix(a) for a in sys.A], "B": [encode_matrix(b) for b in sys.B],
            "C": encode_matrix(sys.C), "D": encode_matrix(sys.D)}


def system_from_json(obj) -> FMSystem:
    _require(obj, ["A", "B", "C", "D"], "system")
    if not isinstance(obj["A"], list) or not isinstance(obj["B"], list):
        raise SchemaError("system.A and system.B must be lists of matrices")
    nx = obj.get("dim_x")
    nu = obj.get("dim_u")
    ny = obj.get("dim_y")
    A = [decode_matrix(a, "A_k", nx, nx) for a in obj["A"]]
    B = [decode_matrix(b, "B_k", nx, nu) for b in obj["B"]]
    C = decode_matrix(obj["C"], "C", ny, nx)
    D = decode_matrix(obj["D"], "D", ny, nu)
    if "d" in obj and _int(obj, "d", "system") != len(A):
        raise SchemaError(f"system.d = {obj['d']} but {len(A)} A-maps given")
    return FMSystem(A, B, C, D)


def cascade_spec_to_json(G: FMSystem, K: FMSystem, gamma, depth):
    return {"schema_version": SCHEMA_VERSION, "kind": "cascade", "G": system_to_json(G),
            "K": system_to_json(K), "gamma": encode_matrix(gamma), "depth": int(depth)}


def cascade_spec_from_json(obj):
    """Returns ``(G, K, gamma, depth)``; ``gamma`` may need reshaping when empty."""
    _require(obj, ["G", "K", "gamma"], "cascade")
    depth = _int(obj, "depth", "cascade") if "depth" in obj else None
    return (system_from_json(obj["G"]), system_from_json(obj["K"]),
            decode_matrix(obj["gamma"], "gamma"), depth)


def chain_to_json(spec):
    return {"schema_version": SCHEMA_VERSION, "kind": "chain", "n": spec.n, "m": spec.m,
            "u": encode_matrix(spec.u), "phi": encode_matrix(spec.phi),
            "psi": encode_matrix(spec.psi)}


def chain_from_json(obj):
    from .markov import MarkovChainSpec
    _require(obj, ["n", "m", "u", "phi", "psi"], "chain")
    return MarkovChainSpec(_int(obj, "n", "chain"), _int(obj, "m", "chain"),
                           decode_matrix(obj["u"], "u"), decode_matrix(obj["phi"], "phi"),
                           decode_matrix(obj["psi"], "psi"))


def process_to_json(proc):
    return {"schema_version": SCHEMA_VERSION, "kind": "process", "d": proc.d, "N": proc.N,
            "dim_h": proc.dim_h, "dim_E": proc.dim_E,
            "V": [encode_matrix(v) for v in proc.dense_V()],
            "levels": proc.level_descriptors()}


def detect_kind(obj):
    if not isinstance(obj, dict):
        raise SchemaError("top level must be a JSON object")
    if "kind" in obj:
        return obj["kind"]
    if "G" in obj and "K" in obj:
        return "cascade"
    if "u" in obj and "phi" in obj:
        return "chain"
    if "A" in obj:
        return "system"
    raise SchemaError("cannot tell which kind of document this is")


def to_jsonable(x):
    """Recursively convert numpy scalars and arrays, complex numbers and words."""
    from .freeword import Word
    if isinstance(x, dict):
        return {str(k): to_jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [to_jsonable(v) for v in x]
    if isinstance(x, Word):
        return x.to_json()
    if isinstance(x, np.ndarray):
        if np.iscomplexobj(x):
            if x.ndim == 2:
                return encode_matrix(x)
            return [to_jsonable(v) for v in x]
        return x.tolist()
    if isinstance(x, (np.bool_,)):
        return bool(x)
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, np.floating):
        return float(x)
    if isinstance(x, complex):
        return encode_complex(x)
    if isinstance(x, float) and not np.isfinite(x):
        return str(x)
    return x


def dumps(obj):
    return json.dumps(to_jsonable(obj), indent=2)


def flatten(obj, prefix=""):
    """``(path, value)`` rows for CSV output."""
    rows = []
    obj = to_jsonable(obj)
    if isinstance(obj, dict):
        for k, v in obj.items():
            rows.extend(flatten(v, f"{prefix}.{k}" if prefix else k))
    elif isinstance(obj, list):
        if not obj:
            rows.append((prefix, ""))
        for i, v in enumerate(obj):
            rows.extend(flatten(v, f"{prefix}[{i}]"))
    else:
        rows.append((prefix, "" if obj is None else obj))
    return rows
