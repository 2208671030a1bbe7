"""JSON model files and deterministic JSON reports.

A model file is an object ``{"schema_version", "kind", "matrices"}`` with
an optional ``"params"`` object. Matrices are 2-D lists; a complex entry is
a two-element list ``[re, im]`` and a bare number is real.
"""
import enum
import json
import math

import numpy as np

from .exceptions import InputError

__all__ = [
    "SCHEMA_VERSION",
    "KINDS",
    "MalformedModel",
    "Model",
    "parse_matrix",
    "encode",
    "load_model",
    "parse_model",
    "dumps_report",
]

SCHEMA_VERSION = "1"

KINDS = {
    "real_ss": (("A", "B", "C"), ("D", "Q", "R")),
    "complex_ss": (("A", "B", "C"), ("D", "Q", "R")),
    "uncertain_plant": (("A", "B1", "B2", "C1"), ()),
    "quantum_spec": (("M1", "N1"), ("M2", "N2", "S")),
    "quantum_plant": (("F", "G1", "G2", "H1", "H2", "K12", "K21"), ("G0", "K20")),
    "physreal_spec": (("R", "Lambda"), ()),
}


class MalformedModel(InputError):
    """The model file cannot be parsed or lacks required entries."""


class Model:
    def __init__(self, kind, matrices, params=None, source=None):
        self.kind = kind
        self.matrices = matrices
        self.params = params or {}
        self.source = source

    def __getitem__(self, key):
        return self.matrices[key]

    def get(self, key, default=None):
        return self.matrices.get(key, default)


def _scalar(x, where):
    if isinstance(x, bool):
        raise MalformedModel(f"{where}: booleans are not numbers")
    if isinstance(x, (int, float)):
        return complex(x, 0.0)
    if (isinstance(x, list) and len(x) == 2
            and all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in x)):
        return complex(x[0], x[1])
    raise MalformedModel(f"{where}: expected a number or [re, im], got {x!r}")


def parse_matrix(data, name="matrix"):
    """Convert a nested list to a float array (complex if any entry is)."""
    if not isinstance(data, list):
        raise MalformedModel(f"{name}: expected a 2-D list")
    if not data:
        return np.zeros((0, 0))
    if not all(isinstance(row, list) for row in data):
        raise MalformedModel(f"{name}: expected a 2-D list of rows")
    width = len(data[0])
    if any(len(row) != width for row in data):
        raise MalformedModel(f"{name}: rows have different lengths")
    vals = [[_scalar(x, f"{name}[{i}][{j}]") for j, x in enumerate(row)]
            for i, row in enumerate(data)]
    arr = np.array(vals, dtype=complex).reshape(len(data), width)
    if not np.all(np.isfinite(arr)):
        raise MalformedModel(f"{name}: non-finite entries")
    if np.all(arr.imag == 0):
        return arr.real.copy()
    return arr


def parse_model(doc, source=None):
    if not isinstance(doc, dict):
        raise MalformedModel("model file must contain a JSON object")
    version = doc.get("schema_version")
    if version is None:
        raise MalformedModel("missing schema_version")
    if str(version) != SCHEMA_VERSION:
        raise MalformedModel(f"unsupported schema_version {version!r}")
    kind = doc.get("kind")
    if kind not in KINDS:
        raise MalformedModel(f"unknown kind {kind!r}; expected one of {sorted(KINDS)}")
    raw = doc.get("matrices")
    if not isinstance(raw, dict) or not raw:
        raise MalformedModel("matrices must be a non-empty object")
    required, optional = KINDS[kind]
    missing = [k for k in required if k not in raw]
    if missing:
        raise MalformedModel(f"kind {kind!r} requires matrices {missing}")
    unknown = sorted(set(raw) - set(required) - set(optional))
    if unknown:
        raise MalformedModel(f"unexpected matrices {unknown} for kind {kind!r}")
    mats = {k: parse_matrix(v, k) for k, v in raw.items()}
    params = doc.get("params", {})
    if not isinstance(params, dict):
        raise MalformedModel("params must be an object")
    if kind == "real_ss" and any(np.iscomplexobj(m) for m in mats.values()):
        raise MalformedModel("real_ss model has complex entries")
    return Model(kind, mats, params, source)


def load_model(path):
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise MalformedModel(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise MalformedModel(f"{path}: invalid JSON ({exc})") from exc
    return parse_model(doc, source=str(path))


def _float(x):
    x = float(x)
    if math.isfinite(x):
        return x
    return "nan" if math.isnan(x) else ("inf" if x > 0 else "-inf")


def encode(obj):
    """Convert report values (arrays, complex, numpy scalars) to JSON-ready data."""
    if isinstance(obj, enum.Enum):
        return encode(obj.value)
    if isinstance(obj, dict):
        return {str(k): encode(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [encode(v) for v in obj]
    if isinstance(obj, np.ndarray):
        if np.iscomplexobj(obj) and np.any(obj.imag != 0):
            return encode(obj.tolist())
        return encode(np.real(obj).tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        return [_float(obj.real), _float(obj.imag)]
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return _float(obj)
    if obj is None or isinstance(obj, str):
        return obj
    raise TypeError(f"cannot encode {type(obj).__name__}")


def dumps_report(report):
    """Deterministic JSON text: sorted keys, fixed indentation, trailing newline."""
    return json.dumps(encode(report), sort_keys=True, indent=2, allow_nan=False) + "\n"

