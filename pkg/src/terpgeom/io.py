"""JSON reading and writing of topological data and lattices.

Schema::

    {"mu": 3, "weight": 0, "alphaRef": ["-5/4", "0", "5/4"],
     "N": [[[re, im], ...], ...], "S": ..., "kappa": ..., "Pmat": ...,
     "C": [C_1, C_2, ...]}

Matrix entries are ``[re, im]`` pairs; plain numbers are accepted on input.
"""
from __future__ import annotations

import json
import math
from fractions import Fraction
from pathlib import Path

import numpy as np

from .errors import ValidationError
from .laurent import FracExponent
from .terp import Lattice, TopologicalData

__all__ = ["fmt", "to_jsonable", "dumps", "matrix_from_json", "matrix_to_json",
           "load_lattice", "lattice_from_dict", "lattice_to_dict", "save_lattice"]

SIG_DIGITS = 12


def fmt(x: float) -> str:
    """Float with 12 significant digits (``repr``-free, platform stable)."""
    x = float(x)
    if math.isnan(x) or math.isinf(x):
        return json.dumps(x)
    if x == 0:
        return "0"
    return format(x, f".{SIG_DIGITS}g")


class _Num(float):
    """Float that serialises with :func:`fmt`."""

    def __repr__(self):
        return fmt(self)


def to_jsonable(obj):
    """Recursively convert numpy and complex values to plain JSON types."""
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return to_jsonable(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        return [_Num(obj.real), _Num(obj.imag)]
    if isinstance(obj, (float, np.floating)):
        return _Num(obj)
    if isinstance(obj, (Fraction, FracExponent)):
        return str(obj)
    return obj


def _encode(o):
    if isinstance(o, _Num):
        yield fmt(o)
    elif isinstance(o, dict):
        yield "{"
        for i, (k, v) in enumerate(o.items()):
            if i:
                yield ", "
            yield json.dumps(k)
            yield ": "
            yield from _encode(v)
        yield "}"
    elif isinstance(o, list):
        yield "["
        for i, v in enumerate(o):
            if i:
                yield ", "
            yield from _encode(v)
        yield "]"
    else:
        yield json.dumps(o)


def dumps(obj) -> str:
    """Deterministic JSON text with 12-significant-digit floats."""
    return "".join(_encode(to_jsonable(obj)))


def matrix_from_json(data, mu: int, name: str) -> np.ndarray:
    try:
        rows = [[complex(e[0], e[1]) if isinstance(e, (list, tuple)) else complex(e) for e in row]
                for row in data]
        M = np.array(rows, dtype=complex)
    except (TypeError, ValueError, IndexError) as exc:
        raise ValidationError(f"{name}: malformed matrix ({exc})") from None
    if M.shape != (mu, mu):
        raise ValidationError(f"{name} must be {mu}x{mu}, got {M.shape}")
    return M


def matrix_to_json(M) -> list:
    M = np.asarray(M, dtype=complex)
    return [[[float(z.real), float(z.imag)] for z in row] for row in M]


_REQUIRED = ("mu", "weight", "alphaRef", "N", "S", "kappa", "Pmat")


def lattice_from_dict(d: dict) -> Lattice:
    """Build a validated :class:`Lattice` from the schema dictionary."""
    if not isinstance(d, dict):
        raise ValidationError("top-level JSON value must be an object")
    missing = [k for k in _REQUIRED if k not in d]
    if missing:
        raise ValidationError(f"missing fields: {', '.join(missing)}")
    mu = d["mu"]
    if not isinstance(mu, int) or mu < 1:
        raise ValidationError("mu must be a positive integer")
    if not isinstance(d["weight"], int):
        raise ValidationError("weight must be an integer")
    try:
        alpha = [FracExponent.parse(a) for a in d["alphaRef"]]
    except (TypeError, ValueError) as exc:
        raise ValidationError(f"alphaRef: {exc}") from None
    mats = {k: matrix_from_json(d[k], mu, k) for k in ("N", "S", "kappa", "Pmat")}
    topo = TopologicalData(mu, d["weight"], alpha, **mats).validate()
    C = [matrix_from_json(c, mu, f"C[{k}]") for k, c in enumerate(d.get("C", []), 1)]
    return Lattice(topo, C)


def lattice_to_dict(lat: Lattice) -> dict:
    t = lat.topo
    return {
        "mu": t.mu,
        "weight": t.weight,
        "alphaRef": [str(a) for a in t.alpha_ref],
        "N": matrix_to_json(t.N),
        "S": matrix_to_json(t.S),
        "kappa": matrix_to_json(t.kappa),
        "Pmat": matrix_to_json(t.Pmat),
        "C": [matrix_to_json(c) for c in lat.C],
    }


def load_lattice(path) -> Lattice:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ValidationError(f"cannot read {path}: {exc.strerror}") from None
    try:
        d = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"malformed JSON in {path}: {exc}") from None
    return lattice_from_dict(d)


def save_lattice(lat: Lattice, path) -> None:
    """Write the schema JSON with one top-level field per line."""
    d = lattice_to_dict(lat)
    body = ",\n".join(f" {json.dumps(k)}: {json.dumps(v)}" for k, v in d.items())
    Path(path).write_text("{\n" + body + "\n}\n")
