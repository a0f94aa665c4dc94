"""JSON encoding of matrices and maps.

Complex scalars are ``[re, im]`` pairs; matrices are nested row lists.  A map
document is ``{"dim_in", "dim_out", "repr", "data"}`` where ``repr`` is one of
``kraus``, ``superop``, ``choi``, ``schur`` or ``state``.
"""

from __future__ import annotations

import json

import numpy as np

from .errors import MalformedInput
from .superop import (
    ChoiMatrix,
    SuperOp,
    choi,
    from_choi,
    from_kraus,
    schur_map,
    schur_multipliers,
    state_map,
)

REPRS = ("kraus", "superop", "choi", "schur", "state")


def encode_complex(z) -> list:
    z = complex(z)
    return [z.real + 0.0, z.imag + 0.0]


def encode_matrix(A) -> list:
    A = np.asarray(A, dtype=complex)
    if A.ndim == 1:
        return [encode_complex(z) for z in A]
    return [[encode_complex(z) for z in row] for row in A]


def decode_matrix(data) -> np.ndarray:
    try:
        arr = np.asarray(data, dtype=float)
    except (TypeError, ValueError) as exc:
        raise MalformedInput(f"not a numeric array: {exc}") from exc
    if arr.ndim < 2 or arr.shape[-1] != 2:
        raise MalformedInput("complex entries must be [re, im] pairs")
    return arr[..., 0] + 1j * arr[..., 1]


def _square(M, rows, cols, what):
    if M.shape != (rows, cols):
        raise MalformedInput(f"{what} has shape {M.shape}, expected {(rows, cols)}")
    return M


def map_to_json(phi: SuperOp, repr: str = "superop") -> dict:
    n, m = phi.dim_in, phi.dim_out
    if repr == "superop":
        data = encode_matrix(phi.matrix)
    elif repr == "choi":
        data = encode_matrix(choi(phi).matrix)
    elif repr == "schur":
        mult = schur_multipliers(phi)
        if mult is None:
            raise ValueError("map is not a Schur map")
        data = encode_matrix(mult)
    else:
        raise ValueError(f"cannot export representation {repr!r}; use superop, choi or schur")
    return {"dim_in": n, "dim_out": m, "repr": repr, "data": data}


def kraus_to_json(ops) -> dict:
    ops = [np.asarray(S, dtype=complex) for S in ops]
    m, n = ops[0].shape
    return {"dim_in": n, "dim_out": m, "repr": "kraus", "data": [encode_matrix(S) for S in ops]}


def state_to_json(D) -> dict:
    D = np.asarray(D, dtype=complex)
    n = D.shape[0]
    return {"dim_in": n, "dim_out": n, "repr": "state", "data": encode_matrix(D)}


def map_from_json(doc) -> SuperOp:
    """Build a :class:`SuperOp` from a parsed map document."""
    if not isinstance(doc, dict):
        raise MalformedInput("map document must be a JSON object")
    try:
        n, m, rep, data = int(doc["dim_in"]), int(doc["dim_out"]), doc["repr"], doc["data"]
    except (KeyError, TypeError, ValueError) as exc:
        raise MalformedInput(f"missing or invalid field: {exc}") from exc
    if n < 1 or m < 1:
        raise MalformedInput("dimensions must be positive")
    if rep not in REPRS:
        raise MalformedInput(f"unknown repr {rep!r}")
    if rep == "kraus":
        if not isinstance(data, list) or not data:
            raise MalformedInput("kraus data must be a nonempty list of matrices")
        ops = [_square(decode_matrix(S), m, n, "Kraus operator") for S in data]
        return from_kraus(ops)
    M = decode_matrix(data)
    if rep == "superop":
        return SuperOp.square(_square(M, m * m, n * n, "superop matrix"), n, m)
    if rep == "choi":
        return from_choi(ChoiMatrix(n, m, _square(M, n * m, n * m, "Choi matrix")))
    if n != m:
        raise MalformedInput(f"repr {rep!r} needs dim_in == dim_out")
    if rep == "schur":
        return schur_map(_square(M, n, n, "multiplier matrix"))
    return state_map(_square(M, n, n, "density matrix"))


def load_map(path) -> SuperOp:
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise MalformedInput(f"cannot read {path}: {exc}") from exc
    return map_from_json(doc)


def dumps(doc) -> str:
    return json.dumps(doc, indent=2, sort_keys=True, ensure_ascii=False)
