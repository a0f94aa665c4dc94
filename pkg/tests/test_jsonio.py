import json

import numpy as np
import pytest

from qposmaps.errors import MalformedInput
from qposmaps.generators import random_cp_map, random_density, random_kraus, schur_counterexample
from qposmaps.jsonio import (
    decode_matrix,
    dumps,
    encode_matrix,
    kraus_to_json,
    load_map,
    map_from_json,
    map_to_json,
    state_to_json,
)
from qposmaps.superop import from_kraus, state_map


def test_matrix_round_trip(rng):
    A = rng.normal(size=(3, 2)) + 1j * rng.normal(size=(3, 2))
    assert np.array_equal(decode_matrix(json.loads(json.dumps(encode_matrix(A)))), A)


@pytest.mark.parametrize("rep", ["superop", "choi"])
def test_map_round_trip(rng, rep):
    phi = random_cp_map(3, 2, rng)
    back = map_from_json(json.loads(dumps(map_to_json(phi, rep))))
    assert np.allclose(back.matrix, phi.matrix, atol=1e-14)


def test_schur_kraus_state_round_trip(rng):
    phi = schur_counterexample()
    assert np.allclose(map_from_json(map_to_json(phi, "schur")).matrix, phi.matrix)
    ops = random_kraus(2, 3, 2, rng)
    back = map_from_json(kraus_to_json(ops))
    assert back.shape_in == (2, 2) and back.shape_out == (3, 3)
    assert np.allclose(back.matrix, from_kraus(ops).matrix)
    D = random_density(3, rng)
    assert np.allclose(map_from_json(state_to_json(D)).matrix, state_map(D).matrix)


def test_vec_convention_pinned():
    # column 1 of the superoperator is the image of e_01
    doc = {"dim_in": 2, "dim_out": 2, "repr": "superop",
           "data": encode_matrix(np.eye(4)[[0, 2, 1, 3]])}
    phi = map_from_json(doc)
    E01 = np.array([[0, 1], [0, 0]])
    assert np.allclose(phi.apply(E01), E01.T)


@pytest.mark.parametrize("doc", [
    [],
    {"dim_in": 2, "dim_out": 2, "repr": "bogus", "data": []},
    {"dim_in": 2, "dim_out": 2, "repr": "superop", "data": encode_matrix(np.eye(3))},
    {"dim_in": 2, "dim_out": 3, "repr": "schur", "data": encode_matrix(np.eye(2))},
    {"dim_in": 2, "dim_out": 2, "repr": "kraus", "data": []},
    {"dim_in": 2, "dim_out": 2, "repr": "state", "data": [[1, 0], [0, 1]]},
    {"dim_in": 0, "dim_out": 2, "repr": "state", "data": []},
    {"dim_out": 2, "repr": "state", "data": []},
])
def test_malformed_documents(doc):
    with pytest.raises(MalformedInput):
        map_from_json(doc)


def test_load_map_errors(tmp_path):
    p = tmp_path / "bad.json"
    p.write_text("{", encoding="utf-8")
    with pytest.raises(MalformedInput):
        load_map(p)
    with pytest.raises(MalformedInput):
        load_map(tmp_path / "missing.json")


def test_dumps_is_canonical():
    assert dumps({"b": 1, "a": [1.5]}) == '{\n  "a": [\n    1.5\n  ],\n  "b": 1\n}'
