import os
import subprocess
import sys

import numpy as np
import pytest

from qposmaps import _fallback
from qposmaps._backend import BACKEND, kernels
from qposmaps.generators import random_cp_map, random_q_positive
from qposmaps.qorder import default_grid
from qposmaps.superop import choi


def _compiled():
    try:
        from qposmaps import _kernels
    except ImportError:
        pytest.skip("compiled kernels not built")
    return _kernels


def test_backend_name():
    assert BACKEND in ("compiled", "python")
    assert kernels.__name__.endswith("_kernels" if BACKEND == "compiled" else "_fallback")


def test_pure_python_switch():
    env = dict(os.environ, QPOSMAPS_PURE_PYTHON="1")
    out = subprocess.run([sys.executable, "-c", "import qposmaps; print(qposmaps.BACKEND)"],
                         env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"


def test_choi_min_eig_agrees(rng):
    ck = _compiled()
    for _ in range(10):
        phi = random_cp_map(3, 2, rng)
        C = np.ascontiguousarray(choi(phi).matrix)
        assert np.isclose(ck.choi_min_eig(C, 3, 3), _fallback.choi_min_eig(C, 3, 3), atol=1e-12)


def test_resolvent_kernels_agree(rng):
    ck = _compiled()
    grid = default_grid()
    for kind in ("invertible", "schur", "rank-one"):
        _, phi = random_q_positive(3, rng, kind)
        a, na = ck.resolvent_min_eigs(phi.matrix, 3, grid, 1)
        b, nb = _fallback.resolvent_min_eigs(phi.matrix, 3, grid, 1)
        assert np.allclose(a, b, atol=1e-11, equal_nan=True)
        assert np.allclose(na, nb, rtol=1e-11)


def test_dominance_kernels_agree(rng):
    ck = _compiled()
    grid = default_grid()
    _, phi = random_q_positive(2, rng, "invertible")
    _, psi = random_q_positive(2, rng, "schur")
    a, _ = ck.dominance_min_eigs(phi.matrix, psi.matrix, 2, grid, 2)
    b, _ = _fallback.dominance_min_eigs(phi.matrix, psi.matrix, 2, grid, 2)
    assert np.allclose(a, b, atol=1e-11, equal_nan=True)


def test_singular_points_are_nan():
    M = -np.eye(4, dtype=complex)
    grid = np.array([0.0, 1.0, 2.0])
    for mod in (_fallback,) + ((_compiled(),) if BACKEND == "compiled" else ()):
        vals, _ = mod.resolvent_min_eigs(M, 2, grid, 1)
        assert np.isnan(vals[1]) and not np.isnan(vals[0])


def test_kernels_accept_integer_grid():
    M = np.eye(4, dtype=complex)
    vals, _ = kernels.resolvent_min_eigs(M, 2, np.array([0, 1, 2]), 1)
    assert vals.shape == (3,)
