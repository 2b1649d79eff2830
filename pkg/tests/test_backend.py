"""Parity between the compiled kernel core and the numpy fallback."""

import os
import subprocess
import sys

import numpy as np
import pytest

from fieldwork import _kernels_py

compiled = pytest.importorskip("fieldwork._kernels")


@pytest.mark.parametrize("n,m", [(1, 1), (5, 3), (40, 40), (200, 83)])
def test_cross_functions_agree(n, m, rng):
    a = np.ascontiguousarray(rng.normal(size=(n, 2)))
    b = np.ascontiguousarray(rng.normal(size=(m, 2)))
    np.testing.assert_allclose(compiled.sq_dists(a, b), _kernels_py.sq_dists(a, b),
                               rtol=1e-12, atol=1e-14)
    np.testing.assert_allclose(compiled.se_cross(a, b, 0.7, 2.3),
                               _kernels_py.se_cross(a, b, 0.7, 2.3),
                               rtol=1e-12, atol=1e-14)


@pytest.mark.parametrize("n", [1, 2, 17, 150])
def test_sym_functions_agree(n, rng):
    a = np.ascontiguousarray(rng.normal(size=(n, 2)))
    np.testing.assert_allclose(compiled.sq_dists_sym(a), _kernels_py.sq_dists_sym(a),
                               rtol=1e-12, atol=1e-14)
    np.testing.assert_allclose(compiled.se_sym(a, 0.4, 1.7, 0.01),
                               _kernels_py.se_sym(a, 0.4, 1.7, 0.01),
                               rtol=1e-12, atol=1e-14)


def test_se_from_sq_agrees(rng):
    d2 = np.ascontiguousarray(rng.uniform(0, 4, size=(31, 57)))
    np.testing.assert_allclose(compiled.se_from_sq(d2, 0.9, 3.1),
                               _kernels_py.se_from_sq(d2, 0.9, 3.1),
                               rtol=1e-12)


def test_sym_diagonals_are_exact(rng):
    a = np.ascontiguousarray(rng.normal(size=(20, 2)))
    for impl in (compiled, _kernels_py):
        assert (np.diag(impl.sq_dists_sym(a)) == 0.0).all()
        k = impl.se_sym(a, 0.3, 2.0, 0.125)
        assert (np.diag(k) == 2.125).all()
        np.testing.assert_allclose(k, k.T, rtol=0, atol=0)


def test_env_var_forces_python_backend():
    env = dict(os.environ, FIELDWORK_PURE_PYTHON="1")
    out = subprocess.run(
        [sys.executable, "-c", "import fieldwork; print(fieldwork.BACKEND)"],
        env=env, capture_output=True, text=True, check=True,
    )
    assert out.stdout.strip() == "python"


def test_default_backend_is_compiled_when_available():
    from fieldwork import BACKEND

    assert BACKEND == "compiled"
