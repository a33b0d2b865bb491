"""The compiled and plain kernel paths must agree on every input."""

import os
import subprocess
import sys

import numpy as np

from leadersync.numerics import kernels


def _pairs():
    return [
        (kernels.jacobi_eigvals, kernels.jacobi_eigvals_py),
        (kernels.jacobi_singular_values, kernels.jacobi_singular_values_py),
        (kernels.expm_pade7, kernels.expm_pade7_py),
        (kernels.eig_qr, kernels.eig_qr_py),
        (kernels.matrix_sign_newton, kernels.matrix_sign_newton_py),
    ]


def test_symmetric_eigs_backends_agree():
    rng = np.random.default_rng(101)
    for _ in range(25):
        n = int(rng.integers(1, 8))
        S = rng.standard_normal((n, n))
        S = S + S.T
        v1, ok1 = kernels.jacobi_eigvals(S)
        v2, ok2 = kernels.jacobi_eigvals_py(S)
        assert ok1 == ok2
        assert np.allclose(v1, v2, atol=1e-13)


def test_singular_values_backends_agree():
    rng = np.random.default_rng(102)
    for _ in range(25):
        M = rng.standard_normal((int(rng.integers(1, 8)),
                                 int(rng.integers(1, 8))))
        s1, ok1 = kernels.jacobi_singular_values(M)
        s2, ok2 = kernels.jacobi_singular_values_py(M)
        assert ok1 == ok2
        assert np.allclose(s1, s2, atol=1e-13)


def test_expm_backends_agree():
    rng = np.random.default_rng(103)
    for _ in range(25):
        n = int(rng.integers(1, 8))
        M = rng.standard_normal((n, n)) * rng.uniform(0.1, 4.0)
        E1, ok1 = kernels.expm_pade7(M)
        E2, ok2 = kernels.expm_pade7_py(M)
        assert ok1 == ok2
        assert np.allclose(E1, E2, rtol=1e-13, atol=1e-13)


def test_eig_qr_backends_agree():
    rng = np.random.default_rng(104)
    for _ in range(25):
        n = int(rng.integers(1, 7))
        M = rng.standard_normal((n, n))
        e1, ok1 = kernels.eig_qr(M)
        e2, ok2 = kernels.eig_qr_py(M)
        assert ok1 == ok2
        # last-ulp rounding differences may flip the sort order of a
        # conjugate pair, so compare as multisets
        remaining = list(e2)
        for v in e1:
            k = int(np.argmin([abs(v - w) for w in remaining]))
            assert abs(v - remaining[k]) < 1e-12
            remaining.pop(k)


def test_matrix_sign_backends_agree():
    rng = np.random.default_rng(105)
    for _ in range(25):
        n = int(rng.integers(1, 5))
        # keep eigenvalues off the imaginary axis
        M = rng.standard_normal((n, n)) + np.diag(
            rng.choice([-2.0, 2.0], n))
        S1, ok1 = kernels.matrix_sign_newton(M)
        S2, ok2 = kernels.matrix_sign_newton_py(M)
        assert ok1 == ok2
        if ok1:
            assert np.allclose(S1, S2, rtol=1e-10, atol=1e-10)


def test_propagation_backends_agree():
    rng = np.random.default_rng(106)
    d = 6
    Fs = np.stack([np.eye(d) + 0.01 * rng.standard_normal((d, d))
                   for _ in range(3)])
    Gs = np.stack([0.01 * rng.standard_normal((d, d)) for _ in range(3)])
    mode_idx = rng.integers(0, 3, 50).astype(np.int64)
    steps = rng.integers(1, 9, 50).astype(np.int64)
    x0 = rng.standard_normal(d)
    out1 = kernels.propagate_grid(Fs, Gs, mode_idx, steps, x0)
    out2 = kernels.propagate_grid_py(Fs, Gs, mode_idx, steps, x0)
    assert np.allclose(out1, out2, rtol=1e-12, atol=1e-14)

    E = np.eye(d) + 0.01 * rng.standard_normal((d, d))
    l1 = kernels.propagate_linear(E, x0, 40)
    l2 = kernels.propagate_linear_py(E, x0, 40)
    assert np.allclose(l1, l2, rtol=1e-12, atol=1e-14)


def test_env_flag_selects_pure_path():
    env = dict(os.environ, LEADERSYNC_NUMBA="0")
    code = (
        "from leadersync.numerics import kernels\n"
        "assert not kernels.NUMBA_ENABLED\n"
        "assert kernels.propagate_grid is kernels.propagate_grid_py\n"
        "assert kernels.expm_pade7 is kernels.expm_pade7_py\n"
        "print('pure')\n")
    res = subprocess.run([sys.executable, "-c", code], env=env,
                         capture_output=True, text=True)
    assert res.returncode == 0, res.stderr
    assert res.stdout.strip() == "pure"


def test_jit_wrappers_distinct_when_enabled():
    if not kernels.NUMBA_ENABLED:
        return
    for jit_fn, py_fn in _pairs():
        assert jit_fn is not py_fn


def test_warmup_runs_every_kernel():
    kernels.warmup()
