import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from nhphase import _kernels_py as py
from nhphase import kernels
from nhphase.dense import eigvals
from nhphase.greens import build_principal_layer, nonbloch_radius
from nhphase.lattice import ModelParams, build_obc_hamiltonian

try:
    from nhphase import _ckernels as cy
except ImportError:
    cy = None

needs_cy = pytest.mark.skipif(cy is None, reason="compiled extension not built")
hop = st.floats(0.1, 4).flatmap(lambda x: st.sampled_from([x, -x]))
H2 = (1.0, 3.5, 2.5, 1.3)


def test_backend_selected():
    assert kernels.BACKEND in ("cython", "python")
    if cy is not None:
        assert kernels.BACKEND == "cython"


def test_env_forces_fallback():
    env = dict(os.environ, NHPHASE_PURE_PYTHON="1")
    out = subprocess.run([sys.executable, "-c", "import nhphase.kernels as k; print(k.BACKEND)"],
                         env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"


@given(hop, hop, hop, hop, st.floats(-30, 30), st.floats(-5, 5))
def test_roots_are_roots(t0, t1R, t1L, t2, lr, li):
    lam = complex(lr, li)
    z = py.roots4(t0, t1R, t1L, t2, np.array([lam]))[0]
    q = (t0 * z * z + t1R * z + t2) * (t2 * z * z + t1L * z + t0) - lam * z * z
    scale = abs(t0 * t2) * np.maximum(np.abs(z), 1) ** 4 + abs(lam) * np.abs(z) ** 2
    assert np.all(np.abs(q) <= 1e-9 * scale)
    assert abs(np.prod(z) - 1) < 1e-10


def test_double_root_product():
    z = py.roots4(1.0, 1.0, 1.0, 1.0, np.array([0.0]))[0]
    assert abs(np.prod(z) - 1) < 1e-13


@pytest.mark.parametrize("p", [ModelParams(1.0, 3.5, 2.5, 1.3, 0.0, 5), ModelParams(1.0, 1.2, 1.6, 0.2, 0.0, 7)])
def test_secular_changes_sign_at_squared_eigenvalues(p):
    ev = eigvals(build_obc_hamiltonian(p))
    assert np.abs(ev.imag).max() < 1e-10
    lam = np.sort((ev[ev.real > 0] ** 2).real)
    assert lam.size == p.N and np.min(np.diff(lam)) > 1e-3
    d = 1e-7 * lam.max()
    for x in lam:
        lo, hi = py.secular_real(*p.hoppings, p.N, np.array([x - d, x + d]))
        assert lo * hi < 0


def test_log_derivative_matches_finite_difference():
    lam = np.array([7.3 + 0.4j, -2.0 + 1.0j, 20.0 + 0.1j])
    f, df = py.log_secular(*H2, 30, lam)
    h = 1e-6
    fp, _ = py.log_secular(*H2, 30, lam + h)
    fm, _ = py.log_secular(*H2, 30, lam - h)
    assert np.allclose(df, (fp - fm) / (2 * h), rtol=1e-6, atol=1e-6)


@needs_cy
def test_backends_agree_on_secular():
    lam = np.linspace(-40, 40, 4001)
    lam = lam[np.abs(lam) > 1e-6]
    a = py.secular_real(*H2, 100, lam)
    b = cy.secular_real(*H2, 100, lam)
    assert np.max(np.abs(a - b) / np.maximum(np.abs(a), 1e-300)) < 1e-8
    assert np.all(np.sign(a) == np.sign(b))
    z = lam[::97] + 0.2j
    fa, da = py.log_secular(*H2, 100, z)
    fb, db = cy.log_secular(*H2, 100, z)
    assert np.allclose(np.exp(fa - fb), 1, atol=1e-10)
    assert np.allclose(da, db, rtol=1e-10, atol=1e-12)


@needs_cy
@given(hop, hop, hop, hop, st.floats(-30, 30))
def test_backends_agree_on_roots(t0, t1R, t1L, t2, lr):
    a = np.sort_complex(py.roots4(t0, t1R, t1L, t2, np.array([lr + 0j]))[0])
    b = np.sort_complex(cy.roots4(t0, t1R, t1L, t2, np.array([lr + 0j]))[0])
    assert np.allclose(np.prod(a), np.prod(b), atol=1e-10)
    C = np.abs(a[:, None] - b[None, :])
    assert C.min(axis=1).max() < 1e-6


@needs_cy
def test_backends_agree_on_doubling():
    p = ModelParams(1.0, 1.2, 1.6, 0.3, 0.0, 10)
    L = build_principal_layer(p, nonbloch_radius(p))
    w = np.linspace(-3, 3, 61) + 1e-3j
    ra = py.sancho_rubio(L.H00, L.H01, L.H10, w)
    rb = cy.sancho_rubio(L.H00, L.H01, L.H10, w)
    for x, y in zip(ra[:3], rb[:3]):
        assert np.allclose(x, y, rtol=1e-9, atol=1e-9)
    assert np.array_equal(ra[3], rb[3])
