import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import PHASE_II, PHASE_III
from nhphase.dense import (
    InsufficientSupportError,
    SingularMatrixError,
    eig,
    eigvals,
    fit_decay_rate,
    solve,
)
from nhphase.lattice import build_obc_hamiltonian
from nhphase.skin import quantize


def test_pauli_x():
    d = eig(np.array([[0.0, 1.0], [1.0, 0.0]]))
    assert np.allclose(d.eigenvalues, [-1, 1])
    assert not d.defective


def test_jordan_block_flagged():
    d = eig(np.array([[0.0, 1.0], [0.0, 0.0]]))
    assert np.allclose(d.eigenvalues, 0)
    assert d.defective


def test_tridiagonal_char_poly():
    a, b = 2.0, 0.5
    M = np.array([[0, a, 0], [b, 0, a], [0, b, 0]])
    assert np.allclose(eigvals(M), [-np.sqrt(2 * a * b), 0, np.sqrt(2 * a * b)], atol=1e-12)


def test_vector_normalization_and_phase(rng):
    M = rng.normal(size=(12, 12)) + 1j * rng.normal(size=(12, 12))
    d = eig(M)
    assert np.allclose(np.linalg.norm(d.right_eigenvectors, axis=0), 1.0)
    lead = d.right_eigenvectors[np.argmax(np.abs(d.right_eigenvectors), axis=0), np.arange(12)]
    assert np.all(lead.real >= 0) and np.allclose(lead.imag, 0)
    assert d.max_residual <= 1e-8 * d.norm_fro
    order = np.lexsort((d.eigenvalues.imag, d.eigenvalues.real))
    assert np.array_equal(order, np.arange(12))


def test_solve_identity_and_diagonal(rng):
    B = rng.normal(size=(4, 3))
    assert np.allclose(solve(np.eye(4), B), B)
    assert np.allclose(solve(np.diag([2.0, 4.0]), [[1.0], [1.0]]), [[0.5], [0.25]])


def _adjugate_inverse(M):
    n = M.shape[0]
    C = np.empty_like(M)
    for i in range(n):
        for j in range(n):
            minor = np.delete(np.delete(M, i, 0), j, 1)
            C[i, j] = (-1) ** (i + j) * (minor[0, 0] * minor[1, 1] - minor[0, 1] * minor[1, 0])
    det = sum(M[0, j] * C[0, j] for j in range(n))
    return C.T / det


def test_solve_against_adjugate(rng):
    M = rng.normal(size=(3, 3)) + 3 * np.eye(3)
    B = rng.normal(size=(3, 2))
    assert np.allclose(solve(M, B), _adjugate_inverse(M) @ B, rtol=1e-12, atol=1e-12)
    M8 = rng.normal(size=(8, 8)) + 8 * np.eye(8)
    B8 = rng.normal(size=(8, 2))
    X = solve(M8, B8)
    assert np.linalg.norm(M8 @ X - B8) < 1e-12 * np.linalg.norm(B8)


def test_solve_singular():
    with pytest.raises(SingularMatrixError):
        solve(np.array([[1.0, 2.0], [2.0, 4.0]]), np.ones((2, 1)))


def test_fit_exact_exponential_and_constant():
    n = np.arange(1, 41)
    assert fit_decay_rate(np.exp(-0.5 * n)) == pytest.approx(-0.5, abs=1e-9)
    assert abs(fit_decay_rate(np.ones(40))) < 1e-12


@given(st.floats(-0.8, 0.8), st.integers(10, 60))
def test_fit_recovers_slope(a, N):
    n = np.arange(1, N + 1)
    amp = 1.7 * np.exp(a * n)
    assert fit_decay_rate(amp, floor=0) == pytest.approx(a, abs=1e-9)


def test_fit_support_errors():
    with pytest.raises(InsufficientSupportError):
        fit_decay_rate(np.ones(5))
    a = np.zeros(20)
    a[:3] = 1
    with pytest.raises(InsufficientSupportError):
        fit_decay_rate(a)


def test_phase_iii_mid_spectrum_slope_matches_alpha():
    p = PHASE_III
    modes = quantize(p, with_states=False)
    real = [m for m in modes if not m.complex_energy and np.isfinite(m.theta) and m.alpha != 0]
    mid = min(real, key=lambda m: abs(abs(m.energy) - np.median(np.abs(modes.energies.real))))
    d = eig(build_obc_hamiltonian(p))
    k = int(np.argmin(np.abs(d.eigenvalues - mid.energy)))
    fit = fit_decay_rate(np.abs(d.right_eigenvectors[:, k]).reshape(p.N, 2))
    assert fit < 0
    assert abs(fit - mid.alpha) <= 0.05 * abs(mid.alpha)


def test_residuals_fig2b():
    d = eig(build_obc_hamiltonian(PHASE_II))
    assert d.residual_ok and d.max_residual <= 1e-8 * d.norm_fro
