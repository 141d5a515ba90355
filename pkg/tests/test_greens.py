import numpy as np
import pytest

from conftest import FIG3, PHASE_III
from nhphase.dense import eigvals
from nhphase.greens import (
    MaxIterationsError,
    assemble_layers,
    build_principal_layer,
    locate_transition,
    nonbloch_radius,
    spectral_functions,
    surface_greens,
    transition_scan,
)
from nhphase.lattice import ModelParams, build_obc_hamiltonian, pbc_spectrum
from nhphase.winding import topological_criterion


@pytest.fixture(scope="module")
def fig3_scan():
    return transition_scan(FIG3, np.linspace(0.0, 0.8, 161), eta=1e-3)


def test_h01_structure():
    L = build_principal_layer(ModelParams(1.0, 1.2, 1.6, 0.5, 0.0, 10))
    nz = L.H01[L.H01 != 0]
    assert nz.size == 3 and sorted(nz) == [0.5, 0.5, 1.6]


def test_reciprocal_couplings_transpose():
    L = build_principal_layer(ModelParams(1.0, 0.8, 0.8, 0.0, 0.0, 10))
    assert np.array_equal(L.H10, L.H01.T)


@pytest.mark.parametrize("p", [PHASE_III, ModelParams(0.7, -1.1, 2.3, 0.4, 0.3, 10)])
def test_layers_embed_obc_matrix(p):
    assert np.array_equal(assemble_layers(build_principal_layer(p), 6), build_obc_hamiltonian(p.with_(N=12)))


def test_nonbloch_layers_are_similar():
    p = PHASE_III
    r = nonbloch_radius(p)
    M = assemble_layers(build_principal_layer(p, r), 6)
    assert np.sort_complex(eigvals(M)) == pytest.approx(np.sort_complex(eigvals(build_obc_hamiltonian(p.with_(N=12)))), abs=1e-10)


def test_decoupled_limit():
    p = ModelParams(1.0, 0.0, 0.0, 0.0, 0.2, 10)
    L = build_principal_layer(p)
    res = surface_greens(L, 0.5, 1e-3)
    G0 = np.linalg.inv((0.5 + 1e-3j) * np.eye(4) - L.H00)
    for G in (res.G_surface_left, res.G_surface_right, res.G_bulk):
        assert np.allclose(G, G0, atol=1e-12)


def test_bulk_sum_rule_hermitian():
    p = ModelParams(1.0, 0.7, 0.7, 0.3, 0.0, 10)
    E = np.linspace(-12, 12, 6001)
    eta = 0.02
    A = [spectral_functions(p, e, eta, frame="bloch", max_iter=200).A_bulk for e in E]
    # Lorentzian tails beyond the window are restored analytically
    tail = 4 * (2 / np.pi) * np.arctan(eta / 10.0)
    assert np.trapezoid(A, E) + tail == pytest.approx(4.0, rel=0.02)


def test_phase_iii_convergence():
    s = spectral_functions(PHASE_III, 0.0, 1e-3, tol=1e-12)
    assert s.iterations <= 40


def test_far_detuned():
    s = spectral_functions(PHASE_III, 100 * 1.6, 1e-3)
    assert s.A_surface < 1e-3 and s.A_bulk < 1e-3


def test_max_iterations():
    with pytest.raises(MaxIterationsError):
        surface_greens(build_principal_layer(PHASE_III), 0.0, 1e-3, max_iter=2)


def test_surface_peak_on_topological_side():
    p = FIG3.with_(t2=0.2)
    assert topological_criterion(p).topological
    s = spectral_functions(p, 0.0, 1e-3)
    assert s.A_surface >= 10 * s.A_bulk
    ev = eigvals(build_obc_hamiltonian(p.with_(N=200)))
    assert np.sum(np.abs(ev) < 1e-6) == 2


@pytest.mark.xfail(strict=True, reason="t2 = 0.6 lies on the trivial side of the t2 = 0.3398 transition")
def test_surface_peak_at_t2_06():
    s = spectral_functions(PHASE_III, 0.0, 1e-3)
    assert s.A_surface >= 10 * s.A_bulk


def test_scan_transition(fig3_scan):
    assert all(r[-1] == "" for r in fig3_scan)
    x = locate_transition(fig3_scan)
    assert 0.30 <= x <= 0.38


def test_zero_t2_surface_peak(fig3_scan):
    rep = topological_criterion(FIG3.with_(t2=0.0))
    assert rep.topological and rep.max_za == pytest.approx(1.2) and rep.min_zb == pytest.approx(0.625)
    t2, As, _, Ab, *_ = fig3_scan[0]
    assert t2 == 0.0 and As > 10 * Ab


def test_transition_beyond_pbc_gap_closing(fig3_scan):
    k = np.linspace(0, 2 * np.pi, 721)
    grid = np.linspace(0.0, 0.8, 161)
    gap = [np.min(np.abs(pbc_spectrum(FIG3.with_(t2=t), k))) for t in grid]
    closing = grid[int(np.argmin(gap))]
    assert closing == pytest.approx(0.2, abs=0.005)
    assert locate_transition(fig3_scan) > closing + 0.1


def test_scan_input_checks():
    with pytest.raises(ValueError):
        transition_scan(FIG3, [])
    with pytest.raises(ValueError):
        transition_scan(FIG3, [0.2, 0.1])
    with pytest.raises(ValueError):
        surface_greens(build_principal_layer(FIG3), 0.0, eta=0.0)


def test_jobs_do_not_change_rows():
    grid = np.linspace(0.0, 0.8, 9)
    assert transition_scan(FIG3, grid, jobs=1) == transition_scan(FIG3, grid, jobs=2)
