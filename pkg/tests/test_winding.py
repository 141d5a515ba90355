import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from conftest import FIG3, PHASE_I, PHASE_IV
from nhphase.lattice import ModelParams, bloch_factors
from nhphase.winding import (
    WindingError,
    contour_winding,
    criterion_gap,
    find_topological_transition,
    offdiag_roots,
    quadratic_roots,
    topological_criterion,
    winding_number,
    witness_scan,
)

hop = st.floats(0.05, 4).flatmap(lambda x: st.sampled_from([x, -x]))


def test_phase_i_roots():
    za, zb = offdiag_roots(PHASE_I)
    assert sorted(z.real for z in za) == pytest.approx([-3.18614, -0.31386], abs=1e-5)
    assert sorted(z.real for z in zb) == pytest.approx([-2.0, -0.5], abs=1e-12)


@given(hop, hop, hop)
def test_reciprocal_moduli(t0, t, t2):
    za, zb = offdiag_roots(ModelParams(t0, t, t, t2, 0.0, 10))
    assert sorted(abs(z) for z in za) == pytest.approx(sorted(1 / abs(z) for z in zb), rel=1e-9)


def test_phase_iv_unit_circle():
    za, zb = offdiag_roots(PHASE_IV)
    assert np.allclose([abs(z) for z in za + zb], 1.0, atol=1e-12)


def test_quadratic_roots_stable():
    r = quadratic_roots(1.0, 1e8, 1.0)
    assert r[0] == pytest.approx(-1e-8, rel=1e-12)
    assert r[1] == pytest.approx(-1e8, rel=1e-12)


def test_winding_examples():
    assert winding_number("b", PHASE_I, 1.0) == 1
    assert winding_number("a", PHASE_I, 1.0) == -1
    assert winding_number("a", PHASE_I, 0.1) == -2
    with pytest.raises(WindingError):
        winding_number("b", PHASE_I, 0.5)


@given(hop, hop, hop, hop, st.floats(np.log(0.05), np.log(20)))
def test_contour_matches_root_count(t0, t1R, t1L, t2, logR):
    p = ModelParams(t0, t1R, t1L, t2, 0.0, 10)
    R = float(np.exp(logR))
    za, zb = offdiag_roots(p)
    assume(all(abs(abs(z) - R) > 1e-2 * R for z in za + zb))
    for f in ("a", "b"):
        assert winding_number(f, p, R) == contour_winding(f, p, R)


def test_criterion_verdicts():
    rep = topological_criterion(PHASE_I)
    assert rep.topological and rep.max_za == pytest.approx(3.18614, abs=1e-5) and rep.min_zb == pytest.approx(0.5)
    wa = winding_number("a", PHASE_I, rep.witness_radius)
    wb = winding_number("b", PHASE_I, rep.witness_radius)
    assert wa * wb < 0
    rep = topological_criterion(PHASE_IV)
    assert not rep.topological and rep.unit_circle
    rep = topological_criterion(FIG3)
    assert round(rep.max_za, 3) == round(rep.min_zb, 3) == 0.742
    assert abs(rep.gap) < 1e-3


def test_boundary_degenerate_flag_at_transition():
    x = find_topological_transition(FIG3, "t2", 0.0, 0.8, tol=1e-13)
    assert topological_criterion(FIG3.with_(t2=x)).boundary_degenerate


@given(hop, hop, hop, hop)
def test_criterion_agrees_with_witness_scan(t0, t1R, t1L, t2):
    p = ModelParams(t0, t1R, t1L, t2, 0.0, 10)
    assume(abs(criterion_gap(p)) > 1e-3)
    assert topological_criterion(p).topological == bool(witness_scan(p, 1024))


def test_transition_value():
    x = find_topological_transition(FIG3, "t2", 0.0, 0.8)
    assert abs(x - 0.3398) <= 1e-4


def test_no_bracket():
    with pytest.raises(WindingError):
        find_topological_transition(PHASE_I, "t2", 0.9, 1.1)


def test_hermitian_transition_is_pbc_gap_closing():
    p = ModelParams(1.0, 1.2, 1.2, 0.1, 0.0, 10)
    x = find_topological_transition(p, "t2", 0.0, 0.8, tol=1e-12)
    k = np.linspace(0, 2 * np.pi, 20001)
    ha = bloch_factors(p.with_(t2=x)).ha(np.exp(1j * k))
    assert np.min(np.abs(ha)) < 1e-8


def test_zero_t2_uses_radius_scan():
    rep = topological_criterion(ModelParams(1.0, 1.2, 1.6, 0.0, 0.0, 10))
    assert rep.topological
    assert any("radius scan" in n for n in rep.notes)
