import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from fockbell.fock import (FockVector, LayoutError, ModeLayout, apply, coherent_state,
                           number_operator, tensor)
from fockbell.optics import (BeamsplitterParams, InitialStateParams, Setting,
                             apply_measurement_stage, beamsplitter_unitary,
                             full_beamsplitter_unitary, measured_state, prepare_state,
                             propagate, psi_state, source_state)

angles = st.floats(-2 * math.pi, 2 * math.pi)


def test_zero_angle_is_identity():
    lay = ModeLayout.of(a=3, b=3)
    for theta in (0.0, 1.3, -2.0):
        u = beamsplitter_unitary(lay, "a", "b", BeamsplitterParams(0.0, theta))
        assert np.allclose(u.matrix, np.eye(lay.dim), atol=1e-14)


def test_single_photon_source_convention():
    psi = source_state()
    amps = psi.tensor
    assert psi.layout.names == ("b1", "b2")
    assert np.allclose(amps, np.array([[0, 1], [1j, 0]]) / math.sqrt(2), atol=1e-15)


@given(st.floats(0, math.pi / 2), angles, st.floats(0, 1.5))
def test_coherent_input_splits_into_coherent_states(chi, theta, alpha):
    bs = BeamsplitterParams(chi, theta)
    cut = 20
    state = tensor([coherent_state(alpha, cut, "a"), FockVector.vacuum(ModeLayout.of(b=cut))])
    out = propagate(state, "a", "b", bs, ("c", "d"))
    u = bs.mode_matrix()
    # output mode amplitudes: V|alpha,0> = |U00 alpha>|U10 alpha> in the (c, d) slots
    gamma_c, gamma_d = u[0, 0] * alpha, u[1, 0] * alpha
    top = out.layout.cutoff("c")

    def coh(g):
        n = np.arange(top + 1)
        return np.exp(-abs(g) ** 2 / 2) * np.array(
            [g ** k / math.sqrt(math.factorial(k)) for k in n], dtype=complex)

    ref = np.kron(coh(gamma_c), coh(gamma_d))
    assert abs(np.vdot(ref, out.amplitudes)) ** 2 >= 1 - 1e-10


@given(st.floats(0, math.pi / 2), angles, st.integers(1, 5))
def test_unitary_and_number_conserving(chi, theta, cut):
    lay = ModeLayout.of(a=cut, b=cut)
    u = beamsplitter_unitary(lay, "a", "b", BeamsplitterParams(chi, theta))
    m = u.matrix
    assert np.max(np.abs(m.conj().T @ m - np.eye(lay.dim))) <= 1e-10
    ntot = (number_operator(lay, "a") + number_operator(lay, "b")).matrix
    assert np.max(np.abs(m @ ntot - ntot @ m)) <= 1e-12


@given(st.floats(0, math.pi / 2), angles)
def test_two_constructions_agree_on_complete_blocks(chi, theta):
    lay = ModeLayout.of(a=4, b=4)
    p = BeamsplitterParams(chi, theta)
    a = beamsplitter_unitary(lay, "a", "b", p).matrix
    b = beamsplitter_unitary(lay, "a", "b", p, method="exp").matrix
    occ = lay.occupation_table.sum(axis=1)
    keep = occ <= 4
    assert np.max(np.abs((a - b)[np.ix_(keep, keep)])) <= 1e-10


@given(st.floats(0, math.pi / 2), angles)
def test_total_number_identity(chi, theta):
    """U^dag (n_c + n_d) U = n_a + n_b on the relabelled modes."""
    lay = ModeLayout.of(a=3, b=3)
    m = beamsplitter_unitary(lay, "a", "b", BeamsplitterParams(chi, theta)).matrix
    ntot = (number_operator(lay, "a") + number_operator(lay, "b")).matrix
    assert np.max(np.abs(m.conj().T @ ntot @ m - ntot)) <= 1e-10


@given(st.floats(0, math.pi / 2), angles)
def test_composition_with_inverse(chi, theta):
    lay = ModeLayout.of(a=3, b=3)
    m = beamsplitter_unitary(lay, "a", "b", BeamsplitterParams(chi, theta)).matrix
    assert np.allclose(m @ m.conj().T, np.eye(lay.dim), atol=1e-12)


def test_heisenberg_action_matches_mode_matrix():
    """V^dag x_i V = sum_j U_ij x_j on single-photon amplitudes."""
    p = BeamsplitterParams(0.37, 1.1)
    lay = ModeLayout.of(a=1, b=1)
    v = beamsplitter_unitary(lay, "a", "b", p).matrix
    u = p.mode_matrix()
    one_a = lay.index((1, 0))
    one_b = lay.index((0, 1))
    # V|1_j> has amplitude U_ij in slot i
    for j, col in enumerate((one_a, one_b)):
        out = v[:, col]
        assert np.allclose([out[one_a], out[one_b]], u[:, j])


def test_unequal_cutoffs_rejected():
    with pytest.raises(LayoutError):
        beamsplitter_unitary(ModeLayout.of(a=2, b=3), "a", "b", BeamsplitterParams(0.1, 0))


def test_full_embedding_matches_local():
    lay = ModeLayout.of(x=1, a=2, b=2)
    p = BeamsplitterParams(0.4, 0.2)
    rng = np.random.default_rng(1)
    psi = FockVector(lay, rng.normal(size=lay.dim) + 0j)
    full = full_beamsplitter_unitary(lay, "a", "b", p)
    local = beamsplitter_unitary(lay, "a", "b", p)
    assert np.allclose(apply(full, psi).amplitudes, apply(local, psi).amplitudes)


def test_prepare_state_examples():
    psi = psi_state(0.6)
    assert psi.layout.names == ("a1", "b1", "b2", "a2")
    ref = tensor([coherent_state(0.6, None, "a1"), source_state(), coherent_state(0.6, None, "a2")])
    assert psi.fidelity(ref) == pytest.approx(1, abs=1e-14)
    vac = prepare_state(InitialStateParams(1.0, 0.0, 0.0, 0.0))
    assert abs(vac.amplitudes[0]) == 1
    single = prepare_state(InitialStateParams(0.0, 1.0, 0.0, 0.0))
    rho = single.reduced_density(["b1", "b2"])
    s = source_state().amplitudes
    assert np.vdot(s, rho @ s).real == pytest.approx(1, abs=1e-14)


def test_initial_params_normalization():
    with pytest.raises(ValueError):
        InitialStateParams(0.5, 0.5)
    q = 0.3
    st_ = source_state(q, math.sqrt(1 - q * q))
    assert st_.norm2 == pytest.approx(1, abs=1e-14)
    assert st_.tensor[0, 0] == pytest.approx(q)


def test_setting_rejects_negative_alpha():
    with pytest.raises(ValueError):
        Setting(0.1, -0.2, 0.0)


def test_measurement_stage_identity_setting():
    psi = psi_state(0.4)
    out = apply_measurement_stage(psi, 1, Setting(0.0, 0.4, 0.0))
    assert out.layout.names == ("c1", "d1", "b2", "a2")
    back = out.renamed({"c1": "a1", "d1": "b1"})
    cut = psi.layout.cutoff("a1")
    trimmed = back.tensor[:cut + 1, :2]
    assert np.allclose(trimmed, psi.tensor, atol=1e-15)
    assert np.allclose(np.delete(back.tensor, np.s_[cut + 1:], axis=0)[:, 2:], 0)


@given(st.floats(0, math.pi / 2), angles, st.floats(0, math.pi / 2), angles)
def test_measurement_preserves_norm_and_photon_statistics(c1, t1, c2, t2):
    psi = psi_state(0.5)
    out = measured_state(psi, BeamsplitterParams(c1, t1), BeamsplitterParams(c2, t2))
    assert abs(out.norm2 - psi.norm2) <= 1e-12

    def station_counts(state, names):
        occ = state.layout.occupation_table
        idx = [state.layout.position(n) for n in names]
        tot = occ[:, idx].sum(axis=1)
        return np.bincount(tot, weights=state.probabilities(), minlength=40)[:40]

    before = station_counts(psi, ["a1", "b1"])
    after = station_counts(out, ["c1", "d1"])
    assert np.allclose(before, after, atol=1e-12)


def test_measurement_stage_needs_modes():
    with pytest.raises(LayoutError):
        apply_measurement_stage(source_state(), 1, BeamsplitterParams(0.1, 0.0))
    with pytest.raises(ValueError):
        apply_measurement_stage(psi_state(0.1), 3, BeamsplitterParams(0.1, 0.0))
