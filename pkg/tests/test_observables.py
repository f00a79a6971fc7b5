import math
import warnings

import numpy as np
import pytest
from hypothesis import given, strategies as st

from fockbell.fock import FockVector, ModeLayout, apply, expectation
from fockbell.observables import (PhaseDensityWarning, _local_table, amplitude_AR, amplitude_AT,
                                  classical_approx_correlator, intensity_correlator_ET,
                                  local_operator, no_vacuum_projector, pegg_barnett_density,
                                  phase_averaged_amplitude, phase_averaged_amplitude_quadrature,
                                  phase_averaged_correlator_numeric, rate_correlator_ER,
                                  rate_operator, station_expectation)
from fockbell.optics import BeamsplitterParams, measured_state, psi_state

GRID = (0.1, 0.25, 0.5, 1.0, 1.5, 2.0)
LAY = ModeLayout.of(c=4, d=4)


def test_rate_operator_examples():
    d = rate_operator(LAY, "c", "d", "d")
    c = rate_operator(LAY, "c", "d", "c")
    assert expectation(FockVector.basis(LAY, (0, 1)), d.operator) == 1
    assert expectation(FockVector.basis(LAY, (2, 1)), c.operator) == pytest.approx(2 / 3)
    for target in ("c", "d", "difference"):
        op = rate_operator(LAY, "c", "d", target).operator
        assert expectation(FockVector.vacuum(LAY), op) == 0
    with pytest.raises(ValueError):
        rate_operator(LAY, "c", "d", "x")


def test_rate_spectra_and_sum_rule():
    for target, lo, hi in (("c", 0, 1), ("d", 0, 1), ("difference", -1, 1)):
        r = rate_operator(LAY, "c", "d", target)
        assert r.operator.is_diagonal
        assert lo - 1e-15 <= r.eigenvalues.min() and r.eigenvalues.max() <= hi + 1e-15
    total = (rate_operator(LAY, "c", "d", "c").operator
             + rate_operator(LAY, "c", "d", "d").operator)
    assert np.max(np.abs(total.matrix - no_vacuum_projector(LAY, "c", "d").matrix)) <= 1e-12


def test_rate_operators_commute_with_projector():
    ops = [rate_operator(LAY, "c", "d", t).operator.matrix for t in ("c", "d", "difference")]
    ops.append(no_vacuum_projector(LAY, "c", "d").matrix)
    for a in ops:
        for b in ops:
            assert np.allclose(a @ b, b @ a)


def test_rate_operator_acts_as_identity_elsewhere():
    lay = ModeLayout.of(x=2, c=2, d=2)
    psi = FockVector.basis(lay, (2, 1, 1))
    op = rate_operator(lay, "c", "d", "c").operator
    assert np.allclose(apply(op, psi).amplitudes, 0.5 * psi.amplitudes)


@pytest.mark.parametrize("alpha", GRID)
def test_ER_amplitude_and_sine_form(alpha):
    v = rate_correlator_ER(alpha, 0.3, 0.0)
    assert abs(v.amplitude - amplitude_AR(alpha)) <= 1e-6
    assert v.residual <= 1e-8
    assert abs(v.value) <= 1


@pytest.mark.parametrize("alpha", GRID)
def test_ET_amplitude_and_sine_form(alpha):
    v = intensity_correlator_ET(alpha, 0.3, 0.0)
    assert abs(v.amplitude - amplitude_AT(alpha)) <= 1e-6
    assert v.residual <= 1e-8


def test_correlator_examples():
    assert abs(rate_correlator_ER(1.0, math.pi / 2, 0.0, fit=False).value - 0.39958) < 1e-5
    assert abs(rate_correlator_ER(1.0, 0.7, 0.7, fit=False).value) <= 1e-10
    assert abs(rate_correlator_ER(1e-3, math.pi / 2, 0.0, fit=False).value) <= 1e-5
    assert intensity_correlator_ET(0.5, math.pi / 2, 0.0, fit=False).value == pytest.approx(0.8, abs=1e-6)
    assert abs(intensity_correlator_ET(0.5, 1.0, 1.0, fit=False).value) <= 1e-10
    with pytest.raises(ZeroDivisionError):
        intensity_correlator_ET(0.0, 1.0, 0.0)


def test_closed_amplitude_values():
    assert amplitude_AR(1.0) == pytest.approx((1 - math.exp(-1)) ** 2, abs=1e-15)
    assert amplitude_AR(0.0) == 0
    assert amplitude_AR(1e-4) == pytest.approx(1e-8, rel=1e-3)
    alphas = np.arange(1e-3, 3.0 + 1e-12, 1e-3)
    assert max(amplitude_AR(a) for a in alphas) < math.sqrt(2) / 2


def test_AT_above_reference_below_0414():
    xs = np.linspace(0.001, 1.0, 1000)
    above = [x for x in xs if amplitude_AT(math.sqrt(x)) > math.sqrt(2) / 2]
    assert max(above) < math.sqrt(2) - 1 < min(x for x in xs if x not in above)


@given(st.floats(0, 2 * math.pi), st.floats(0, math.pi / 2), st.floats(0, 2 * math.pi),
       st.floats(0, math.pi / 2), st.floats(0.05, 1.2))
def test_rate_product_bounded(t1, c1, t2, c2, alpha):
    st_ = measured_state(psi_state(alpha), BeamsplitterParams(c1, t1), BeamsplitterParams(c2, t2))
    assert abs(station_expectation(st_, "rate_diff", "rate_diff")) <= 1 + 1e-12


def test_classical_correlator():
    v = classical_approx_correlator(0.5, 0.2, 0.0)
    assert v.amplitude == pytest.approx(0.8, abs=1e-12)
    assert v.residual <= 1e-12
    assert abs(classical_approx_correlator(0.5, 1.0, 1.0, fit=False).value) <= 1e-15
    # the c-number amplitude exceeds the full quantum one where the comparison is meaningful
    for a in np.linspace(0.05, 1.2, 24):
        assert classical_approx_correlator(a, math.pi / 2, 0.0, fit=False).value > amplitude_AR(a)


def test_classical_correlator_cutoff_independent():
    a = classical_approx_correlator(0.7, math.pi / 2, 0.0, cutoff=1, fit=False).value
    b = classical_approx_correlator(0.7, math.pi / 2, 0.0, cutoff=3, fit=False).value
    assert a == pytest.approx(b, abs=1e-14)


def test_pegg_barnett_density():
    assert pegg_barnett_density(0.0, 1.0) == pytest.approx(1 / (2 * math.pi))
    exact = (1 + 0.6 * math.exp(-0.09)) / (2 * math.pi)
    assert pegg_barnett_density(0.3, 0.0) == pytest.approx(exact, abs=1e-15)
    assert exact == pytest.approx(0.24636, abs=1e-4)
    grid = np.linspace(-math.pi, math.pi, 2001)
    assert np.trapezoid(pegg_barnett_density(0.7, grid), grid) == pytest.approx(1, abs=1e-10)
    with pytest.raises(ValueError):
        pegg_barnett_density(0.5, 4.0)


def test_pegg_barnett_density_stays_positive():
    # 2 a e^{-a^2} peaks at sqrt(2/e) < 1, so no real amplitude triggers the warning
    grid = np.linspace(-math.pi, math.pi, 73)
    with warnings.catch_warnings():
        warnings.simplefilter("error", PhaseDensityWarning)
        for a in np.linspace(0, 3, 61):
            assert pegg_barnett_density(a, grid).min() > 0


@pytest.mark.parametrize("alpha", GRID)
def test_phase_averaged_amplitude_three_ways(alpha):
    closed = phase_averaged_amplitude(alpha)
    assert abs(phase_averaged_amplitude_quadrature(alpha) - closed) <= 1e-6
    num = phase_averaged_correlator_numeric(alpha, math.pi / 2, 0.0)
    assert abs(num - closed) <= 1e-6


def test_phase_averaged_examples():
    assert phase_averaged_amplitude(1.0) == pytest.approx(math.exp(-2) / 2, abs=1e-12)
    assert phase_averaged_amplitude(0.0) == 0
    alphas = np.linspace(0.001, 2, 400)
    ratios = [phase_averaged_amplitude(a) / amplitude_AR(a) for a in alphas]
    assert max(ratios) <= 1
    assert ratios[0] > 0.99


def test_local_tables_kinds():
    assert _local_table("n_tot", 2, 2)[1, 2] == 3
    with pytest.raises(ValueError):
        _local_table("bogus", 1, 1)
    op = local_operator(LAY, "c", "d", "pi")
    assert op.is_hermitian and op.is_diagonal
