"""Effective single-mode POVM elements for the homodyne stations.

Tracing a station's oscillator out of its rate observable leaves an operator
on the signal mode b_j alone.  Two constructions are provided:

* :func:`povm_homodyne` / :func:`povm_rate` sum the closed series;
* :func:`povm_sandwich` propagates |alpha>|k> through the beamsplitter and
  sandwiches the diagonal rate observable numerically.

They are built independently and compared in the tests.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import gammaln

from .fock import FockOperator, FockVector, ModeLayout, auto_cutoff, coherent_state, poisson_tail, tensor
from .observables import _local_table, difference_grid, four_mode_correlations
from .optics import BeamsplitterParams, Setting, propagate, psi_state, source_state

KINDS = ("homodyne-difference", "rate-d")


@dataclass(frozen=True)
class PovmElement:
    kind: str
    params: tuple
    operator: FockOperator
    n_max: int
    m_max: int
    tail_bound: float

    @property
    def matrix(self) -> np.ndarray:
        return self.operator.matrix

    def spectrum(self) -> np.ndarray:
        return np.linalg.eigvalsh(self.matrix)


@dataclass(frozen=True)
class EquivalenceReport:
    scenario: str
    alpha: float
    max_deviation: float
    points: int
    notes: dict = field(default_factory=dict)


def _poisson_weights(alpha: float, n_max: int) -> np.ndarray:
    """alpha^{2n}/n! * e^{-alpha^2} for n = 0..n_max."""
    n = np.arange(n_max + 1)
    if alpha == 0:
        return (n == 0).astype(float)
    return np.exp(-alpha ** 2 + 2 * n * math.log(abs(alpha)) - gammaln(n + 1))


def _homodyne_coefficients(alpha: float, m_max: int, n_max: int) -> np.ndarray:
    """c_m = e^{-a^2} sum_n a^{2n+1}/n! sqrt(m)/(n+m), for m = 1..m_max."""
    w = _poisson_weights(alpha, n_max) * alpha
    n = np.arange(n_max + 1)[:, None]
    m = np.arange(1, m_max + 1)[None, :]
    return (w[:, None] * np.sqrt(m) / (n + m)).sum(axis=0)


def _offdiag(coeffs: np.ndarray, theta: float) -> np.ndarray:
    # e^{i theta}|m><m-1| + e^{-i theta}|m-1><m|
    up = np.diag(coeffs.astype(complex), k=-1) * np.exp(1j * theta)
    return up + up.conj().T


def _series_cap(alpha, n_max):
    return auto_cutoff(alpha) if n_max is None else int(n_max)


def povm_homodyne(alpha: float, theta: float, cutoff: int = 1, n_max: int | None = None) -> PovmElement:
    """Signal-mode element equivalent to the balanced homodyne rate difference."""
    n_max = _series_cap(alpha, n_max)
    mat = _offdiag(_homodyne_coefficients(alpha, cutoff, n_max), theta)
    op = FockOperator(ModeLayout((("b", cutoff),)), mat, is_hermitian=True)
    return PovmElement("homodyne-difference", (alpha, theta), op, n_max, cutoff,
                       poisson_tail(alpha, n_max))


def povm_rate(setting: Setting, cutoff: int = 1, n_max: int | None = None) -> PovmElement:
    """Signal-mode element equivalent to the rate R_d behind U_BS(chi, theta)."""
    chi, alpha, theta = setting.chi, setting.alpha, setting.theta
    n_max = _series_cap(alpha, n_max)
    w = _poisson_weights(alpha, n_max)
    s2, c2 = math.sin(chi) ** 2, math.cos(chi) ** 2
    m = np.arange(cutoff + 1, dtype=float)
    diag = w[0] * c2 * (m > 0)
    n = np.arange(1, n_max + 1, dtype=float)[:, None]
    diag = diag + (w[1:, None] * (s2 * n + c2 * m[None, :]) / (n + m[None, :])).sum(axis=0)
    mat = np.diag(diag).astype(complex)
    mat -= 0.5 * math.sin(2 * chi) * _offdiag(_homodyne_coefficients(alpha, cutoff, n_max), theta)
    op = FockOperator(ModeLayout((("b", cutoff),)), mat, is_hermitian=True)
    return PovmElement("rate-d", (chi, alpha, theta), op, n_max, cutoff,
                       poisson_tail(alpha, n_max))


def povm_sandwich(kind: str, alpha: float, chi: float, theta: float,
                  cutoff: int = 1, cutoff_a: int | None = None) -> np.ndarray:
    """<alpha|_a V^dag O V |alpha>_a as a matrix on the signal mode (numerical path)."""
    table_kind = {"homodyne-difference": "rate_diff", "rate-d": "rate_d"}[kind]
    osc = coherent_state(alpha, cutoff_a, "a")
    cols = []
    for k in range(cutoff + 1):
        sig = FockVector.basis(ModeLayout((("b", cutoff),)), (k,))
        out = propagate(tensor([osc, sig]), "a", "b", BeamsplitterParams(chi, theta), ("c", "d"))
        cols.append(out.amplitudes)
    phi = np.stack(cols, axis=1)
    lay = out.layout
    weights = _local_table(table_kind, lay.cutoff("c"), lay.cutoff("d")).ravel()
    return phi.conj().T @ (weights[:, None] * phi)


# ---------------------------------------------------------------------------
# expectation values on the (b1, b2) state

def _signal_matrix(q: complex = 0.0) -> np.ndarray:
    r = math.sqrt(1.0 - abs(q) ** 2)
    return source_state(q, r).tensor          # psi[n_b1, n_b2]


def two_mode_expectation(m1: np.ndarray, m2: np.ndarray | None, q: complex = 0.0) -> float:
    """<psi| M1 (x) M2 |psi> with M's given on {|0>, |1>} (extra levels ignored)."""
    psi = _signal_matrix(q)
    m1 = np.eye(2) if m1 is None else m1[:2, :2]
    m2 = np.eye(2) if m2 is None else m2[:2, :2]
    return float(np.trace(psi.conj().T @ m1 @ psi @ m2.T).real)


def povm_ch_terms(settings, q: complex = 0.0):
    """K and S values of the CH combination computed with rate POVM elements."""
    v1, v1p, v2, v2p = settings
    mats = {v: povm_rate(v).matrix for v in settings}
    pairs = [(v1, v2), (v1p, v2), (v1, v2p), (v1p, v2p)]
    ks = tuple(two_mode_expectation(mats[a], mats[b], q) for a, b in pairs)
    ss = (two_mode_expectation(mats[v1], None, q), two_mode_expectation(None, mats[v2], q))
    return ks, ss


def verify_povm_equivalence(scenario: str, settings=None, alpha: float = 0.5,
                            cutoff: int | None = None, points: int = 24) -> EquivalenceReport:
    """Max |four-mode expectation - POVM expectation| over a phase grid.

    ``scenario="homodyne"`` compares E_R(theta, 0) for the balanced stations;
    ``scenario="rate"`` compares every K and S term of the CH combination for
    ``settings`` with Alice's primed phase shifted across the grid.
    """
    grid = difference_grid(points)
    notes = {}
    if scenario == "homodyne":
        state = psi_state(alpha, cutoff)
        bs = [BeamsplitterParams(math.pi / 4, t) for t in grid]
        fock = four_mode_correlations(state, bs, BeamsplitterParams(math.pi / 4, 0.0),
                                      [("rate_diff", "rate_diff")])[:, 0]
        m2 = povm_homodyne(alpha, 0.0).matrix
        povm = np.array([two_mode_expectation(povm_homodyne(alpha, t).matrix, m2) for t in grid])
        dev = float(np.max(np.abs(fock - povm)))
    elif scenario == "rate":
        from .inequalities import ch_correlator_K_numeric, ch_local_S_numeric
        if settings is None:
            raise ValueError("rate scenario needs a settings tuple (v1, v1p, v2, v2p)")
        v1, v1p, v2, v2p = settings
        dev = 0.0
        for d in grid:
            shifted = Setting(v1p.chi, v1p.alpha, v1p.theta + d)
            tup = (v1, shifted, v2, v2p)
            ks, ss = povm_ch_terms(tup)
            pairs = [(v1, v2), (shifted, v2), (v1, v2p), (shifted, v2p)]
            fk = [ch_correlator_K_numeric(a, b, cutoff) for a, b in pairs]
            fs = [ch_local_S_numeric(v1, 1, cutoff), ch_local_S_numeric(v2, 2, cutoff)]
            dev = max(dev, float(np.max(np.abs(np.r_[ks, ss] - np.r_[fk, fs]))))
        alpha = max(v.alpha for v in settings)
        # full-transmission elements only reduce to I - |0><0| when the oscillator is off
        for v in settings:
            if v.chi == 0 and v.alpha > 0:
                proj = np.diag([0.0, 1.0])
                notes.setdefault("chi0_deviation_from_projector", {})[v.alpha] = float(
                    np.max(np.abs(povm_rate(v).matrix - proj)))
    else:
        raise ValueError(f"unknown scenario {scenario!r}")
    return EquivalenceReport(scenario, alpha, dev, points, notes)
