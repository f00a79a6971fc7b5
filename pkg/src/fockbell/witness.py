"""Entanglement witnesses built from the CHSH operators of the homodyne stations.

For intensities the witness operator is

    W = sqrt2 n_tot1 n_tot2 - [dn1(t1) dn2(t2) + dn1(t1) dn2(t2') + dn1(t1') dn2(t2)
                               - dn1(t1') dn2(t2')]

with dn_j(t) = n_c - n_d behind a balanced beamsplitter of phase t.  The
rates version replaces n_tot by the no-vacuum projector Pi and dn by the rate
difference.  Primed phases are t1' = t1 + pi/2 and t2' = t2 + orientation*pi/2.
Any orthogonal pair of quadratures on each side keeps W >= 0 on separable
states; the default ``orientation=-1`` makes the bracket on |Psi(alpha)>
equal 2 A (sin D + cos D) with D = t1 - t2, which reaches 2 sqrt2 A.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from . import defaults
from .fock import FockVector, LayoutError, ModeLayout, tensor
from .observables import difference_grid, station_expectation
from .optics import BeamsplitterParams, FOUR_MODES, measured_state, psi_state

KINDS = ("intensities", "rates")
_TABLES = {"intensities": ("n_tot", "n_diff"), "rates": ("pi", "rate_diff")}


@dataclass(frozen=True)
class WitnessReport:
    kind: str
    alpha: float | None
    thetas: tuple[float, float]
    witness_value: float
    normalization: float
    bracket: float
    amplitude: float | None
    orientation: int = -1
    metadata: dict = field(default_factory=dict)

    @property
    def detects_entanglement(self) -> bool:
        return self.witness_value < -defaults.VIOLATION_TOL

    @property
    def normalized_value(self) -> float:
        """Witness divided by <n_tot1 n_tot2> (or <Pi1 Pi2>); nan if that vanishes."""
        if self.normalization <= 0:
            return math.nan
        return self.witness_value / self.normalization


def amplitude_AT_witness(alpha: float) -> float:
    """Intensity witness amplitude, identical to A_T = 1/(1 + alpha^2)."""
    return 1.0 / (1.0 + alpha * alpha)


def amplitude_AR_witness(alpha: float) -> float:
    """(1 - e^{-alpha^2}) / alpha^2, with value 1 at alpha = 0."""
    x = alpha * alpha
    if x < defaults.SMALL_ALPHA_SQ:
        return 1.0 - x / 2
    return -math.expm1(-x) / x


def witness_amplitude(kind: str, alpha: float) -> float:
    _check_kind(kind)
    return amplitude_AT_witness(alpha) if kind == "intensities" else amplitude_AR_witness(alpha)


def detection_threshold(kind: str) -> float:
    """alpha^2 where the amplitude drops to 1/2 (root-finding oracle)."""
    _check_kind(kind)
    return brentq(lambda x: witness_amplitude(kind, math.sqrt(x)) - 0.5, 1e-6, 10.0, xtol=1e-14)


def _check_kind(kind):
    if kind not in KINDS:
        raise ValueError(f"witness kind must be one of {KINDS}, got {kind!r}")


def _check_layout(state: FockVector):
    missing = [m for m in FOUR_MODES if m not in state.layout]
    if missing:
        raise LayoutError(f"witness needs modes {FOUR_MODES}; missing {missing}")


def evaluate_witness(state: FockVector, kind: str, theta1: float, theta2: float,
                     orientation: int = -1, alpha: float | None = None) -> WitnessReport:
    """<W> on a state over (a1, b1, b2, a2) by propagating both stations."""
    _check_kind(kind)
    _check_layout(state)
    if orientation not in (-1, 1):
        raise ValueError("orientation must be +1 or -1")
    total, diff = _TABLES[kind]
    t1p = theta1 + math.pi / 2
    t2p = theta2 + orientation * math.pi / 2

    def corr(a, b, k1, k2):
        return station_expectation(measured_state(state, BeamsplitterParams(math.pi / 4, a),
                                                  BeamsplitterParams(math.pi / 4, b)), k1, k2)

    norm = corr(theta1, theta2, total, total)
    bracket = (corr(theta1, theta2, diff, diff) + corr(theta1, t2p, diff, diff)
               + corr(t1p, theta2, diff, diff) - corr(t1p, t2p, diff, diff))
    value = math.sqrt(2) * norm - bracket
    amp = witness_amplitude(kind, alpha) if alpha is not None else None
    return WitnessReport(kind, alpha, (theta1, theta2), float(value), float(norm),
                         float(bracket), amp, orientation)


def witness_intensities(alpha: float, theta1: float, theta2: float,
                        cutoff: int | None = None, orientation: int = -1) -> WitnessReport:
    return evaluate_witness(psi_state(alpha, cutoff), "intensities", theta1, theta2,
                            orientation, alpha)


def witness_rates(alpha: float, theta1: float, theta2: float,
                  cutoff: int | None = None, orientation: int = -1) -> WitnessReport:
    return evaluate_witness(psi_state(alpha, cutoff), "rates", theta1, theta2,
                            orientation, alpha)


def witness_closed(kind: str, alpha: float, theta1: float, theta2: float) -> float:
    """Witness on |Psi(alpha)> from the closed amplitudes (orientation -1)."""
    x = alpha * alpha
    norm = x * x + x if kind == "intensities" else -math.expm1(-x)
    d = theta1 - theta2
    return norm * (math.sqrt(2) - 2 * witness_amplitude(kind, alpha) * (math.sin(d) + math.cos(d)))


def witness_minimum(kind: str, alpha: float, cutoff: int | None = None,
                    points: int = defaults.FIT_GRID_POINTS) -> WitnessReport:
    """Smallest witness on |Psi(alpha)> over a grid of phase differences (theta2 = 0)."""
    state = psi_state(alpha, cutoff)
    reports = [evaluate_witness(state, kind, float(d), 0.0, alpha=alpha)
               for d in difference_grid(points)]
    return min(reports, key=lambda r: r.witness_value)


def numeric_witness_amplitude(kind: str, alpha: float, cutoff: int | None = None) -> float:
    """<d1 d2>/<norm> at phase difference pi/2, computed by propagation."""
    _check_kind(kind)
    total, diff = _TABLES[kind]
    st = measured_state(psi_state(alpha, cutoff), BeamsplitterParams(math.pi / 4, math.pi / 2),
                        BeamsplitterParams(math.pi / 4, 0.0))
    return station_expectation(st, diff, diff) / station_expectation(st, total, total)


# ---------------------------------------------------------------------------
# separable states

def _local_polynomial(rng, cut_x: int, cut_y: int, degree: int) -> np.ndarray:
    """sum_{i+j<=degree} c_ij x^dag^i y^dag^j |0,0> as a (cut_x+1, cut_y+1) array."""
    out = np.zeros((cut_x + 1, cut_y + 1), dtype=complex)
    for i in range(degree + 1):
        for j in range(degree + 1 - i):
            c = rng.normal() + 1j * rng.normal()
            out[i, j] = c * math.sqrt(math.factorial(i) * math.factorial(j))
    return out


def random_separable_state(layout: ModeLayout | None = None, seed: int = 0,
                           polynomial_degree: int = defaults.SEPARABLE_DEGREE) -> FockVector:
    """Normalized f(a1^dag, b1^dag) g(a2^dag, b2^dag)|0> with complex Gaussian coefficients.

    ``layout`` must hold (a1, b1, b2, a2); it defaults to cutoff
    ``polynomial_degree`` on every mode.  A zero draw is retried with the
    next sub-seed.
    """
    if layout is None:
        layout = ModeLayout(tuple((m, max(polynomial_degree, 1)) for m in FOUR_MODES))
    if polynomial_degree < 0:
        raise ValueError("polynomial degree must be non-negative")
    if set(layout.names) != set(FOUR_MODES):
        raise LayoutError(f"separable states are built on {FOUR_MODES}, got {layout.names}")
    if polynomial_degree > min(layout.cutoffs):
        raise ValueError(f"degree {polynomial_degree} exceeds the smallest cutoff {min(layout.cutoffs)}")
    sub = 0
    while True:
        rng = np.random.default_rng([seed, sub])
        f = _local_polynomial(rng, layout.cutoff("a1"), layout.cutoff("b1"), polynomial_degree)
        g = _local_polynomial(rng, layout.cutoff("a2"), layout.cutoff("b2"), polynomial_degree)
        if np.linalg.norm(f) > 1e-150 and np.linalg.norm(g) > 1e-150:
            break
        sub += 1
    f /= np.linalg.norm(f)
    g /= np.linalg.norm(g)
    t = np.einsum("ij,kl->ijlk", f, g)           # (a1, b1, b2, a2)
    canon = ModeLayout(tuple((m, layout.cutoff(m)) for m in FOUR_MODES))
    vec = FockVector.from_tensor(canon, t)
    if canon.names != layout.names:
        perm = [canon.position(m) for m in layout.names]
        vec = FockVector.from_tensor(layout, np.transpose(t, perm))
    return vec


def product_coherent_state(alpha1: float, alpha2: float, cutoff: int | None = None) -> FockVector:
    """|alpha1>|0>|0>|alpha2> on (a1, b1, b2, a2)."""
    from .fock import coherent_state
    vac = FockVector.vacuum(ModeLayout((("b1", 1), ("b2", 1))))
    return tensor([coherent_state(alpha1, cutoff, "a1"), vac, coherent_state(alpha2, cutoff, "a2")])


def _random_hermitian(rng, dim):
    m = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    return (m + m.conj().T) / 2


def factorization_certificate(state: FockVector, seed: int = 0, trials: int = 5) -> float:
    """max |<O1 O2> - <O1><O2>| over random local Hermitian O1 (a1, b1) and O2 (b2, a2)."""
    _check_layout(state)
    order = [state.layout.position(m) for m in ("a1", "b1", "b2", "a2")]
    t = np.transpose(state.tensor, order)
    d1 = t.shape[0] * t.shape[1]
    psi = t.reshape(d1, -1)
    rng = np.random.default_rng(seed)
    worst = 0.0
    norm = float(np.vdot(psi, psi).real)
    for _ in range(trials):
        o1 = _random_hermitian(rng, d1)
        o2 = _random_hermitian(rng, psi.shape[1])
        joint = np.trace(psi.conj().T @ o1 @ psi @ o2.T).real / norm
        m1 = np.trace(psi.conj().T @ o1 @ psi).real / norm
        m2 = np.trace(psi.T @ psi.conj() @ o2).real / norm
        worst = max(worst, abs(joint - m1 * m2))
    return float(worst)
