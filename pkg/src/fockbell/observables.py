"""Rate and intensity observables, correlation functions and their amplitudes.

After a measurement stage every observable used here is diagonal in the
(c_j, d_j) number basis, so expectation values reduce to weighted sums over
the output photon-number distribution.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import trapezoid

from . import defaults
from .fock import FockOperator, FockVector, ModeLayout, apply, resolve_cutoff
from .optics import (BeamsplitterParams, apply_measurement_stage, psi_state,
                     source_state)

TARGETS = ("c", "d", "difference")


class PhaseDensityWarning(UserWarning):
    """The small-amplitude phase density went negative."""


@dataclass(frozen=True)
class RateObservable:
    """Rate operator on the mode pair (c, d); identity on every other mode."""

    layout: ModeLayout
    pair: tuple[str, str]
    target: str
    operator: FockOperator

    @property
    def eigenvalues(self) -> np.ndarray:
        return np.diagonal(self.operator.matrix).real


@dataclass(frozen=True)
class CorrelatorValue:
    value: float
    amplitude: float | None = None
    residual: float | None = None
    metadata: dict = field(default_factory=dict)


# ---------------------------------------------------------------------------
# local diagonal observables

def _local_table(kind: str, cut_c: int, cut_d: int) -> np.ndarray:
    """Eigenvalue table f[n_c, n_d] of a local diagonal observable."""
    nc = np.arange(cut_c + 1)[:, None].astype(float)
    nd = np.arange(cut_d + 1)[None, :].astype(float)
    tot = nc + nd
    safe = np.where(tot > 0, tot, 1.0)
    if kind == "rate_c":
        return np.where(tot > 0, nc / safe, 0.0)
    if kind == "rate_d":
        return np.where(tot > 0, nd / safe, 0.0)
    if kind == "rate_diff":
        return np.where(tot > 0, (nc - nd) / safe, 0.0)
    if kind == "pi":
        return (tot > 0).astype(float)
    if kind == "n_c":
        return nc + 0 * nd
    if kind == "n_d":
        return nd + 0 * nc
    if kind == "n_diff":
        return nc - nd
    if kind == "n_tot":
        return tot
    if kind == "one":
        return np.ones_like(tot)
    raise ValueError(f"unknown local observable {kind!r}")


LOCAL_KINDS = ("rate_c", "rate_d", "rate_diff", "pi", "n_c", "n_d", "n_diff", "n_tot", "one")


def local_operator(layout: ModeLayout, mode_c: str, mode_d: str, kind: str) -> FockOperator:
    """Diagonal observable of kind ``kind`` on the pair (mode_c, mode_d)."""
    table = _local_table(kind, layout.cutoff(mode_c), layout.cutoff(mode_d))
    sub = layout.sublayout([mode_c, mode_d])
    return FockOperator(sub, np.diag(table.ravel().astype(complex)), is_hermitian=True,
                        meta={"kind": kind})


def rate_operator(layout: ModeLayout, mode_c: str, mode_d: str, target: str) -> RateObservable:
    """Pi n_x/(n_c + n_d) Pi for x = c or d, or the difference of the two.

    The two-mode vacuum is assigned the value 0.
    """
    kinds = {"c": "rate_c", "d": "rate_d", "difference": "rate_diff"}
    if target not in kinds:
        raise ValueError(f"target must be one of {TARGETS}, not {target!r}")
    op = local_operator(layout, mode_c, mode_d, kinds[target])
    return RateObservable(op.layout, (mode_c, mode_d), target, op)


def no_vacuum_projector(layout: ModeLayout, mode_c: str, mode_d: str) -> FockOperator:
    return local_operator(layout, mode_c, mode_d, "pi")


# ---------------------------------------------------------------------------
# correlations on propagated four-mode states

def station_expectation(measured: FockVector, kind1: str | None, kind2: str | None) -> float:
    """<O1 O2> on a state whose stations are already propagated to (c_j, d_j).

    ``None`` means the identity at that station.
    """
    lay = measured.layout
    probs = np.abs(measured.tensor) ** 2
    letters = "ijklmnop"[:len(lay)]
    operands, subs = [probs], [letters]
    for side, kind in ((1, kind1), (2, kind2)):
        if kind is None:
            continue
        c, d = f"c{side}", f"d{side}"
        operands.append(_local_table(kind, lay.cutoff(c), lay.cutoff(d)))
        subs.append(letters[lay.position(c)] + letters[lay.position(d)])
    return float(np.einsum(",".join(subs) + "->", *operands, optimize=True))


def four_mode_correlations(state: FockVector, settings1, setting2, pairs) -> np.ndarray:
    """Evaluate ``<O1 O2>`` for every station-1 setting against one station-2 setting.

    ``pairs`` is a list of (kind1, kind2); the result has shape
    (len(settings1), len(pairs)).  Station 2 is propagated once.
    """
    after2 = apply_measurement_stage(state, 2, setting2)
    out = np.empty((len(settings1), len(pairs)))
    for i, s1 in enumerate(settings1):
        measured = apply_measurement_stage(after2, 1, s1)
        for j, (k1, k2) in enumerate(pairs):
            out[i, j] = station_expectation(measured, k1, k2)
    return out


def fit_sine_amplitude(deltas, values) -> tuple[float, float]:
    """Least-squares A in values ~ A sin(deltas); returns (A, max residual)."""
    s = np.sin(np.asarray(deltas, dtype=float))
    v = np.asarray(values, dtype=float)
    amp = float(np.dot(s, v) / np.dot(s, s))
    return amp, float(np.max(np.abs(v - amp * s)))


def difference_grid(points: int = defaults.FIT_GRID_POINTS) -> np.ndarray:
    return 2 * np.pi * np.arange(points) / points


def _balanced(theta):
    return BeamsplitterParams(math.pi / 4, theta)


def _balanced_correlator(alpha, theta1, theta2, cutoff, pairs, combine, fit, label):
    cutoff = resolve_cutoff(alpha, cutoff)
    state = psi_state(alpha, cutoff)
    thetas1 = [theta1]
    if fit:
        thetas1 += list(theta2 + difference_grid())
    raw = four_mode_correlations(state, [_balanced(t) for t in thetas1], _balanced(theta2), pairs)
    vals = np.array([combine(row) for row in raw])
    meta = {"observable": label, "alpha": alpha, "cutoff": cutoff,
            "theta1": theta1, "theta2": theta2}
    if not fit:
        return CorrelatorValue(float(vals[0]), metadata=meta)
    amp, res = fit_sine_amplitude(difference_grid(), vals[1:])
    return CorrelatorValue(float(vals[0]), amp, res, meta)


def rate_correlator_ER(alpha: float, theta1: float, theta2: float,
                       cutoff: int | None = None, fit: bool = True) -> CorrelatorValue:
    """<Psi(alpha)| H_1(theta1) H_2(theta2) |Psi(alpha)> by brute-force propagation."""
    return _balanced_correlator(alpha, theta1, theta2, cutoff,
                                [("rate_diff", "rate_diff")], lambda r: r[0], fit, "E_R")


def intensity_correlator_ET(alpha: float, theta1: float, theta2: float,
                            cutoff: int | None = None, fit: bool = True) -> CorrelatorValue:
    """Ratio <dn_1 dn_2> / <n_tot1 n_tot2> on |Psi(alpha)>."""
    if alpha == 0:
        raise ZeroDivisionError("E_T is undefined at alpha = 0 (zero total intensity product)")

    def ratio(row):
        if row[1] < 1e-14:
            raise ZeroDivisionError(f"intensity normalisation {row[1]:.3g} below 1e-14")
        return row[0] / row[1]

    return _balanced_correlator(alpha, theta1, theta2, cutoff,
                                [("n_diff", "n_diff"), ("n_tot", "n_tot")], ratio, fit, "E_T")


# ---------------------------------------------------------------------------
# closed-form amplitudes

def amplitude_AR(alpha: float) -> float:
    """Amplitude of the rate correlator, e^{-2a^2}(e^{a^2}-1)^2/a^2."""
    x = float(alpha) ** 2
    if x == 0.0:
        return 0.0
    return math.expm1(-x) ** 2 / x


def amplitude_AT(alpha: float) -> float:
    """Amplitude of the intensity correlator, 1/(1 + a^2)."""
    return 1.0 / (1.0 + float(alpha) ** 2)


def phase_averaged_amplitude(alpha: float) -> float:
    """a^2 e^{-2a^2}/(1 + a^2)."""
    x = float(alpha) ** 2
    return x * math.exp(-2 * x) / (1 + x)


# ---------------------------------------------------------------------------
# parametric (c-number) approximation

def classical_station_operator(alpha: float, theta: float, cutoff: int = 1,
                               mode: str = "b") -> FockOperator:
    """D^{-1/2} alpha (e^{i theta} b^dag + e^{-i theta} b) D^{-1/2}, D = alpha^2 + n_b.

    This is the homodyne rate difference with the oscillator operator
    replaced by its real eigenvalue; the diagonal inverse is taken entrywise.
    """
    alpha = float(alpha)
    n = np.arange(cutoff + 1, dtype=float)
    denom = alpha ** 2 + n
    inv_sqrt = np.where(denom > 0, 1.0 / np.sqrt(np.where(denom > 0, denom, 1.0)), 0.0)
    raise_ = np.diag(np.sqrt(n[1:]), k=-1).astype(complex)
    num = alpha * (np.exp(1j * theta) * raise_ + np.exp(-1j * theta) * raise_.conj().T)
    mat = inv_sqrt[:, None] * num * inv_sqrt[None, :]
    return FockOperator(ModeLayout(((mode, cutoff),)), mat, is_hermitian=True)


def _source_on(cutoff: int) -> FockVector:
    psi = source_state()
    return psi.padded({"b1": cutoff, "b2": cutoff}) if cutoff > 1 else psi


def classical_approx_correlator(alpha: float, theta1: float, theta2: float,
                                cutoff: int = 1, fit: bool = True) -> CorrelatorValue:
    """Two-mode expectation of the c-number-substituted rate-difference product."""
    cutoff = max(int(cutoff or 1), 1)
    psi = _source_on(cutoff)

    def value(t1, t2):
        o1 = classical_station_operator(alpha, t1, cutoff, "b1")
        o2 = classical_station_operator(alpha, t2, cutoff, "b2")
        return float(np.vdot(psi.amplitudes, apply(o1, apply(o2, psi)).amplitudes).real)

    meta = {"observable": "E_R^C", "alpha": alpha, "cutoff": cutoff,
            "theta1": theta1, "theta2": theta2}
    v = value(theta1, theta2)
    if not fit:
        return CorrelatorValue(v, metadata=meta)
    grid = difference_grid()
    amp, res = fit_sine_amplitude(grid, [value(theta2 + d, theta2) for d in grid])
    return CorrelatorValue(v, amp, res, meta)


def pegg_barnett_density(alpha: float, delta_theta):
    """Small-amplitude phase density (1 + 2 a e^{-a^2} cos dtheta)/(2 pi).

    Warns with :class:`PhaseDensityWarning` if the value is negative.
    """
    dt = np.asarray(delta_theta, dtype=float)
    if np.any(np.abs(dt) > math.pi + 1e-12):
        raise ValueError("phase offset must lie in [-pi, pi]")
    dens = (1 + 2 * alpha * math.exp(-alpha ** 2) * np.cos(dt)) / (2 * math.pi)
    if np.any(dens < 0):
        warnings.warn(f"phase density negative for alpha={alpha}", PhaseDensityWarning,
                      stacklevel=2)
    return float(dens) if dens.ndim == 0 else dens


def phase_averaged_amplitude_quadrature(alpha: float,
                                        points: int = defaults.QUADRATURE_POINTS,
                                        theta1: float = math.pi / 2, theta2: float = 0.0) -> float:
    """Closed-form check: trapezoid average of A_T sin(...) over two phase densities."""
    grid = np.linspace(-math.pi, math.pi, points)
    p = pegg_barnett_density(alpha, grid)
    d1, d2 = np.meshgrid(grid, grid, indexing="ij")
    integrand = p[:, None] * p[None, :] * np.sin(theta1 + d1 - theta2 - d2)
    avg = trapezoid(trapezoid(integrand, grid, axis=1), grid)
    return amplitude_AT(alpha) * avg / math.sin(theta1 - theta2)


def phase_averaged_correlator_numeric(alpha: float, theta1: float, theta2: float,
                                      points: int = defaults.QUADRATURE_POINTS,
                                      cutoff: int = 1) -> float:
    """Fock-space c-number correlator averaged over both oscillator phase densities.

    The two-mode expectation is decomposed into its four phase harmonics
    e^{+-i phi1} e^{+-i phi2}, each computed on the truncated (b1, b2) space,
    then integrated with the trapezoid rule.
    """
    cutoff = max(int(cutoff or 1), 1)
    psi = _source_on(cutoff)
    base = classical_station_operator(alpha, 0.0, cutoff).matrix
    up = np.tril(base)       # e^{+i phi} part (raises b)
    down = np.triu(base)     # e^{-i phi} part
    lay = ModeLayout((("b", cutoff),))
    harm = {}
    for s1, m1 in ((1, up), (-1, down)):
        for s2, m2 in ((1, up), (-1, down)):
            o1 = FockOperator(lay.renamed({"b": "b1"}), m1)
            o2 = FockOperator(lay.renamed({"b": "b2"}), m2)
            harm[s1, s2] = complex(np.vdot(psi.amplitudes, apply(o1, apply(o2, psi)).amplitudes))
    grid = np.linspace(-math.pi, math.pi, points)
    p = pegg_barnett_density(alpha, grid)
    phi1 = (theta1 + grid)[:, None]
    phi2 = (theta2 + grid)[None, :]
    vals = sum(c * np.exp(1j * (s1 * phi1 + s2 * phi2)) for (s1, s2), c in harm.items())
    integrand = p[:, None] * p[None, :] * vals.real
    return float(trapezoid(trapezoid(integrand, grid, axis=1), grid))
