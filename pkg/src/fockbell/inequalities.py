"""CHSH and CH inequalities for intensity rates, and the intensity CHSH of TWC.

Setting tuples for the CH inequality are always ordered
``(v1, v1p, v2, v2p)``: Alice's first and second setting, then Bob's.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import defaults
from .fock import resolve_cutoff
from .observables import (amplitude_AR, amplitude_AT, four_mode_correlations,
                          station_expectation)
from .optics import (BeamsplitterParams, InitialStateParams, Setting,
                     measured_state, prepare_state, psi_state)

__all__ = [
    "Setting", "InequalityReport", "CHEvaluation", "OPTIMAL_CHSH_ANGLES", "HARDY_OPTIMUM",
    "chsh_combination", "chsh_rates_value", "chsh_twc_value",
    "ch_correlator_K_closed", "ch_local_S_closed", "ch_correlator_K_numeric",
    "ch_local_S_numeric", "ch_rates_value", "ch_value_closed",
    "ch_alternative_form_value", "ch_alternative_lower_expression",
]

# theta1, theta1', theta2, theta2' reaching 2 sqrt2 for A sin(theta1 - theta2)
OPTIMAL_CHSH_ANGLES = (0.0, math.pi / 2, -math.pi / 4, -3 * math.pi / 4)

_ZERO = Setting(0.0, 0.0, 0.0)
HARDY_OPTIMUM = (
    _ZERO,
    Setting(3 * math.pi / 20, math.sqrt(2) / 2, 0.0),
    _ZERO,
    Setting(3 * math.pi / 20, math.sqrt(2) / 2, -math.pi / 2),
)


@dataclass(frozen=True)
class InequalityReport:
    inequality: str
    value: float
    bounds: tuple[float, float]
    violated: bool
    margin: float
    caveat: str | None = None
    metadata: dict = field(default_factory=dict)

    @classmethod
    def build(cls, inequality, value, bounds, caveat=None, tol=defaults.VIOLATION_TOL, **meta):
        lo, hi = bounds
        # positive margin = distance outside the allowed interval
        margin = max(lo - value, value - hi)
        return cls(inequality, float(value), (lo, hi), bool(margin > tol), float(margin),
                   caveat, dict(meta, tolerance=tol))


@dataclass(frozen=True)
class CHEvaluation:
    settings: tuple[Setting, Setting, Setting, Setting]
    k_values: tuple[float, float, float, float]
    s_values: tuple[float, float]
    ch_value: float
    method: str
    bounds: tuple[float, float] = (-1.0, 0.0)
    metadata: dict = field(default_factory=dict)

    @property
    def violated_lower(self) -> bool:
        return self.ch_value < self.bounds[0] - defaults.VIOLATION_TOL

    @property
    def violated_upper(self) -> bool:
        return self.ch_value > self.bounds[1] + defaults.VIOLATION_TOL

    def consistency_error(self) -> float:
        k = self.k_values
        recomposed = k[0] + k[1] + k[2] - k[3] - self.s_values[0] - self.s_values[1]
        return abs(recomposed - self.ch_value)

    def report(self) -> InequalityReport:
        return InequalityReport.build("ch-rates", self.ch_value, self.bounds,
                                      method=self.method, **self.metadata)


# ---------------------------------------------------------------------------
# CHSH

def chsh_combination(e, t1, t1p, t2, t2p) -> float:
    """E(t1,t2) + E(t1',t2) + E(t1,t2') - E(t1',t2') for a callable E."""
    return e(t1, t2) + e(t1p, t2) + e(t1, t2p) - e(t1p, t2p)


def _balanced_pair_table(alpha, thetas1, thetas2, cutoff, pairs):
    state = psi_state(alpha, cutoff)
    bs = [BeamsplitterParams(math.pi / 4, t) for t in thetas1]
    cols = [four_mode_correlations(state, bs, BeamsplitterParams(math.pi / 4, t2), pairs)
            for t2 in thetas2]
    return np.stack(cols, axis=1)        # [i1, i2, pair]


def _chsh_from_table(tab):
    return tab[0, 0] + tab[1, 0] + tab[0, 1] - tab[1, 1]


def chsh_rates_value(alpha, theta1, theta1p, theta2, theta2p, cutoff=None,
                     method: str = "fock-numeric") -> InequalityReport:
    """|CHSH combination| of rate correlators on |Psi(alpha)>; classical bound 2."""
    cutoff = resolve_cutoff(alpha, cutoff)
    if method == "closed-form":
        amp = amplitude_AR(alpha)
        val = chsh_combination(lambda a, b: amp * math.sin(a - b), theta1, theta1p, theta2, theta2p)
    elif method == "fock-numeric":
        tab = _balanced_pair_table(alpha, (theta1, theta1p), (theta2, theta2p), cutoff,
                                   [("rate_diff", "rate_diff")])[..., 0]
        val = _chsh_from_table(tab)
    else:
        raise ValueError(f"unknown method {method!r}")
    return InequalityReport.build("chsh-rates", abs(val), (-2.0, 2.0), alpha=alpha,
                                  cutoff=cutoff, method=method,
                                  angles=(theta1, theta1p, theta2, theta2p))


def chsh_twc_value(alpha, theta1, theta1p, theta2, theta2p, cutoff=None,
                   method: str = "fock-numeric") -> InequalityReport:
    """Same combination built from intensity correlators E_T.

    Its bound relies on an extra assumption on total intensities, so a
    violation here is not evidence against local realism; the report says so.
    """
    cutoff = resolve_cutoff(alpha, cutoff)
    if method == "closed-form":
        amp = amplitude_AT(alpha)
        val = chsh_combination(lambda a, b: amp * math.sin(a - b), theta1, theta1p, theta2, theta2p)
    elif method == "fock-numeric":
        if alpha == 0:
            raise ZeroDivisionError("E_T is undefined at alpha = 0")
        tab = _balanced_pair_table(alpha, (theta1, theta1p), (theta2, theta2p), cutoff,
                                   [("n_diff", "n_diff"), ("n_tot", "n_tot")])
        val = _chsh_from_table(tab[..., 0] / tab[..., 1])
    else:
        raise ValueError(f"unknown method {method!r}")
    return InequalityReport.build(
        "chsh-twc", abs(val), (-2.0, 2.0),
        caveat="not a loophole-free Bell test: assumes setting-independent total intensity",
        alpha=alpha, cutoff=cutoff, method=method, angles=(theta1, theta1p, theta2, theta2p))


# ---------------------------------------------------------------------------
# CH closed forms

# below SMALL_ALPHA_SQ the removable singularities are replaced by their
# leading series terms (limits 1, 0 and a at x = 0)

def _f(x):
    # (e^x - 1)/x
    return 1.0 + x / 2 if x < defaults.SMALL_ALPHA_SQ else math.expm1(x) / x


def _g(x):
    # (1 + e^x (x - 1))/x
    return x / 2 + x * x / 3 if x < defaults.SMALL_ALPHA_SQ else (1.0 + math.exp(x) * (x - 1.0)) / x


def _h(a):
    # (e^{a^2} - 1)/a
    x = a * a
    return a * (1.0 + x / 2) if x < defaults.SMALL_ALPHA_SQ else math.expm1(x) / a


def _k_closed(c1, a1, t1, c2, a2, t2):
    x1, x2 = a1 * a1, a2 * a2
    s1, s2 = math.sin(c1) ** 2, math.sin(c2) ** 2
    k1, k2 = 1.0 - s1, 1.0 - s2
    e1, e2 = math.expm1(x1), math.expm1(x2)
    bracket = ((e2 * _g(x1) + e1 * _g(x2)) * s1 * s2
               + e1 * _f(x2) * s1 * k2
               + _f(x1) * e2 * k1 * s2
               + 0.5 * _h(a1) * _h(a2) * math.sin(2 * c1) * math.sin(2 * c2) * math.sin(t1 - t2))
    return 0.5 * math.exp(-x1 - x2) * bracket


def _s_closed(c, a):
    x = a * a
    s = math.sin(c) ** 2
    return 0.5 * math.exp(-x) * (s * (math.expm1(x) + _g(x)) + (1.0 - s) * _f(x))


def ch_correlator_K_closed(v1: Setting, v2: Setting) -> float:
    """<R_d1(v1) R_d2(v2)> on the single-photon state, closed form."""
    return _k_closed(v1.chi, v1.alpha, v1.theta, v2.chi, v2.alpha, v2.theta)


def ch_local_S_closed(v: Setting) -> float:
    """<R_d(v)> on either station, closed form (independent of theta)."""
    return _s_closed(v.chi, v.alpha)


def ch_value_closed(p) -> float:
    """CH combination from a flat 12-tuple (chi, alpha, theta) x (v1, v1p, v2, v2p)."""
    c1, a1, t1, c1p, a1p, t1p, c2, a2, t2, c2p, a2p, t2p = p
    return (_k_closed(c1, a1, t1, c2, a2, t2) + _k_closed(c1p, a1p, t1p, c2, a2, t2)
            + _k_closed(c1, a1, t1, c2p, a2p, t2p) - _k_closed(c1p, a1p, t1p, c2p, a2p, t2p)
            - _s_closed(c1, a1) - _s_closed(c2, a2))


# ---------------------------------------------------------------------------
# CH by brute force on the four-mode state

def _initial(alpha1, alpha2, q):
    r = math.sqrt(1.0 - abs(q) ** 2)
    return InitialStateParams(q, r, alpha1, alpha2)


def _pair_numeric(v1, v2, kind1, kind2, cutoff=None, q=0.0):
    """<O1(v1) O2(v2)> on |Phi(alpha_v1, alpha_v2)>; kind None = identity."""
    a1 = v1.alpha if v1 is not None else 0.0
    a2 = v2.alpha if v2 is not None else 0.0
    state = prepare_state(_initial(a1, a2, q), _cut(a1, cutoff), _cut(a2, cutoff))
    s1 = v1 if v1 is not None else _ZERO
    s2 = v2 if v2 is not None else _ZERO
    return station_expectation(measured_state(state, s1, s2), kind1, kind2)


def _cut(alpha, cutoff):
    # a shared explicit cutoff must still pass the tail rule for each amplitude
    return resolve_cutoff(alpha, cutoff)


def ch_correlator_K_numeric(v1: Setting, v2: Setting, cutoff=None, q=0.0) -> float:
    return _pair_numeric(v1, v2, "rate_d", "rate_d", cutoff, q)


def ch_local_S_numeric(v: Setting, side: int = 1, cutoff=None, q=0.0) -> float:
    if side == 1:
        return _pair_numeric(v, None, "rate_d", None, cutoff, q)
    return _pair_numeric(None, v, None, "rate_d", cutoff, q)


def ch_rates_value(settings, method: str = "closed-form", cutoff=None, q: complex = 0.0) -> CHEvaluation:
    """Evaluate the CH combination for rates; bounds (-1, 0).

    ``method`` is ``"closed-form"``, ``"fock-numeric"`` (the oscillator state
    is rebuilt for every term, since it depends on the settings) or
    ``"povm"`` (single-mode effective operators on the (b1, b2) state).
    Only the latter two accept a vacuum admixture ``q``.
    """
    v1, v1p, v2, v2p = settings
    pairs = [(v1, v2), (v1p, v2), (v1, v2p), (v1p, v2p)]
    if method == "closed-form":
        if q != 0:
            raise ValueError("closed-form correlators assume q = 0; use 'fock-numeric' or 'povm'")
        ks = tuple(ch_correlator_K_closed(a, b) for a, b in pairs)
        ss = (ch_local_S_closed(v1), ch_local_S_closed(v2))
    elif method == "fock-numeric":
        ks = tuple(ch_correlator_K_numeric(a, b, cutoff, q) for a, b in pairs)
        ss = (ch_local_S_numeric(v1, 1, cutoff, q), ch_local_S_numeric(v2, 2, cutoff, q))
    elif method == "povm":
        from .povm import povm_ch_terms
        ks, ss = povm_ch_terms(settings, q)
    else:
        raise ValueError(f"unknown method {method!r}")
    value = ks[0] + ks[1] + ks[2] - ks[3] - ss[0] - ss[1]
    return CHEvaluation(tuple(settings), tuple(float(k) for k in ks),
                        tuple(float(s) for s in ss), float(value), method,
                        metadata={"cutoff": cutoff, "q": q})


def ch_alternative_form_value(settings, cutoff=None, q: complex = 0.0) -> float:
    """Middle expression of the transformed CH inequality for rates.

    Alice's first setting is read out at c1 and Bob's settings swap roles:
    <R_c1 R_d2 + R_c1 R'_d2 + R'_d1 R'_d2 - R'_d1 R_d2 - R_c1 - R'_d2>.
    """
    v1, v1p, v2, v2p = settings
    return (_pair_numeric(v1, v2, "rate_c", "rate_d", cutoff, q)
            + _pair_numeric(v1, v2p, "rate_c", "rate_d", cutoff, q)
            + _pair_numeric(v1p, v2p, "rate_d", "rate_d", cutoff, q)
            - _pair_numeric(v1p, v2, "rate_d", "rate_d", cutoff, q)
            - _pair_numeric(v1, None, "rate_c", None, cutoff, q)
            - _pair_numeric(None, v2p, None, "rate_d", cutoff, q))


def ch_alternative_lower_expression(settings, cutoff=None, q: complex = 0.0) -> float:
    """<(R_tot1 - 1)(R_d2 + R'_d2) - R_tot1>, the lower side of the transformed form."""
    v1, _, v2, v2p = settings
    return (_pair_numeric(v1, v2, "pi", "rate_d", cutoff, q)
            + _pair_numeric(v1, v2p, "pi", "rate_d", cutoff, q)
            - _pair_numeric(None, v2, None, "rate_d", cutoff, q)
            - _pair_numeric(None, v2p, None, "rate_d", cutoff, q)
            - _pair_numeric(v1, None, "pi", None, cutoff, q))
