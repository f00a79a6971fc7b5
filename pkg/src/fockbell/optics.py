"""Beamsplitters lifted to Fock space, and the interferometer's input states.

Mode-transformation convention (Heisenberg picture)::

    (c, d)^T = U (a, b)^T,   U = [[cos chi, e^{-i theta} sin chi],
                                  [-e^{i theta} sin chi, cos chi]]

The state-space operator V satisfies V^dag x_i V = sum_j U_ij x_j, i.e.
V x_j^dag V^dag = sum_i U_ij x_i^dag.  The first slot of a beamsplitter is
relabelled to ``c`` and the second to ``d``.  With this convention a single
photon entering the second port of U(pi/4, -pi/2) leaves as
(|01> + i|10>)/sqrt(2).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.linalg import expm

from . import defaults
from .fock import (FockOperator, FockVector, LayoutError, ModeLayout, apply,
                   coherent_state, embed, resolve_cutoff, tensor)

# the preparing beamsplitter BS_0
SOURCE_CHI = math.pi / 4
SOURCE_THETA = -math.pi / 2

FOUR_MODES = ("a1", "b1", "b2", "a2")


@dataclass(frozen=True)
class BeamsplitterParams:
    chi: float
    theta: float

    def mode_matrix(self) -> np.ndarray:
        c, s = math.cos(self.chi), math.sin(self.chi)
        return np.array([[c, np.exp(-1j * self.theta) * s],
                         [-np.exp(1j * self.theta) * s, c]])

    @property
    def transmissivity(self) -> float:
        return math.cos(self.chi) ** 2


@dataclass(frozen=True)
class Setting:
    """Local measurement setting: beamsplitter angle, oscillator amplitude, phase."""

    chi: float
    alpha: float
    theta: float

    def __post_init__(self):
        if self.alpha < 0:
            raise ValueError(f"oscillator amplitude must be non-negative, got {self.alpha}")

    @property
    def beamsplitter(self) -> BeamsplitterParams:
        return BeamsplitterParams(self.chi, self.theta)

    def as_tuple(self):
        return (self.chi, self.alpha, self.theta)


@dataclass(frozen=True)
class InitialStateParams:
    """q|00> + r/sqrt2 (|01> + i|10>) on (b1, b2), oscillators alpha1, alpha2."""

    q: complex = 0.0
    r: complex = 1.0
    alpha1: float = 0.0
    alpha2: float = 0.0

    def __post_init__(self):
        norm = abs(self.q) ** 2 + abs(self.r) ** 2
        if abs(norm - 1.0) > 1e-12:
            raise ValueError(f"|q|^2 + |r|^2 = {norm!r}, expected 1")


# ---------------------------------------------------------------------------
# beamsplitter lift

def _block_symmetric_power(u: np.ndarray, n: int) -> np.ndarray:
    """Exact action of V on the n-photon block, basis |k, n-k>, k = 0..n."""
    block = np.zeros((n + 1, n + 1), dtype=complex)
    logfact = [math.lgamma(k + 1) for k in range(n + 1)]
    for p in range(n + 1):
        q = n - p
        # (u00 t + u10)^p (u01 t + u11)^q, coefficient of t^k -> photons in slot 0
        first = np.array([math.comb(p, i) * u[0, 0] ** i * u[1, 0] ** (p - i)
                          for i in range(p + 1)])
        second = np.array([math.comb(q, j) * u[0, 1] ** j * u[1, 1] ** (q - j)
                           for j in range(q + 1)])
        poly = np.convolve(first, second)
        for k in range(n + 1):
            scale = math.exp(0.5 * (logfact[k] + logfact[n - k] - logfact[p] - logfact[q]))
            block[k, p] = poly[k] * scale
    return block


def _block_truncated_exp(params: BeamsplitterParams, n: int, cutoff: int) -> tuple[np.ndarray, np.ndarray]:
    """exp of the generator projected onto the allowed part of the n-photon block."""
    ks = np.array([k for k in range(n + 1) if k <= cutoff and n - k <= cutoff])
    gen = np.zeros((len(ks), len(ks)), dtype=complex)
    phase = np.exp(-1j * params.theta)
    for col, k in enumerate(ks):
        # x0^dag x1 |k, n-k> = sqrt((k+1)(n-k)) |k+1, n-k-1>
        for row, k2 in enumerate(ks):
            if k2 == k + 1:
                gen[row, col] += phase * math.sqrt((k + 1) * (n - k))
            elif k2 == k - 1:
                gen[row, col] -= np.conj(phase) * math.sqrt(k * (n - k + 1))
    return ks, expm(params.chi * gen)


@lru_cache(maxsize=256)
def _two_mode_unitary(chi: float, theta: float, cutoff: int, method: str) -> np.ndarray:
    params = BeamsplitterParams(chi, theta)
    u = params.mode_matrix()
    dim = cutoff + 1
    out = np.zeros((dim * dim, dim * dim), dtype=complex)
    for n in range(2 * cutoff + 1):
        if n <= cutoff and method == "symmetric":
            ks = np.arange(n + 1)
            block = _block_symmetric_power(u, n)
        else:
            ks, block = _block_truncated_exp(params, n, cutoff)
        idx = ks * dim + (n - ks)
        out[np.ix_(idx, idx)] = block
    out.setflags(write=False)
    return out


def beamsplitter_unitary(layout: ModeLayout, mode_a: str, mode_b: str,
                         params: BeamsplitterParams, method: str = "symmetric") -> FockOperator:
    """Fock-space lift of ``params`` acting on ``(mode_a, mode_b)``.

    Photon-number blocks that fit entirely below the cutoff are built as the
    symmetric tensor power of the mode matrix (exact).  Higher blocks are cut
    by the truncation; there the generator is projected onto the allowed
    states and exponentiated, which keeps the operator unitary and
    number-conserving.  ``method="exp"`` uses the projected exponential for
    every block (an independent construction used in tests).

    The returned operator lives on the two-mode sublayout; use
    :func:`fockbell.fock.apply` to act on larger states.
    """
    ca, cb = layout.cutoff(mode_a), layout.cutoff(mode_b)
    if ca != cb:
        raise LayoutError(f"beamsplitter modes need equal cutoffs, got {ca} and {cb}")
    if method not in ("symmetric", "exp"):
        raise ValueError(f"unknown method {method!r}")
    mat = _two_mode_unitary(float(params.chi), float(params.theta), ca, method)
    return FockOperator(layout.sublayout([mode_a, mode_b]), mat,
                        is_unitary=True,
                        meta={"exact_blocks": ca, "chi": params.chi, "theta": params.theta})


def full_beamsplitter_unitary(layout: ModeLayout, mode_a: str, mode_b: str,
                              params: BeamsplitterParams) -> FockOperator:
    """Like :func:`beamsplitter_unitary` but as a matrix on the whole layout."""
    local = beamsplitter_unitary(layout, mode_a, mode_b, params)
    pa, pb = layout.position(mode_a), layout.position(mode_b)
    if pb != pa + 1:
        raise LayoutError("full embedding needs the two modes to be adjacent, a before b")
    left = int(np.prod(layout.shape[:pa], dtype=np.int64))
    right = int(np.prod(layout.shape[pb + 1:], dtype=np.int64))
    mat = np.kron(np.kron(np.eye(left), local.matrix), np.eye(right))
    return FockOperator(layout, mat, is_unitary=True)


def propagate(state: FockVector, mode_a: str, mode_b: str, params: BeamsplitterParams,
              out_names: tuple[str, str] | None = None) -> FockVector:
    """Send ``state`` through a beamsplitter on (mode_a, mode_b) without truncation loss.

    Both modes are padded to ``cutoff_a + cutoff_b`` first, so every photon
    number block present in the input is complete and the map is an exact
    isometry.  Output modes are renamed to ``out_names`` when given.
    """
    lay = state.layout
    top = lay.cutoff(mode_a) + lay.cutoff(mode_b)
    padded = state.padded({mode_a: top, mode_b: top})
    u = beamsplitter_unitary(padded.layout, mode_a, mode_b, params)
    out = apply(u, padded)
    if out_names is not None:
        out = out.renamed({mode_a: out_names[0], mode_b: out_names[1]})
    return out


# ---------------------------------------------------------------------------
# input states

def source_state(q: complex = 0.0, r: complex = 1.0) -> FockVector:
    """State of (b1, b2) after q|0> + r|1> in mode s passes BS_0."""
    lay = ModeLayout((("v", 1), ("s", 1)))
    amps = np.zeros(lay.dim, dtype=complex)
    amps[lay.index((0, 0))] = q
    amps[lay.index((0, 1))] = r
    u = beamsplitter_unitary(lay, "v", "s", BeamsplitterParams(SOURCE_CHI, SOURCE_THETA))
    return apply(u, FockVector(lay, amps)).renamed({"v": "b1", "s": "b2"})


def prepare_state(params: InitialStateParams, cutoff1: int | None = None,
                  cutoff2: int | None = None) -> FockVector:
    """|alpha1>_{a1} (x) [q|00> + r/sqrt2(|01> + i|10>)]_{b1 b2} (x) |alpha2>_{a2}.

    Mode order is (a1, b1, b2, a2); the b modes have cutoff 1.  Oscillator
    cutoffs follow the tail rule unless given.
    """
    a1 = coherent_state(params.alpha1, resolve_cutoff(params.alpha1, cutoff1), "a1")
    a2 = coherent_state(params.alpha2, resolve_cutoff(params.alpha2, cutoff2), "a2")
    return tensor([a1, source_state(params.q, params.r), a2])


def psi_state(alpha: float, cutoff: int | None = None) -> FockVector:
    """The TWC input |Psi(alpha)> with equal oscillators."""
    return prepare_state(InitialStateParams(0.0, 1.0, alpha, alpha), cutoff, cutoff)


def apply_measurement_stage(state: FockVector, side: int, setting) -> FockVector:
    """Propagate station ``side`` through U_BS(chi, theta); (a_j, b_j) -> (c_j, d_j).

    ``setting`` may be a :class:`Setting` or :class:`BeamsplitterParams`;
    only chi and theta are used (the oscillator amplitude is part of the
    state).
    """
    if side not in (1, 2):
        raise ValueError("side must be 1 or 2")
    a, b = f"a{side}", f"b{side}"
    for m in (a, b):
        if m not in state.layout:
            raise LayoutError(f"state has no mode {m!r}: {state.layout.names}")
    params = setting.beamsplitter if isinstance(setting, Setting) else setting
    return propagate(state, a, b, params, (f"c{side}", f"d{side}"))


def measured_state(state: FockVector, setting1, setting2) -> FockVector:
    """Both measurement stages applied."""
    return apply_measurement_stage(apply_measurement_stage(state, 1, setting1), 2, setting2)
