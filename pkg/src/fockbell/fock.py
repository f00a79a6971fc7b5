"""Truncated multimode Fock-space algebra.

Basis convention: occupations are indexed row-major over the declared mode
list, i.e. the last mode varies fastest.  ``layout.index((n0, n1, ...))`` and
``layout.occupations(i)`` are inverse to each other.

Operators may be defined on a subset of the modes of a state; :func:`apply`
and :func:`expectation` then act as the identity on the remaining modes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Mapping, Sequence

import numpy as np
from scipy import stats
from scipy.special import gammaln

from . import defaults


class LayoutError(ValueError):
    """Raised for unknown, duplicate or incompatible modes."""


class CutoffError(ValueError):
    """Raised when a truncation is too small for a coherent amplitude."""

    def __init__(self, alpha, cutoff, minimal):
        self.alpha = alpha
        self.cutoff = cutoff
        self.minimal = minimal
        super().__init__(
            f"cutoff too small for alpha={alpha:g}: got {cutoff}, "
            f"minimal admissible cutoff is {minimal}")


# ---------------------------------------------------------------------------
# tail rule

def poisson_tail(alpha: float, cutoff: int) -> float:
    """Probability mass of a coherent state above ``cutoff`` photons."""
    mu = float(alpha) ** 2
    if mu == 0.0:
        return 0.0
    return float(stats.poisson.sf(cutoff, mu))


def tail_cutoff(alpha: float, tol: float = defaults.TAIL_TOLERANCE) -> int:
    """Smallest N whose Poisson tail beyond N is below ``tol``."""
    n = 0
    while poisson_tail(alpha, n) >= tol:
        n += 1
    return n


def auto_cutoff(alpha: float, tol: float = defaults.TAIL_TOLERANCE) -> int:
    """Cutoff used when none is given: the tail rule, floored at 12."""
    return max(defaults.MIN_AUTO_CUTOFF, tail_cutoff(alpha, tol))


def resolve_cutoff(alpha: float, cutoff: int | None = None,
                   tol: float = defaults.TAIL_TOLERANCE) -> int:
    """Return ``cutoff`` after checking it, or the automatic choice.

    ``None`` and ``0`` both mean automatic.
    """
    if not cutoff:
        return auto_cutoff(alpha, tol)
    cutoff = int(cutoff)
    if poisson_tail(alpha, cutoff) >= tol:
        raise CutoffError(alpha, cutoff, tail_cutoff(alpha, tol))
    return cutoff


# ---------------------------------------------------------------------------
# layouts

@dataclass(frozen=True)
class ModeLayout:
    """Ordered named modes with per-mode photon-number cutoffs."""

    modes: tuple[tuple[str, int], ...]

    def __post_init__(self):
        modes = tuple((str(name), int(cut)) for name, cut in self.modes)
        names = [m[0] for m in modes]
        if len(set(names)) != len(names):
            raise LayoutError(f"duplicate mode names in {names}")
        for name, cut in modes:
            if cut < 0:
                raise LayoutError(f"negative cutoff for mode {name!r}")
        object.__setattr__(self, "modes", modes)

    @classmethod
    def of(cls, **cutoffs: int) -> "ModeLayout":
        """``ModeLayout.of(a=3, b=1)``; keyword order is mode order."""
        return cls(tuple(cutoffs.items()))

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(m[0] for m in self.modes)

    @property
    def cutoffs(self) -> tuple[int, ...]:
        return tuple(m[1] for m in self.modes)

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(c + 1 for c in self.cutoffs)

    @property
    def dim(self) -> int:
        return int(np.prod(self.shape, dtype=np.int64)) if self.modes else 1

    def __len__(self):
        return len(self.modes)

    def __contains__(self, name):
        return name in self.names

    def position(self, name: str) -> int:
        try:
            return self.names.index(name)
        except ValueError:
            raise LayoutError(f"unknown mode {name!r}; layout has {self.names}") from None

    def cutoff(self, name: str) -> int:
        return self.modes[self.position(name)][1]

    def index(self, occupations: Sequence[int]) -> int:
        return int(np.ravel_multi_index(tuple(occupations), self.shape))

    def occupations(self, index: int) -> tuple[int, ...]:
        return tuple(int(n) for n in np.unravel_index(index, self.shape))

    @cached_property
    def occupation_table(self) -> np.ndarray:
        """Integer array of shape (dim, n_modes), row i = occupations(i)."""
        grids = np.indices(self.shape).reshape(len(self.modes), -1)
        return grids.T.copy()

    def sublayout(self, names: Iterable[str]) -> "ModeLayout":
        return ModeLayout(tuple((n, self.cutoff(n)) for n in names))

    def with_cutoffs(self, cutoffs: Mapping[str, int]) -> "ModeLayout":
        for name in cutoffs:
            self.position(name)
        return ModeLayout(tuple((n, cutoffs.get(n, c)) for n, c in self.modes))

    def renamed(self, mapping: Mapping[str, str]) -> "ModeLayout":
        for name in mapping:
            self.position(name)
        return ModeLayout(tuple((mapping.get(n, n), c) for n, c in self.modes))

    def __add__(self, other: "ModeLayout") -> "ModeLayout":
        return ModeLayout(self.modes + other.modes)


# ---------------------------------------------------------------------------
# states and operators

def _frozen_array(values, dtype=complex) -> np.ndarray:
    arr = np.array(values, dtype=dtype, copy=True)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class FockVector:
    """Complex amplitudes over the basis of ``layout``."""

    layout: ModeLayout
    amplitudes: np.ndarray

    def __post_init__(self):
        amps = _frozen_array(np.ravel(self.amplitudes))
        if amps.shape != (self.layout.dim,):
            raise LayoutError(
                f"amplitude length {amps.shape[0]} does not match layout dimension {self.layout.dim}")
        object.__setattr__(self, "amplitudes", amps)

    @classmethod
    def basis(cls, layout: ModeLayout, occupations: Sequence[int]) -> "FockVector":
        amps = np.zeros(layout.dim, dtype=complex)
        amps[layout.index(occupations)] = 1.0
        return cls(layout, amps)

    @classmethod
    def vacuum(cls, layout: ModeLayout) -> "FockVector":
        return cls.basis(layout, (0,) * len(layout))

    @classmethod
    def from_tensor(cls, layout: ModeLayout, tensor: np.ndarray) -> "FockVector":
        return cls(layout, np.reshape(tensor, -1))

    @property
    def tensor(self) -> np.ndarray:
        return self.amplitudes.reshape(self.layout.shape)

    @property
    def norm2(self) -> float:
        return float(np.vdot(self.amplitudes, self.amplitudes).real)

    def probabilities(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2

    def inner(self, other: "FockVector") -> complex:
        _require_same_layout(self.layout, other.layout)
        return complex(np.vdot(self.amplitudes, other.amplitudes))

    def fidelity(self, other: "FockVector") -> float:
        return abs(self.inner(other)) ** 2

    def normalized(self) -> "FockVector":
        return FockVector(self.layout, self.amplitudes / math.sqrt(self.norm2))

    def renamed(self, mapping: Mapping[str, str]) -> "FockVector":
        return FockVector(self.layout.renamed(mapping), self.amplitudes)

    def padded(self, cutoffs: Mapping[str, int]) -> "FockVector":
        """Embed into a layout with larger cutoffs (new levels get amplitude 0)."""
        new = self.layout.with_cutoffs(cutoffs)
        widths = []
        for old_c, new_c in zip(self.layout.cutoffs, new.cutoffs):
            if new_c < old_c:
                raise LayoutError("padding cannot reduce a cutoff")
            widths.append((0, new_c - old_c))
        return FockVector.from_tensor(new, np.pad(self.tensor, widths))

    def reduced_density(self, names: Sequence[str]) -> np.ndarray:
        """Density matrix of the listed modes (traced over the rest)."""
        keep = [self.layout.position(n) for n in names]
        rest = [i for i in range(len(self.layout)) if i not in keep]
        t = np.transpose(self.tensor, keep + rest)
        sub = self.layout.sublayout(names)
        t = t.reshape(sub.dim, -1)
        return t @ t.conj().T


@dataclass(frozen=True)
class FockOperator:
    """Dense operator on the basis of ``layout``.

    ``is_hermitian`` and ``is_unitary`` are advisory flags; :meth:`validate`
    checks them.
    """

    layout: ModeLayout
    matrix: np.ndarray
    is_hermitian: bool = False
    is_unitary: bool = False
    meta: Mapping = field(default_factory=dict, compare=False)

    def __post_init__(self):
        mat = _frozen_array(self.matrix)
        d = self.layout.dim
        if mat.shape != (d, d):
            raise LayoutError(f"matrix shape {mat.shape} does not match layout dimension {d}")
        object.__setattr__(self, "matrix", mat)

    @cached_property
    def is_diagonal(self) -> bool:
        m = self.matrix
        return not np.any(m - np.diag(np.diagonal(m)))

    def dagger(self) -> "FockOperator":
        return FockOperator(self.layout, self.matrix.conj().T,
                            self.is_hermitian, self.is_unitary, self.meta)

    def __matmul__(self, other):
        if isinstance(other, FockOperator):
            _require_same_layout(self.layout, other.layout)
            return FockOperator(self.layout, self.matrix @ other.matrix)
        if isinstance(other, FockVector):
            return apply(self, other)
        return NotImplemented

    def __add__(self, other: "FockOperator") -> "FockOperator":
        _require_same_layout(self.layout, other.layout)
        return FockOperator(self.layout, self.matrix + other.matrix,
                            self.is_hermitian and other.is_hermitian)

    def __sub__(self, other: "FockOperator") -> "FockOperator":
        _require_same_layout(self.layout, other.layout)
        return FockOperator(self.layout, self.matrix - other.matrix,
                            self.is_hermitian and other.is_hermitian)

    def scaled(self, factor) -> "FockOperator":
        herm = self.is_hermitian and np.isreal(factor)
        return FockOperator(self.layout, factor * self.matrix, herm)

    def hermiticity_error(self) -> float:
        return float(np.max(np.abs(self.matrix - self.matrix.conj().T), initial=0.0))

    def unitarity_error(self) -> float:
        m = self.matrix
        return float(np.max(np.abs(m.conj().T @ m - np.eye(len(m))), initial=0.0))

    def validate(self) -> "FockOperator":
        if self.is_hermitian and self.hermiticity_error() > defaults.HERMITIAN_TOL:
            raise ValueError(f"operator flagged Hermitian deviates by {self.hermiticity_error():.3g}")
        if self.is_unitary and self.unitarity_error() > defaults.UNITARY_TOL:
            raise ValueError(f"operator flagged unitary deviates by {self.unitarity_error():.3g}")
        return self


def _require_same_layout(a: ModeLayout, b: ModeLayout):
    if a != b:
        raise LayoutError(f"layout mismatch: {a.modes} vs {b.modes}")


# ---------------------------------------------------------------------------
# constructors

def identity(layout: ModeLayout) -> FockOperator:
    return FockOperator(layout, np.eye(layout.dim), True, True)


def _single_lowering(cutoff: int) -> np.ndarray:
    return np.diag(np.sqrt(np.arange(1, cutoff + 1, dtype=float)), k=1).astype(complex)


def embed(layout: ModeLayout, mode: str, single: np.ndarray) -> np.ndarray:
    """Kronecker-embed a single-mode matrix into ``layout``."""
    pos = layout.position(mode)
    out = np.ones((1, 1), dtype=complex)
    for i, dim in enumerate(layout.shape):
        out = np.kron(out, single if i == pos else np.eye(dim))
    return out


def ladder(layout: ModeLayout, mode: str, kind: str = "lower") -> FockOperator:
    """Annihilation (``kind="lower"``) or creation (``"raise"``) operator.

    Truncation: raising the top level of the mode gives the zero vector.
    """
    low = _single_lowering(layout.cutoff(mode))
    if kind == "lower":
        mat = low
    elif kind == "raise":
        mat = low.conj().T
    else:
        raise ValueError(f"kind must be 'lower' or 'raise', not {kind!r}")
    return FockOperator(layout, embed(layout, mode, mat),
                        meta={"truncation": "raise maps the top level to zero"})


def number_operator(layout: ModeLayout, mode: str) -> FockOperator:
    occ = layout.occupation_table[:, layout.position(mode)]
    return FockOperator(layout, np.diag(occ.astype(complex)), is_hermitian=True)


def coherent_state(alpha: float, cutoff: int | None = None, mode: str = "a") -> FockVector:
    """Truncated (not renormalised) coherent state of real amplitude ``alpha``."""
    alpha = float(alpha)
    cutoff = resolve_cutoff(alpha, cutoff)
    n = np.arange(cutoff + 1)
    if alpha == 0.0:
        amps = (n == 0).astype(complex)
    else:
        logs = -alpha ** 2 / 2 + n * math.log(abs(alpha)) - 0.5 * gammaln(n + 1)
        amps = np.exp(logs) * np.sign(alpha) ** n
    return FockVector(ModeLayout(((mode, cutoff),)), amps)


def tensor(items):
    """Tensor product of states or of operators, in the listed order."""
    items = list(items)
    if not items:
        raise ValueError("tensor of an empty list")
    layout = items[0].layout
    for it in items[1:]:
        layout = layout + it.layout
    if all(isinstance(it, FockVector) for it in items):
        amps = items[0].amplitudes
        for it in items[1:]:
            amps = np.kron(amps, it.amplitudes)
        return FockVector(layout, amps)
    if all(isinstance(it, FockOperator) for it in items):
        mat = items[0].matrix
        for it in items[1:]:
            mat = np.kron(mat, it.matrix)
        return FockOperator(layout, mat,
                            all(it.is_hermitian for it in items),
                            all(it.is_unitary for it in items))
    raise TypeError("tensor expects only FockVector or only FockOperator items")


# ---------------------------------------------------------------------------
# action and expectation values

def apply(op: FockOperator, state: FockVector) -> FockVector:
    """Apply ``op`` to the modes it is defined on, identity elsewhere."""
    if op.layout == state.layout:
        return FockVector(state.layout, op.matrix @ state.amplitudes)
    pos = [state.layout.position(n) for n in op.layout.names]
    for name, cut in op.layout.modes:
        if state.layout.cutoff(name) != cut:
            raise LayoutError(
                f"mode {name!r} has cutoff {cut} in the operator but "
                f"{state.layout.cutoff(name)} in the state")
    k = len(pos)
    t = state.tensor
    if op.is_diagonal:
        diag = np.diagonal(op.matrix).reshape(op.layout.shape)
        shape = [1] * len(state.layout)
        for p, d in zip(pos, op.layout.shape):
            shape[p] = d
        order = np.argsort(pos)
        diag = np.transpose(diag, order).reshape(shape)
        return FockVector.from_tensor(state.layout, t * diag)
    opt = op.matrix.reshape(op.layout.shape * 2)
    out = np.tensordot(opt, t, axes=(list(range(k, 2 * k)), pos))
    out = np.moveaxis(out, list(range(k)), pos)
    return FockVector.from_tensor(state.layout, out)


def expectation(state: FockVector, op: FockOperator, *more: FockOperator) -> complex:
    """<state| op @ more[0] @ more[1] ... |state>.

    The imaginary part is returned untouched so that Hermiticity drift shows.
    """
    phi = state
    for o in reversed((op,) + more):
        phi = apply(o, phi)
    return complex(np.vdot(state.amplitudes, phi.amplitudes))
