"""Multi-start simplex search over CH setting spaces, and the alpha-alpha' sweep.

A search space is a box over the twelve flat parameters
``(chi, alpha, theta)`` of ``(v1, v1p, v2, v2p)``.  Each parameter is free,
pinned to a value, or tied to another parameter.  Angles theta are
periodic and left unbounded during the simplex run; they are only sampled
from a box when drawing starting points.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize
from scipy.stats import qmc

from . import defaults
from .inequalities import CHEvaluation, ch_rates_value, ch_value_closed
from .optics import Setting

PARAMS = ("chi1", "alpha1", "theta1", "chi1p", "alpha1p", "theta1p",
          "chi2", "alpha2", "theta2", "chi2p", "alpha2p", "theta2p")
METHODS = ("closed-form", "povm")


def _kind(name: str) -> str:
    return name.rstrip("12p")


def _default_box(name: str):
    return {"chi": defaults.CHI_BOX, "alpha": defaults.ALPHA_BOX,
            "theta": defaults.THETA_BOX}[_kind(name)]


def wrap_angle(t: float) -> float:
    """Map an angle into (-pi, pi]."""
    w = math.remainder(t, 2 * math.pi)
    return math.pi if w == -math.pi else w


@dataclass(frozen=True)
class SearchSpace:
    """Box over the twelve CH parameters with pins and ties.

    ``bounds`` overrides the default box of a parameter, ``fixed`` pins a
    parameter to a value and ``ties`` maps a parameter to the name of the
    parameter it copies.
    """

    bounds: dict = field(default_factory=dict)
    fixed: dict = field(default_factory=dict)
    ties: dict = field(default_factory=dict)
    name: str = "custom"

    def __post_init__(self):
        for key in (*self.bounds, *self.fixed, *self.ties, *self.ties.values()):
            if key not in PARAMS:
                raise ValueError(f"unknown parameter {key!r}")
        for key, target in self.ties.items():
            if target in self.ties:
                raise ValueError(f"tie chain {key} -> {target} is not allowed")
            if key in self.fixed:
                raise ValueError(f"{key} is both pinned and tied")
        for key in PARAMS:
            lo, hi = self.box(key)
            if not lo <= hi:
                raise ValueError(f"empty search space: {key} in [{lo}, {hi}]")
        for key, val in self.fixed.items():
            if _kind(key) == "alpha" and val < 0:
                raise ValueError(f"{key} must be non-negative, got {val}")
            if _kind(key) != "theta":
                lo, hi = self.box(key)
                if not lo <= val <= hi:
                    raise ValueError(f"empty search space: pinned {key}={val} outside [{lo}, {hi}]")

    def box(self, key):
        return tuple(self.bounds.get(key, _default_box(key)))

    @property
    def free(self) -> tuple[str, ...]:
        return tuple(p for p in PARAMS if p not in self.fixed and p not in self.ties)

    def sample_box(self) -> np.ndarray:
        return np.array([self.box(p) for p in self.free], dtype=float).reshape(-1, 2)

    def simplex_bounds(self):
        """Bounds handed to the simplex: angles unbounded, the rest boxed."""
        out = []
        for p in self.free:
            out.append((None, None) if _kind(p) == "theta" else self.box(p))
        return out

    def expand(self, x) -> np.ndarray:
        """Free vector -> full 12-vector."""
        full = dict(zip(self.free, np.asarray(x, dtype=float)))
        full.update(self.fixed)
        for key, target in self.ties.items():
            full[key] = full[target]
        return np.array([full[p] for p in PARAMS])

    def project(self, full) -> np.ndarray:
        """Full 12-vector -> free vector (used for warm starts)."""
        full = dict(zip(PARAMS, np.asarray(full, dtype=float)))
        return np.array([full[p] for p in self.free])

    def clip(self, x) -> np.ndarray:
        x = np.array(x, dtype=float)
        for i, p in enumerate(self.free):
            if _kind(p) != "theta":
                x[i] = min(max(x[i], self.box(p)[0]), self.box(p)[1])
        return x

    @staticmethod
    def settings(full) -> tuple[Setting, Setting, Setting, Setting]:
        p = [float(v) for v in full]
        out = []
        for k in range(4):
            chi, alpha, theta = p[3 * k:3 * k + 3]
            out.append(Setting(chi, max(alpha, 0.0), wrap_angle(theta)))
        return tuple(out)


def hardy_space(alpha_box=defaults.ALPHA_BOX) -> SearchSpace:
    """First setting of each party has the oscillator off: v1 = v2 = (0, 0, 0)."""
    pins = {f"{k}{s}": 0.0 for k in ("chi", "alpha", "theta") for s in ("1", "2")}
    return SearchSpace({"alpha1p": alpha_box, "alpha2p": alpha_box}, pins, {}, "hardy")


def full_space(alpha_box=defaults.ALPHA_BOX) -> SearchSpace:
    return SearchSpace({p: alpha_box for p in PARAMS if _kind(p) == "alpha"}, {}, {}, "full")


def equal_amplitude_space(alpha_box=defaults.ALPHA_BOX) -> SearchSpace:
    """All four oscillator amplitudes equal; only phases and beamsplitters tuned."""
    ties = {p: "alpha1" for p in ("alpha1p", "alpha2", "alpha2p")}
    return SearchSpace({"alpha1": alpha_box}, {}, ties, "equal-amplitude")


def landscape_cell_space(alpha: float, alpha_prime: float) -> SearchSpace:
    """Amplitudes pinned per setting and shared by both parties; chi, theta free."""
    pins = {"alpha1": alpha, "alpha2": alpha, "alpha1p": alpha_prime, "alpha2p": alpha_prime}
    box = (0.0, max(alpha, alpha_prime, defaults.ALPHA_BOX[1]))
    bounds = {p: box for p in pins}
    return SearchSpace(bounds, pins, {}, f"cell({alpha:.6g},{alpha_prime:.6g})")


def point_space(settings) -> SearchSpace:
    """Degenerate space holding a single setting tuple."""
    flat = [x for v in settings for x in v.as_tuple()]
    bounds = {p: (min(_default_box(p)[0], val), max(_default_box(p)[1], val))
              for p, val in zip(PARAMS, flat)}
    return SearchSpace(bounds, dict(zip(PARAMS, flat)), {}, "point")


@dataclass(frozen=True)
class OptimizerConfig:
    starts: int = defaults.OPT_STARTS
    seed: int = defaults.OPT_SEED
    xatol: float = defaults.OPT_XATOL
    fatol: float = defaults.OPT_FATOL
    maxiter: int = defaults.OPT_MAXITER
    sense: str = "min"
    method: str = "closed-form"
    q: complex = 0.0
    warm_starts: tuple = ()

    def __post_init__(self):
        if self.starts < 0 or (self.starts == 0 and not self.warm_starts):
            raise ValueError("need at least one start")
        if self.sense not in ("min", "max"):
            raise ValueError(f"sense must be 'min' or 'max', got {self.sense!r}")
        if self.method not in METHODS:
            raise ValueError(f"method must be one of {METHODS}, got {self.method!r}")
        if self.q != 0 and self.method != "povm":
            raise ValueError("a vacuum admixture q needs method='povm'")
        if self.xatol <= 0 or self.fatol <= 0 or self.maxiter < 1:
            raise ValueError("tolerances must be positive and maxiter >= 1")


@dataclass(frozen=True)
class StartRecord:
    index: int
    origin: str            # "sobol" or "warm"
    x0: tuple
    params: tuple          # full 12-vector at the end of the run
    value: float
    nfev: int
    converged: bool


@dataclass(frozen=True)
class OptimizationResult:
    best: CHEvaluation
    params: tuple
    space: str
    config: OptimizerConfig
    trace: tuple
    eval_min: float
    eval_max: float
    n_evals: int

    @property
    def value(self) -> float:
        return self.best.ch_value


def _objective(config: OptimizerConfig):
    if config.method == "closed-form":
        return ch_value_closed
    from .povm import povm_ch_terms

    def povm_value(full):
        ks, ss = povm_ch_terms(SearchSpace.settings(full), config.q)
        return ks[0] + ks[1] + ks[2] - ks[3] - ss[0] - ss[1]
    return povm_value


def _start_points(space: SearchSpace, config: OptimizerConfig) -> list[tuple[str, np.ndarray]]:
    starts = [("warm", space.clip(space.project(w))) for w in config.warm_starts]
    n_free = len(space.free)
    if config.starts and n_free:
        box = space.sample_box()
        sampler = qmc.Sobol(d=n_free, scramble=True, seed=config.seed)
        # Sobol wants powers of two; draw the next one up and keep the prefix
        pts = sampler.random_base2(max(0, math.ceil(math.log2(config.starts))))[:config.starts]
        pts = box[:, 0] + pts * (box[:, 1] - box[:, 0])
        starts += [("sobol", p) for p in pts]
    elif not starts:
        starts = [("sobol", np.zeros(0))]
    return starts


def optimize_ch(space: SearchSpace, config: OptimizerConfig | None = None) -> OptimizationResult:
    """Multi-start Nelder-Mead on the CH combination over ``space``.

    Returns the best evaluation (minimum for ``sense="min"``), one record per
    start, and the extreme objective values seen over every evaluation.
    Deterministic for a fixed config.
    """
    config = config or OptimizerConfig()
    raw = _objective(config)
    sign = 1.0 if config.sense == "min" else -1.0
    seen = {"min": math.inf, "max": -math.inf, "n": 0}

    def f(x):
        v = float(raw(space.expand(x)))
        seen["n"] += 1
        seen["min"] = min(seen["min"], v)
        seen["max"] = max(seen["max"], v)
        return sign * v

    records = []
    for i, (origin, x0) in enumerate(_start_points(space, config)):
        if len(x0) == 0:
            val = f(x0)
            records.append(StartRecord(i, origin, (), tuple(space.expand(x0)), sign * val, 1, True))
            continue
        res = minimize(f, x0, method="Nelder-Mead", bounds=space.simplex_bounds(),
                       options={"xatol": config.xatol, "fatol": config.fatol,
                                "maxiter": config.maxiter, "maxfev": 4 * config.maxiter,
                                "adaptive": len(x0) > 4})
        full = space.expand(res.x)
        records.append(StartRecord(i, origin, tuple(float(v) for v in x0),
                                   tuple(float(v) for v in full), sign * float(res.fun),
                                   int(res.nfev), bool(res.success)))
    best = min(records, key=lambda r: sign * r.value)
    settings = SearchSpace.settings(best.params)
    evaluation = ch_rates_value(settings, method=config.method, q=config.q)
    return OptimizationResult(evaluation, tuple(v for s in settings for v in s.as_tuple()),
                              space.name, config, tuple(records),
                              seen["min"], seen["max"], seen["n"])


# ---------------------------------------------------------------------------
# alpha-alpha' landscape

@dataclass(frozen=True)
class SweepResult:
    alphas: np.ndarray
    alpha_primes: np.ndarray
    values: np.ndarray                 # values[i, j] at (alphas[i], alpha_primes[j]); NaN if skipped
    params: dict                       # (i, j) -> best full 12-vector
    eval_max: float
    cells: str
    metadata: dict = field(default_factory=dict)

    def diagonal(self) -> np.ndarray:
        n = min(len(self.alphas), len(self.alpha_primes))
        return np.array([self.values[i, i] for i in range(n)])


def _cell_config(config: OptimizerConfig, warm) -> OptimizerConfig:
    return OptimizerConfig(config.starts, config.seed, config.xatol, config.fatol,
                           config.maxiter, config.sense, config.method, config.q,
                           tuple(warm))


def _run_chain(cells, config: OptimizerConfig):
    """Optimize cells in order, warm-starting each from the previous optimum."""
    out = []
    prev = None
    for (i, j, a, ap) in cells:
        res = optimize_ch(landscape_cell_space(a, ap),
                          _cell_config(config, () if prev is None else (prev,)))
        prev = res.params
        out.append((i, j, res.value, res.params, res.eval_max))
    return out


def resolve_workers(workers: int | None = None) -> int:
    if workers is None:
        workers = int(os.environ.get(defaults.WORKERS_ENV, "1") or 1)
    return max(1, int(workers))


def sweep_alpha_landscape(alpha_grid, alpha_prime_grid, config: OptimizerConfig | None = None,
                          cells: str = "full", workers: int | None = None) -> SweepResult:
    """Minimized CH value for each (alpha, alpha') with amplitudes shared by both parties.

    ``cells="full"`` fills the whole matrix, row by row, warm-starting every
    cell from its left neighbour.  ``cells="diagonal"`` only evaluates
    alpha = alpha' (both grids must match), warm-starting along the diagonal.
    Rows (or the diagonal chain) are independent and may run in ``workers``
    processes; the result does not depend on the worker count.
    """
    config = config or OptimizerConfig(starts=defaults.SWEEP_STARTS)
    alphas = np.asarray(alpha_grid, dtype=float)
    primes = np.asarray(alpha_prime_grid, dtype=float)
    if alphas.ndim != 1 or primes.ndim != 1:
        raise ValueError("alpha grids must be one-dimensional")
    if np.any(alphas < 0) or np.any(primes < 0):
        raise ValueError("alpha grids must be non-negative")
    if cells == "full":
        chains = [[(i, j, a, ap) for j, ap in enumerate(primes)] for i, a in enumerate(alphas)]
    elif cells == "diagonal":
        if len(alphas) != len(primes) or not np.allclose(alphas, primes):
            raise ValueError("diagonal sweep needs identical grids")
        chains = [[(i, i, a, a) for i, a in enumerate(alphas)]]
    else:
        raise ValueError(f"cells must be 'full' or 'diagonal', got {cells!r}")

    workers = resolve_workers(workers)
    if workers > 1 and len(chains) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_run_chain, chains, [config] * len(chains)))
    else:
        results = [_run_chain(c, config) for c in chains]

    values = np.full((len(alphas), len(primes)), np.nan)
    params = {}
    eval_max = -math.inf
    for chain in results:
        for i, j, v, p, emax in chain:
            values[i, j] = v
            params[(i, j)] = p
            eval_max = max(eval_max, emax)
    return SweepResult(alphas, primes, values, params, eval_max, cells,
                       {"starts_per_cell": config.starts, "seed": config.seed,
                        "workers": workers, "method": config.method})
