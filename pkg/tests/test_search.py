import math

import numpy as np
import pytest

from fockbell.inequalities import HARDY_OPTIMUM, ch_rates_value
from fockbell.search import (PARAMS, OptimizerConfig, SearchSpace, equal_amplitude_space,
                             full_space, hardy_space, landscape_cell_space, optimize_ch,
                             point_space, sweep_alpha_landscape, wrap_angle)

FAST = OptimizerConfig(starts=8)


def test_hardy_space_minimum():
    res = optimize_ch(hardy_space(), OptimizerConfig(starts=16))
    assert res.value <= -1.02
    assert res.eval_max <= 1e-9
    v1, v1p, v2, v2p = res.best.settings
    assert v1.alpha == v2.alpha == 0 and v1.chi == v2.chi == 0


def test_equal_amplitude_space_never_violates():
    res = optimize_ch(equal_amplitude_space(), FAST)
    assert res.value >= -1 - 1e-9
    a = [res.params[i] for i in (1, 4, 7, 10)]
    assert max(a) - min(a) == 0


def test_point_space_returns_its_evaluation():
    res = optimize_ch(point_space(HARDY_OPTIMUM), OptimizerConfig(starts=1))
    assert res.value == pytest.approx(ch_rates_value(HARDY_OPTIMUM).ch_value, abs=1e-15)
    assert all(r.value == res.value for r in res.trace)


def test_empty_space_rejected():
    with pytest.raises(ValueError, match="empty search space"):
        SearchSpace(bounds={"chi1": (1.0, 0.5)})
    with pytest.raises(ValueError):
        SearchSpace(fixed={"alpha1": -0.1})
    with pytest.raises(ValueError):
        SearchSpace(fixed={"nope": 1.0})


def test_config_validation():
    with pytest.raises(ValueError):
        OptimizerConfig(starts=0)
    with pytest.raises(ValueError):
        OptimizerConfig(method="fock-numeric")
    with pytest.raises(ValueError):
        OptimizerConfig(q=0.2)
    with pytest.raises(ValueError):
        OptimizerConfig(sense="up")


def test_determinism():
    a = optimize_ch(hardy_space(), FAST)
    b = optimize_ch(hardy_space(), FAST)
    assert a.trace == b.trace and a.params == b.params
    c = optimize_ch(hardy_space(), OptimizerConfig(starts=8, seed=1))
    assert c.trace != a.trace


def test_expand_project_roundtrip():
    space = equal_amplitude_space()
    x = np.arange(len(space.free), dtype=float) / 10
    full = space.expand(x)
    assert np.allclose(space.project(full), x)
    assert full[PARAMS.index("alpha2p")] == full[PARAMS.index("alpha1")]


def test_warm_start_is_used():
    best = optimize_ch(hardy_space(), FAST)
    warm = optimize_ch(hardy_space(), OptimizerConfig(starts=1, warm_starts=(best.params,)))
    assert warm.trace[0].origin == "warm"
    assert warm.value <= best.value + 1e-9


def test_maximisation_respects_upper_bound():
    res = optimize_ch(full_space(), OptimizerConfig(starts=4, sense="max", maxiter=3000))
    assert res.eval_max <= 1e-9
    assert res.value == pytest.approx(res.eval_max, abs=1e-12)


def test_povm_objective_matches_closed_form_at_q0():
    a = optimize_ch(point_space(HARDY_OPTIMUM), OptimizerConfig(starts=1, method="povm"))
    assert a.value == pytest.approx(ch_rates_value(HARDY_OPTIMUM).ch_value, abs=1e-12)


def test_exploratory_q_search_runs():
    res = optimize_ch(hardy_space(), OptimizerConfig(starts=2, method="povm", q=0.3, maxiter=500))
    assert math.isfinite(res.value) and res.best.metadata["q"] == 0.3


def test_wrap_angle():
    assert wrap_angle(3 * math.pi) == pytest.approx(math.pi)
    assert wrap_angle(-math.pi) == math.pi
    assert wrap_angle(0.5 + 4 * math.pi) == pytest.approx(0.5)


def test_landscape_cell_pins_amplitudes():
    space = landscape_cell_space(0.2, 0.7)
    assert set(space.free) == {p for p in PARAMS if not p.startswith("alpha")}


def test_sweep_small_grid_and_workers():
    grid = [0.0, 0.35, 0.7]
    cfg = OptimizerConfig(starts=4)
    serial = sweep_alpha_landscape(grid, grid, cfg, workers=1)
    parallel = sweep_alpha_landscape(grid, grid, cfg, workers=2)
    assert np.array_equal(serial.values, parallel.values)
    assert np.all(serial.diagonal() >= -1 - 1e-9)
    assert serial.values[0, 2] < -1.02
    assert serial.eval_max <= 1e-9


def test_sweep_diagonal_mode():
    grid = [0.1, 0.5]
    res = sweep_alpha_landscape(grid, grid, OptimizerConfig(starts=4), cells="diagonal")
    assert np.isnan(res.values[0, 1])
    assert np.all(res.diagonal() >= -1 - 1e-9)
    with pytest.raises(ValueError):
        sweep_alpha_landscape([0.1], [0.2], cells="diagonal")
    with pytest.raises(ValueError):
        sweep_alpha_landscape([-0.1], [0.2])
