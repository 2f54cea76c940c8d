import math

import numpy as np
import pytest
from scipy import integrate, stats

from overlay_d2d import analytic, rng
from overlay_d2d.errors import ParameterError
from overlay_d2d.geometry import PppConfig, SimWindow, sample_network
from overlay_d2d.scheduling import Mode, ScheduleConfig, cochannel_interferers, schedule
from overlay_d2d.sir import (
    EmpiricalCcdf,
    compute_sir,
    db_to_linear,
    default_thresholds,
    linear_to_db,
    run_cellular_batch,
    run_d2d_batch,
    simulate_d2d,
    simulate_d2d_sweep,
    sir_value,
)


def test_db_round_trip():
    x = np.array([-20.0, 0.0, 3.0, 17.5])
    assert np.allclose(linear_to_db(db_to_linear(x)), x)
    th = default_thresholds()
    assert len(th) == 41 and th[0] == pytest.approx(0.01) and th[-1] == pytest.approx(100.0)


def test_empirical_ccdf_counts_ties_as_covered():
    c = EmpiricalCcdf.from_samples([1.0, 2.0, 2.0, math.inf], [2.0, 0.5, 5.0])
    assert list(c.thresholds) == [0.5, 2.0, 5.0]
    assert list(c.survival) == [1.0, 0.75, 0.25]
    assert c.half_width[0] == 0.0
    with pytest.raises(ParameterError):
        EmpiricalCcdf.from_samples([], [1.0])


def test_sir_value_by_hand():
    pos = np.array([[1.0, 0.0], [0.0, 2.0]])
    g = np.random.default_rng(5)
    want_g = np.random.default_rng(5).exponential(size=3)
    want = want_g[0] * 0.5**-4 / (want_g[1] * 1.0 + want_g[2] * 2.0**-4)
    assert sir_value(0.5, pos, g, 4.0) == pytest.approx(want, rel=1e-14)
    assert sir_value(0.5, np.empty((0, 2)), g, 4.0) == math.inf


def test_compute_sir_rejects_bad_inputs():
    net = sample_network(PppConfig(1.0, 5.0, 0.3))
    a = schedule(net, ScheduleConfig(2), np.random.default_rng(0))
    intf = cochannel_interferers(net, a)
    s = compute_sir(net, intf, np.random.default_rng(1))
    assert s.sir > 0 and s.intracell_count + s.intercell_count == len(intf)
    with pytest.raises(ParameterError):
        compute_sir(net, intf, np.random.default_rng(1), alpha=2.0)
    with pytest.raises(ParameterError):
        compute_sir(sample_network(PppConfig(1.0, 5.0, 0.0)), intf, np.random.default_rng(1))


def test_uncoordinated_matches_closed_form_small_batch():
    cfg = PppConfig(1.0, 10.0, 0.3, seed=3)
    th = db_to_linear([-10.0, 0.0, 10.0])
    ccdf = run_d2d_batch(cfg, ScheduleConfig(4), th, n_trials=4000)
    exact = analytic.uncoordinated_ccdf(analytic.AnalyticParams(1.0, 10.0, 4, 0.3), th)
    assert np.all(np.abs(ccdf.survival - exact) <= 4 * np.sqrt(exact * (1 - exact) / 4000) + 0.01)


def test_batch_is_deterministic_and_order_free():
    cfg = PppConfig(1.0, 10.0, 0.3, seed=9)
    sc = ScheduleConfig(5, Mode.COORDINATED)
    a = simulate_d2d(cfg, sc, 50)
    b = simulate_d2d(cfg, sc, 50)
    assert np.array_equal(a.sir, b.sir) and np.array_equal(a.intracell_count, b.intracell_count)
    # trials 20..49 run on their own reproduce the tail of the batch
    tail = simulate_d2d(PppConfig(1.0, 10.0, 0.3, seed=9, trial_index=20), sc, 30)
    assert np.array_equal(tail.sir, a.sir[20:])


def test_sweep_equals_separate_runs():
    cfg = PppConfig(1.0, 10.0, 0.2, seed=1)
    sc = ScheduleConfig(10, Mode.COORDINATED)
    runs = simulate_d2d_sweep(cfg, sc, [0.2, 0.5], 40)
    for r_d, run in zip([0.2, 0.5], runs):
        alone = simulate_d2d(PppConfig(1.0, 10.0, r_d, seed=1), sc, 40)
        assert np.array_equal(run.sir, alone.sir)
        assert np.array_equal(run.intracell_count, alone.intracell_count)
    with pytest.raises(ParameterError):
        simulate_d2d_sweep(cfg, sc, [0.0], 5)


def test_per_trial_hook_sees_every_trial():
    seen = []
    simulate_d2d(PppConfig(1.0, 5.0, 0.3), ScheduleConfig(3, Mode.COORDINATED), 7, per_trial=lambda i, *_: seen.append(i))
    assert seen == list(range(7))


def test_cellular_coverage_and_load():
    batch = run_cellular_batch(1.0, 10.0, 4.0, [1.0], n_trials=20_000, seed=2, expected_aps=300)
    p = batch.ccdf.survival[0]
    exact = analytic.cellular_ccdf(1.0, 4.0, 1.0)
    assert abs(p - exact) < 4 * math.sqrt(exact * (1 - exact) / 20_000)
    # the cell holding a random user has area ~ Gamma(4.5, rate 3.5) in units of 1/lambda_a
    area = stats.gamma(4.5, scale=1 / 3.5)
    oracle = integrate.quad(lambda a: area.pdf(a) * -math.expm1(-10 * a) / (10 * a), 0, math.inf)[0]
    assert batch.e_inv_kc == pytest.approx(oracle, rel=0.02)
    assert 0 < batch.e_inv_kc_half_width < 0.02 * batch.e_inv_kc


def test_window_must_hold_aps():
    with pytest.raises(ParameterError):
        run_cellular_batch(1.0, 1.0, 4.0, [1.0], n_trials=2, expected_aps=1e-9)
    with pytest.raises(ParameterError):
        run_cellular_batch(1.0, 1.0, 1.5, [1.0], n_trials=2)


def test_window_size_is_configurable():
    cfg = PppConfig(1.0, 10.0, 0.3, window=SimWindow.for_expected_count(1.0, 120.0))
    net = sample_network(cfg)
    assert len(net.aps) > 60
