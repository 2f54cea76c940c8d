"""Acceptance criteria at desk scale (1e5 Monte Carlo trials).

Each test records exactly one PASS/FAIL line, then asserts the same
condition.  Tolerances are the contract values; nothing is relaxed here.
"""

import math
import time
from functools import lru_cache

import numpy as np
import pytest

from overlay_d2d import analytic, cli
from overlay_d2d.analytic import AnalyticParams, QuadratureSpec
from overlay_d2d.config import build_config
from overlay_d2d.experiments import run_densities, run_fig2, run_fig3, run_fig4
from overlay_d2d.geometry import PppConfig, SimWindow
from overlay_d2d.scheduling import ScheduleConfig
from overlay_d2d.sir import db_to_linear, default_thresholds, run_d2d_batch

TRIALS = 100_000
SEED = 42


@lru_cache(maxsize=None)
def fig2():
    return run_fig2(build_config("fig2", {}, {"trials": TRIALS, "seed": SEED}))


@lru_cache(maxsize=None)
def fig3():
    return run_fig3(build_config("fig3", {}, {"trials": TRIALS, "seed": SEED}))


@lru_cache(maxsize=None)
def fig4():
    return run_fig4(build_config("fig4", {}, {"trials": TRIALS, "seed": SEED}))


def theta_at_coverage(theta_db, ccdf, level):
    """Threshold (dB) where a decreasing ccdf crosses ``level``, interpolated in dB."""
    theta_db, ccdf = np.asarray(theta_db), np.asarray(ccdf)
    k = int(np.flatnonzero(ccdf < level)[0])
    x0, x1, y0, y1 = theta_db[k - 1], theta_db[k], ccdf[k - 1], ccdf[k]
    return x0 + (y0 - level) * (x1 - x0) / (y0 - y1)


def test_c1_uncoordinated_closed_form(acceptance_log):
    thresholds = default_thresholds()
    start = time.perf_counter()
    devs = {}
    for n in (1, 10, 20):
        # wider field for N = 20, whose high-threshold tail is sensitive to truncation
        window = SimWindow.for_expected_count(1.0, 120.0 if n == 20 else 30.0)
        ccdf = run_d2d_batch(PppConfig(1.0, 10.0, 0.3, window, seed=SEED), ScheduleConfig(n), thresholds, TRIALS)
        exact = analytic.uncoordinated_ccdf(AnalyticParams(1.0, 10.0, n, 0.3), thresholds)
        devs[n] = float(np.max(np.abs(ccdf.survival - exact)))
    elapsed = time.perf_counter() - start
    ok = max(devs.values()) <= 0.015 and elapsed < 60.0
    detail = ", ".join(f"N={n} max dev {d:.4f}" for n, d in devs.items())
    acceptance_log("C1 uncoordinated closed form", ok, f"{detail} (tol 0.015); runtime {elapsed:.1f} s (limit 60 s)")
    assert ok


def test_c2_interferer_densities(acceptance_log):
    t = run_densities(build_config("densities", {}, {"trials": TRIALS, "seed": SEED}))
    row = dict(zip(t.header, t.rows[0]))
    inter, se, target = row["intercell_density_sim_per_area"], row["intercell_density_se_per_area"], row["intercell_density_ana_per_area"]
    z = abs(inter - target) / se
    intra, want = row["intracell_count_sim"], row["intracell_count_ana_b2"]
    rel = abs(intra - want) / want
    ok = z <= 3.0 and rel <= 0.05
    acceptance_log(
        "C2 interferer densities",
        ok,
        f"intercell {inter:.5f} vs {target:g} ({z:.2f} SE, tol 3); "
        f"intracell count {intra:.4f} vs {want:.4f} (rel err {rel:.2%}, tol 5%)",
    )
    assert ok


def test_c3_coordination_gain_curves(acceptance_log):
    t = fig2()
    th = np.array(t.column("theta_db"))
    notes, ok = [], True
    for n, lo, hi in ((10, 4.0, 6.0), (20, 5.0, 7.0)):
        sim = np.array(t.column(f"sim_coord_N{n}"))
        # invert the exact uncoordinated ccdf at coverage 0.9
        lam_k = 10.0 / n * analytic.kappa(4.0) * 0.3**2
        unc_db = 10 * math.log10((-math.log(0.9) / lam_k) ** 2)
        gain = theta_at_coverage(th, sim, 0.9) - unc_db
        b2_col = "ana_coord_B2" if n == 10 else "ana_coord_B2_N20"
        b1_col = "ana_coord_B1" if n == 10 else "ana_coord_B1_N20"
        b2_dev = float(np.max(np.abs(np.array(t.column(b2_col)) - sim)))
        b1 = np.array(t.column(b1_col))
        unc = np.array(t.column(f"ana_uncoord_N{n}"))
        ci = np.array(t.column(f"ci_halfwidth_N{n}"))
        b1_excess = float(np.max(b1 - sim - ci))
        b1_below = b1_excess <= 0
        b1_above_unc = bool(np.all(b1 >= unc))
        ok &= lo <= gain <= hi and b2_dev <= 0.03 and b1_below and b1_above_unc
        notes.append(
            f"N={n} gain {gain:.2f} dB (want {lo:g}..{hi:g}), B2 max dev {b2_dev:.4f} (tol 0.03), "
            f"B1<=sim+CI {'yes' if b1_below else f'no (max excess {b1_excess:.4f})'}, B1>=uncoord {'yes' if b1_above_unc else 'no'}"
        )
    acceptance_log("C3 coordination gain curves", ok, "; ".join(notes))
    assert ok


def test_c4_outage_versus_link_distance(acceptance_log):
    t = fig3()
    rd = np.array(t.column("rd_norm"))
    tags = ("m10db", "0db", "p10db")
    sim = np.array([t.column(f"sim_out_coord_{g}") for g in tags])
    b2 = np.array([t.column(f"ana_out_coord_b2_{g}") for g in tags])
    unc = np.array([t.column(f"ana_out_uncoord_{g}") for g in tags])
    mono_rd = bool(np.all(np.diff(sim, axis=1) >= 0))
    mono_theta = bool(np.all(np.diff(sim, axis=0) >= 0))
    inside = rd <= 1.2 + 1e-9
    dev = np.abs(b2 - sim)[:, inside]
    worst = float(dev.max())
    at = rd[inside][int(np.argmax(dev.max(axis=0)))]
    # relative outage reduction from coordination at -10 and 0 dB, beyond the tracked range
    beyond = rd >= 1.2 - 1e-9
    gain = 1.0 - sim[:2, beyond] / unc[:2, beyond]
    slopes = [float(np.polyfit(rd[beyond], g, 1)[0]) for g in gain]
    shrinks = all(g[-1] < g[0] for g in gain) and all(s < 0 for s in slopes)
    ok = mono_rd and mono_theta and worst <= 0.03 and shrinks
    acceptance_log(
        "C4 outage versus link distance",
        ok,
        f"monotone in r_d {'yes' if mono_rd else 'no'}, in theta {'yes' if mono_theta else 'no'}; "
        f"B2 max dev {worst:.4f} at r_d={at:g}/(2 sqrt(lambda_a)) (tol 0.03); "
        f"gain beyond 1.2: {gain[0][0]:.3f}->{gain[0][-1]:.3f} (-10 dB), {gain[1][0]:.3f}->{gain[1][-1]:.3f} (0 dB)",
    )
    assert ok


def test_c5_rate_crossovers(acceptance_log):
    curves, summary = fig4()
    far = {row[0]: row for row in summary.rows}
    coord, unc = far["coord"][2], far["uncoord"][2]
    a_ok = far["coord"][3] and abs(coord - 0.8) <= 0.08
    ratio = coord / unc - 1.0
    b_ok = far["uncoord"][3] and 0.06 <= ratio <= 0.12
    r_c = np.array(curves.column("rate_coord_bps_hz"))
    r_u = np.array(curves.column("rate_uncoord_bps_hz"))
    r_1 = np.array(curves.column("rate_n1_bps_hz"))
    rd = np.array(curves.column("rd_norm"))
    beneficial = rd <= coord
    strict = (r_1 < r_c) & (r_1 < r_u)
    bad = rd[beneficial & ~strict]
    c_ok = bad.size == 0
    ok = bool(a_ok and b_ok and c_ok)
    acceptance_log(
        "C5 rate crossovers",
        ok,
        f"(a) coordinated max beneficial r_d {coord:.4f} (want 0.72..0.88) {'ok' if a_ok else 'FAIL'}; "
        f"(b) gain over uncoordinated {ratio:.2%} (want 6%..12%) {'ok' if b_ok else 'FAIL'}; "
        f"(c) N=1 strictly below both at {int((beneficial & strict).sum())}/{int(beneficial.sum())} grid points, "
        f"ties at r_d={', '.join(f'{x:g}' for x in bad) or 'none'} {'ok' if c_ok else 'FAIL'} "
        "(r_d in units of 1/(2 sqrt(lambda_a)))",
    )
    assert ok


def test_c6_dominance(acceptance_log):
    g = np.random.default_rng(2024)
    r_a_grid = np.geomspace(0.02, 2.0, 15)
    r_d_grid = np.geomspace(0.02, 1.0, 15)
    theta_grid = np.geomspace(0.01, 100.0, 17)
    ccdf_bad = density_bad = 0
    for i in range(1000):
        p = AnalyticParams(
            1.0,
            float(g.uniform(1.0, 50.0)),
            int(g.integers(2, 33)),
            float(g.choice(r_d_grid)),
            float(g.uniform(2.5, 6.0)),
            "B1" if i % 2 else "B2",
        )
        r_a, theta = float(g.choice(r_a_grid)), float(g.choice(theta_grid))
        ccdf_bad += analytic.conditional_ccdf(p, theta, r_a) < analytic.uncoordinated_ccdf(p, theta)
        area = analytic.approx_cell_area(p, r_a)
        cap = p.lambda_d / p.n_subchannels
        density_bad += not (analytic.intracell_density(p, area) <= cap and analytic.intracell_deficit(p, area) > 0)
    ok = ccdf_bad == 0 and density_bad == 0
    acceptance_log(
        "C6 analytic dominance", ok, f"1000 tuples: {ccdf_bad} ccdf violations, {density_bad} density violations"
    )
    assert ok


def test_c7_numerics(acceptance_log):
    from test_analytic import q_oracle, region_mc_integral

    worst_q = 0.0
    for n in (1, 2, 3, 5, 8, 13, 21, 34, 50):
        for z in (1e-3, 0.1, 0.5, 1.0, 2.0, 5.0, 10.0, 20.0, 35.0, 50.0, 75.0, 100.0):
            want = float(q_oracle(n, z))
            worst_q = max(worst_q, abs(analytic.regularized_upper_gamma(n, z) - want) / want)
    g = np.random.default_rng(7)
    worst_c = 0.0
    for i in range(20):
        p = AnalyticParams(
            1.0,
            float(g.uniform(2.0, 30.0)),
            int(g.integers(2, 21)),
            float(g.uniform(0.05, 0.8)),
            float(g.choice([3.0, 3.5, 4.0, 5.0])),
            "B1" if i % 2 else "B2",
        )
        theta, r_a = float(10 ** g.uniform(-1, 1)), float(g.uniform(0.05, 1.2))
        lam = p.lambda_d / p.n_subchannels
        base = lam * analytic.kappa(p.alpha) * p.r_d**2 * theta ** (2 / p.alpha)
        q = analytic.regularized_upper_gamma(p.n_subchannels - 1, p.lambda_d * analytic.approx_cell_area(p, r_a))
        oracle = math.exp(-base + lam * q * region_mc_integral(p, theta, r_a))
        worst_c = max(worst_c, abs(analytic.conditional_ccdf(p, theta, r_a) - oracle))
    worst_h = 0.0
    for approx, alpha in (("B2", 4.0), ("B1", 4.0), ("B2", 3.0)):
        p = AnalyticParams(1.0, 10.0, 10, 0.3, alpha, approx)
        for theta in (0.1, 1.0, 10.0):
            a = analytic.unconditional_ccdf(p, theta)
            b = analytic.unconditional_ccdf(p, theta, QuadratureSpec(rel_tol=0.5e-10, abs_tol=0.5e-13))
            worst_h = max(worst_h, abs(a - b))
    ok = worst_q <= 1e-12 and worst_c <= 1e-4 and worst_h < 1e-5
    acceptance_log(
        "C7 numerics",
        ok,
        f"gamma max rel err {worst_q:.2e} (tol 1e-12); conditional ccdf vs Sobol quadrature {worst_c:.2e} "
        f"(tol 1e-4, 20 points); tolerance halving shift {worst_h:.2e} (tol 1e-5)",
    )
    assert ok


INVOCATIONS = [
    ["simulate", "--trials", "400", "--mode", "coord"],
    ["simulate", "--trials", "400", "--mode", "uncoord", "--n-sc", "3"],
    ["analytic", "--alpha", "3.5", "--cell-approx", "b1"],
    ["densities", "--trials", "300"],
    ["rate", "--trials", "1000", "--rd", "0.2"],
    ["optimize", "--trials", "1000", "--n-max", "12"],
    ["figure", "fig2", "--trials", "200"],
    ["figure", "fig3", "--trials", "200"],
    ["figure", "fig4", "--trials", "1000", "--n-max", "12"],
]


def test_c8_determinism(acceptance_log, tmp_path):
    mismatched = []
    for k, args in enumerate(INVOCATIONS):
        outs = []
        for rep in range(2):
            path = tmp_path / f"run{k}_{rep}.csv"
            assert cli.run_cli([*args, "--seed", "123", "--out", str(path)]) == 0
            files = sorted(tmp_path.glob(f"run{k}_{rep}*.csv"))
            outs.append([f.read_bytes() for f in files])
        if outs[0] != outs[1]:
            mismatched.append(" ".join(args))
    ok = not mismatched
    acceptance_log(
        "C8 determinism", ok, f"{len(INVOCATIONS) - len(mismatched)}/{len(INVOCATIONS)} invocations byte-identical"
    )
    assert ok
