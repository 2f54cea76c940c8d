"""Experiment runners producing CSV tables.

Every table starts with a ``# schema: <name> v<version>`` comment line and a
header row.  Column suffixes give units: ``_db`` for decibels, ``_du`` for
distance units, ``_per_area`` for densities, ``_bps_hz`` for b/s/Hz.
Probabilities and counts are dimensionless and carry no suffix.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass, field, replace

import numpy as np

from . import analytic
from . import rng as rngmod
from .config import ExperimentConfig
from .geometry import PppConfig, SimWindow, cell_area, sample_network
from .rate import RateParams, average_rate, baseline_rate, max_beneficial_distance, optimize_subchannels
from .scheduling import Mode, ScheduleConfig, cochannel_interferers, schedule
from .sir import EmpiricalCcdf, db_to_linear, simulate_d2d_sweep

SCHEMA_VERSION = 1
FIG3_THETAS_DB = (-10.0, 0.0, 10.0)
FIG3_RD_NORM = tuple(round(0.2 * k, 10) for k in range(1, 11))
FIG4_RD_NORM = tuple(round(0.1 + 0.05 * k, 10) for k in range(23))


@dataclass
class Table:
    name: str
    header: list[str]
    rows: list[list] = field(default_factory=list)

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write(f"# schema: {self.name} v{SCHEMA_VERSION}\n")
        buf.write(",".join(self.header) + "\n")
        for row in self.rows:
            buf.write(",".join(_fmt(v) for v in row) + "\n")
        return buf.getvalue()

    def column(self, name: str) -> list:
        i = self.header.index(name)
        return [r[i] for r in self.rows]


def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, str):
        return v
    x = float(v)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return format(x, ".9g")


def read_csv(text: str) -> Table:
    """Parse a table written by :meth:`Table.to_csv` back into floats."""
    lines = [ln for ln in text.splitlines() if ln.strip()]
    name = lines[0].split(":", 1)[1].strip().rsplit(" ", 1)[0] if lines[0].startswith("#") else "unknown"
    body = lines[1:] if lines[0].startswith("#") else lines
    header = body[0].split(",")
    rows = [[_parse(v) for v in ln.split(",")] for ln in body[1:]]
    return Table(name, header, rows)


def _parse(text: str):
    try:
        return float(text)
    except ValueError:
        return text


def thresholds_db(cfg: ExperimentConfig) -> np.ndarray:
    return np.linspace(cfg.theta_min_db, cfg.theta_max_db, cfg.theta_points)


def _window(cfg: ExperimentConfig) -> SimWindow:
    return SimWindow.for_expected_count(cfg.lambda_a, cfg.window_aps)


def _ppp(cfg: ExperimentConfig, r_d: float | None = None) -> PppConfig:
    return PppConfig(cfg.lambda_a, cfg.lambda_d, cfg.rd if r_d is None else r_d, _window(cfg), cfg.seed)


def _analytic(cfg: ExperimentConfig, n: int | None = None, r_d: float | None = None, approx: str | None = None):
    return analytic.AnalyticParams(
        cfg.lambda_a,
        cfg.lambda_d,
        cfg.n_sc if n is None else n,
        cfg.rd if r_d is None else r_d,
        cfg.alpha,
        analytic.CellApprox.parse(approx or cfg.cell_approx),
        cfg.b1_literal,
    )


def _coord_ccdf(params: analytic.AnalyticParams, theta: float) -> float:
    # one subchannel: there is nothing to coordinate
    if params.n_subchannels == 1:
        return analytic.uncoordinated_ccdf(params, theta)
    return analytic.unconditional_ccdf(params, theta)


def _sim_ccdfs(cfg: ExperimentConfig, n: int, mode: str, r_d_values, thetas_db) -> list[EmpiricalCcdf]:
    sched = ScheduleConfig(n, Mode.parse(mode), cfg.typical_cell)
    runs = simulate_d2d_sweep(_ppp(cfg, r_d_values[0]), sched, r_d_values, cfg.trials, cfg.alpha, with_counts=False)
    th = db_to_linear(np.asarray(thetas_db, float))
    return [EmpiricalCcdf.from_samples(run.sir, th) for run in runs]


def run_simulate(cfg: ExperimentConfig) -> Table:
    th_db = thresholds_db(cfg)
    ccdf = _sim_ccdfs(cfg, cfg.n_sc, cfg.mode, [cfg.rd], th_db)[0]
    params = _analytic(cfg)
    ana_col = "ana_coord_" + cfg.cell_approx
    t = Table("simulate", ["theta_db", f"sim_{cfg.mode}", "ci_halfwidth", "ana_uncoord", ana_col])
    for k, x in enumerate(th_db):
        theta = float(db_to_linear(x))
        t.rows.append(
            [x, ccdf.survival[k], ccdf.half_width[k], analytic.uncoordinated_ccdf(params, theta), _coord_ccdf(params, theta)]
        )
    return t


def run_analytic(cfg: ExperimentConfig) -> Table:
    b1, b2 = _analytic(cfg, approx="b1"), _analytic(cfg, approx="b2")
    t = Table("analytic", ["theta_db", "ana_uncoord", "ana_coord_b1", "ana_coord_b2", "ana_cellular"])
    for x in thresholds_db(cfg):
        theta = float(db_to_linear(x))
        t.rows.append(
            [
                x,
                analytic.uncoordinated_ccdf(b1, theta),
                _coord_ccdf(b1, theta),
                _coord_ccdf(b2, theta),
                analytic.cellular_ccdf(cfg.lambda_a, cfg.alpha, theta),
            ]
        )
    return t


@dataclass(frozen=True)
class DensityTrials:
    intercell_density: np.ndarray
    intracell_count: np.ndarray
    r_a: np.ndarray
    cell_area: np.ndarray


def density_trials(cfg: ExperimentConfig) -> DensityTrials:
    """Per-trial cochannel interferer statistics of the typical TX's subchannel.

    Intercell density divides the intercell count by the window area outside
    the typical cell.  The link distance defaults to zero, where TX and RX
    share a cell exactly.
    """
    sched = ScheduleConfig(cfg.n_sc, Mode.parse(cfg.mode), cfg.typical_cell)
    ppp = _ppp(cfg)
    streams = rngmod.StreamPool(cfg.seed)
    n = cfg.trials
    inter = np.empty(n)
    intra = np.empty(n)
    r_a = np.empty(n)
    area = np.empty(n)
    for i in range(n):
        net = sample_network(replace(ppp, trial_index=i), streams)
        assignment = schedule(net, sched, streams.get(i, rngmod.SCHEDULE))
        intf = cochannel_interferers(net, assignment)
        a0 = cell_area(net, net.cell_of_typical_rx)
        intra[i] = intf.intracell_count
        inter[i] = (len(intf) - intra[i]) / (net.window.area - a0)
        r_a[i] = net.r_a
        area[i] = a0
    return DensityTrials(inter, intra, r_a, area)


def _mean_se(x: np.ndarray) -> tuple[float, float]:
    return float(x.mean()), float(x.std(ddof=1) / math.sqrt(len(x))) if len(x) > 1 else math.nan


def run_densities(cfg: ExperimentConfig) -> Table:
    d = density_trials(cfg)
    inter, inter_se = _mean_se(d.intercell_density)
    intra, intra_se = _mean_se(d.intracell_count)
    # the densities do not involve r_d, which may be zero here
    r_d = cfg.rd or 1.0
    expected = {}
    for approx in ("b1", "b2"):
        p = _analytic(cfg, r_d=r_d, approx=approx)
        a = analytic.approx_cell_area(p, d.r_a)
        expected[approx] = _mean_se(analytic.intracell_density(p, a) * a)[0] if cfg.n_sc > 1 else math.nan
    if cfg.n_sc > 1:
        p = _analytic(cfg, r_d=r_d)
        true_area_expected = _mean_se(analytic.intracell_density(p, d.cell_area) * d.cell_area)[0]
    else:
        true_area_expected = math.nan
    t = Table(
        "densities",
        [
            "trials",
            "n_sc",
            "mode",
            "lambda_d_per_area",
            "intercell_density_sim_per_area",
            "intercell_density_se_per_area",
            "intercell_density_ana_per_area",
            "intracell_count_sim",
            "intracell_count_se",
            "intracell_count_ana_b1",
            "intracell_count_ana_b2",
            "intracell_count_ana_true_area",
            "mean_cell_area_du2",
        ],
    )
    t.rows.append(
        [
            cfg.trials,
            cfg.n_sc,
            cfg.mode,
            cfg.lambda_d,
            inter,
            inter_se,
            cfg.lambda_d / cfg.n_sc,
            intra,
            intra_se,
            expected["b1"],
            expected["b2"],
            true_area_expected,
            float(d.cell_area.mean()),
        ]
    )
    return t


def rate_params(cfg: ExperimentConfig, **changes) -> RateParams:
    base = RateParams(
        lambda_a=cfg.lambda_a,
        lambda_c=cfg.lambda_c,
        lambda_d=cfg.lambda_d,
        eta=cfg.eta,
        theta0=float(db_to_linear(cfg.theta_db)),
        alpha=cfg.alpha,
        r_d=cfg.rd,
        n_range=(1, cfg.n_max),
        backend=cfg.cell_approx.upper(),
        mode=Mode.parse(cfg.mode),
        cellular_trials=cfg.trials,
        d2d_trials=cfg.trials,
        seed=cfg.seed,
    )
    return replace(base, **changes)


_RATE_HEADER = [
    "rd_du",
    "n_sc",
    "eta",
    "e_inv_kc",
    "p_cov_cellular",
    "p_cov_d2d",
    "r_cellular_bps_hz",
    "r_d2d_bps_hz",
    "r_total_bps_hz",
    "baseline_bps_hz",
]


def _baseline(p: RateParams) -> float:
    return baseline_rate(
        p.lambda_a, p.lambda_c + p.lambda_d, p.theta0, p.alpha, p.cellular_trials, p.seed, p.log_base
    )


def _rate_row(p: RateParams, b) -> list:
    return [p.r_d, b.n_opt, b.eta, b.e_inv_kc, b.p_cov_cellular, b.p_cov_d2d, b.r_cellular, b.r_d2d, b.r_total, _baseline(p)]


def run_rate(cfg: ExperimentConfig) -> Table:
    p = rate_params(cfg)
    t = Table("rate", list(_RATE_HEADER))
    t.rows.append(_rate_row(p, average_rate(p, cfg.n_sc)))
    return t


def run_optimize(cfg: ExperimentConfig) -> Table:
    p = rate_params(cfg)
    _, best = optimize_subchannels(p)
    far = max_beneficial_distance(p)
    t = Table("optimize", _RATE_HEADER + ["max_beneficial_rd_du", "bracketed"])
    t.rows.append(_rate_row(p, best) + [far.r_d, far.bracketed])
    return t


def run_fig2(cfg: ExperimentConfig) -> Table:
    th_db = thresholds_db(cfg)
    sims = {n: _sim_ccdfs(cfg, n, "coord", [cfg.rd], th_db)[0] for n in (10, 20)}
    header = ["theta_db", "sim_coord_N10", "sim_coord_N20", "ana_coord_B1", "ana_coord_B2"]
    header += ["ana_uncoord_N1", "ana_uncoord_N10", "ana_uncoord_N20", "ci_halfwidth"]
    header += ["ana_coord_B1_N20", "ana_coord_B2_N20", "ci_halfwidth_N10", "ci_halfwidth_N20"]
    t = Table("fig2", header)
    p = {(n, a): _analytic(cfg, n=n, approx=a) for n in (1, 10, 20) for a in ("b1", "b2")}
    for k, x in enumerate(th_db):
        theta = float(db_to_linear(x))
        t.rows.append(
            [
                x,
                sims[10].survival[k],
                sims[20].survival[k],
                _coord_ccdf(p[10, "b1"], theta),
                _coord_ccdf(p[10, "b2"], theta),
                analytic.uncoordinated_ccdf(p[1, "b2"], theta),
                analytic.uncoordinated_ccdf(p[10, "b2"], theta),
                analytic.uncoordinated_ccdf(p[20, "b2"], theta),
                max(sims[10].half_width[k], sims[20].half_width[k]),
                _coord_ccdf(p[20, "b1"], theta),
                _coord_ccdf(p[20, "b2"], theta),
                sims[10].half_width[k],
                sims[20].half_width[k],
            ]
        )
    return t


def _theta_tag(x: float) -> str:
    return ("m" if x < 0 else "p" if x > 0 else "") + f"{abs(x):g}db"


def run_fig3(cfg: ExperimentConfig) -> Table:
    unit = 1.0 / (2.0 * math.sqrt(cfg.lambda_a))
    rds = [r * unit for r in FIG3_RD_NORM]
    sims = _sim_ccdfs(cfg, cfg.n_sc, "coord", rds, FIG3_THETAS_DB)
    header = ["rd_du", "rd_norm"]
    for x in FIG3_THETAS_DB:
        tag = _theta_tag(x)
        header += [f"sim_out_coord_{tag}", f"ci_halfwidth_{tag}", f"ana_out_coord_b1_{tag}"]
        header += [f"ana_out_coord_b2_{tag}", f"ana_out_uncoord_{tag}"]
    t = Table("fig3", header)
    for norm, r_d, ccdf in zip(FIG3_RD_NORM, rds, sims):
        row = [r_d, norm]
        b1, b2 = _analytic(cfg, r_d=r_d, approx="b1"), _analytic(cfg, r_d=r_d, approx="b2")
        for k, x in enumerate(FIG3_THETAS_DB):
            theta = float(db_to_linear(x))
            row += [
                1.0 - ccdf.survival[k],
                ccdf.half_width[k],
                1.0 - _coord_ccdf(b1, theta),
                1.0 - _coord_ccdf(b2, theta),
                1.0 - analytic.uncoordinated_ccdf(b2, theta),
            ]
        t.rows.append(row)
    return t


def run_fig4(cfg: ExperimentConfig) -> tuple[Table, Table]:
    """Rate curves over r_d plus a summary of the largest beneficial r_d."""
    unit = 1.0 / (2.0 * math.sqrt(cfg.lambda_a))
    coord = rate_params(cfg, mode=Mode.COORDINATED)
    uncoord = rate_params(cfg, mode=Mode.UNCOORDINATED)
    single = rate_params(cfg, mode=Mode.UNCOORDINATED, n_range=(1, 1))
    base = _baseline(coord)
    curves = Table(
        "fig4",
        [
            "rd_du",
            "rd_norm",
            "baseline_bps_hz",
            "n_opt_coord",
            "rate_coord_bps_hz",
            "n_opt_uncoord",
            "rate_uncoord_bps_hz",
            "rate_n1_bps_hz",
        ],
    )
    for norm in FIG4_RD_NORM:
        r_d = norm * unit
        nc, bc = optimize_subchannels(replace(coord, r_d=r_d))
        nu, bu = optimize_subchannels(replace(uncoord, r_d=r_d))
        b1 = average_rate(replace(single, r_d=r_d), 1)
        curves.rows.append([r_d, norm, base, nc, bc.r_total, nu, bu.r_total, b1.r_total])
    summary = Table("fig4_summary", ["curve", "max_beneficial_rd_du", "max_beneficial_rd_norm", "bracketed"])
    for name, p in (("coord", coord), ("uncoord", uncoord), ("n1", single)):
        far = max_beneficial_distance(p)
        summary.rows.append([name, far.r_d, far.r_d / unit, far.bracketed])
    return curves, summary


RUNNERS = {
    "simulate": run_simulate,
    "analytic": run_analytic,
    "densities": run_densities,
    "rate": run_rate,
    "optimize": run_optimize,
    "fig2": run_fig2,
    "fig3": run_fig3,
    "fig4": run_fig4,
}


def run(cfg: ExperimentConfig) -> list[Table]:
    out = RUNNERS[cfg.scenario](cfg)
    return list(out) if isinstance(out, tuple) else [out]
