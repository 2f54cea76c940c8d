"""Monte Carlo SIR of the typical D2D link and of a cellular downlink user."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from . import rng as rngmod
from .errors import ParameterError
from .geometry import NetworkRealization, Point2, PppConfig, SimWindow, nearest_index, sample_network, sample_ppp
from .scheduling import Interferers, ScheduleConfig, cochannel_interferers, schedule

Z95 = 1.959963984540054


def db_to_linear(db):
    return 10.0 ** (np.asarray(db, dtype=float) / 10.0)


def linear_to_db(x):
    with np.errstate(divide="ignore"):
        return 10.0 * np.log10(np.asarray(x, dtype=float))


def default_thresholds(lo_db: float = -20.0, hi_db: float = 20.0, n: int = 41) -> np.ndarray:
    """Linear thresholds uniformly spaced in dB."""
    return db_to_linear(np.linspace(lo_db, hi_db, n))


def _check_alpha(alpha: float):
    if not alpha > 2:
        raise ParameterError(f"path loss exponent must exceed 2, got {alpha}")


@dataclass(frozen=True)
class SirSample:
    sir: float
    r_a: float
    intracell_count: int
    intercell_count: int


@dataclass(frozen=True)
class EmpiricalCcdf:
    thresholds: np.ndarray
    survival: np.ndarray
    half_width: np.ndarray
    n_trials: int

    @classmethod
    def from_samples(cls, samples, thresholds) -> "EmpiricalCcdf":
        samples = np.asarray(samples, dtype=float)
        thresholds = np.sort(np.atleast_1d(np.asarray(thresholds, dtype=float)))
        n = len(samples)
        if n == 0:
            raise ParameterError("cannot build a ccdf from zero samples")
        # count of samples >= theta via one sort, independent of sample order
        srt = np.sort(samples)
        p = (n - np.searchsorted(srt, thresholds, side="left")) / n
        return cls(thresholds, p, Z95 * np.sqrt(p * (1.0 - p) / n), n)

    @property
    def thresholds_db(self) -> np.ndarray:
        return linear_to_db(self.thresholds)

    def outage(self) -> np.ndarray:
        return 1.0 - self.survival


def sir_value(r_d: float, positions: np.ndarray, rng: np.random.Generator, alpha: float) -> float:
    """g0 r_d^-alpha / sum g_i |x_i|^-alpha with i.i.d. Exp(1) fading; inf with no interferer."""
    g0 = rng.exponential()
    if not len(positions):
        return math.inf
    g = rng.exponential(size=len(positions))
    d2 = np.einsum("ij,ij->i", positions, positions)
    return g0 * r_d ** (-alpha) / float(np.dot(g, d2 ** (-0.5 * alpha)))


def compute_sir(
    realization: NetworkRealization, interferers: Interferers, rng: np.random.Generator, alpha: float = 4.0
) -> SirSample:
    """SIR at the origin with unit-mean exponential fading on every link."""
    _check_alpha(alpha)
    if not realization.r_d > 0:
        raise ParameterError("r_d = 0 makes the desired-link path loss singular")
    sir = sir_value(realization.r_d, interferers.positions, rng, alpha)
    return SirSample(sir, realization.r_a, interferers.intracell_count, interferers.intercell_count)


@dataclass(frozen=True)
class D2dTrials:
    """Per-trial outputs of a D2D batch, ordered by trial index."""

    sir: np.ndarray
    r_a: np.ndarray
    intracell_count: np.ndarray
    intercell_count: np.ndarray

    def __len__(self):
        return len(self.sir)


def simulate_d2d(
    ppp_config: PppConfig,
    sched_config: ScheduleConfig,
    n_trials: int,
    alpha: float = 4.0,
    per_trial=None,
    with_counts: bool = True,
) -> D2dTrials:
    """Run trials ``ppp_config.trial_index .. + n_trials - 1``.

    ``per_trial(index, realization, assignment, interferers)`` is an optional
    hook for extra per-trial measurements.  With ``with_counts=False`` the
    intracell/intercell split is skipped and both count arrays hold -1.
    """
    return simulate_d2d_sweep(ppp_config, sched_config, [ppp_config.r_d], n_trials, alpha, per_trial, with_counts)[0]


def simulate_d2d_sweep(
    ppp_config: PppConfig,
    sched_config: ScheduleConfig,
    r_d_values,
    n_trials: int,
    alpha: float = 4.0,
    per_trial=None,
    with_counts: bool = True,
) -> list[D2dTrials]:
    """Trials at several link distances sharing the same field draws.

    Each entry is bit-identical to ``simulate_d2d`` run with that ``r_d``:
    the fields and link direction come from the geometry stream, which does
    not depend on ``r_d``, so they are drawn once per trial and the typical
    TX is moved along its direction.
    """
    if n_trials < 1:
        raise ParameterError(f"n_trials must be >= 1, got {n_trials}")
    _check_alpha(alpha)
    r_d_values = [float(r) for r in r_d_values]
    if not r_d_values:
        raise ParameterError("at least one link distance is required")
    if min(r_d_values) <= 0:
        raise ParameterError("r_d = 0 makes the desired-link path loss singular")
    streams = rngmod.StreamPool(ppp_config.seed)
    cols = [
        (np.empty(n_trials), np.empty(n_trials), np.empty(n_trials, np.int64), np.empty(n_trials, np.int64))
        for _ in r_d_values
    ]
    base = ppp_config.trial_index
    for i in range(n_trials):
        t = base + i
        cfg = PppConfig(
            ppp_config.lambda_a, ppp_config.lambda_d, r_d_values[0], ppp_config.window, ppp_config.seed, t
        )
        first = sample_network(cfg, streams)
        for (sir, r_a, intra, inter), r_d in zip(cols, r_d_values):
            net = first if r_d == first.r_d else first.with_link_distance(r_d)
            assignment = schedule(net, sched_config, streams.get(t, rngmod.SCHEDULE))
            intf = cochannel_interferers(net, assignment)
            sir[i] = sir_value(r_d, intf.positions, streams.get(t, rngmod.FADING), alpha)
            r_a[i] = net.r_a
            if with_counts:
                intra[i] = intf.intracell_count
                inter[i] = len(intf) - intra[i]
            else:
                intra[i] = inter[i] = -1
            if per_trial is not None:
                per_trial(i, net, assignment, intf)
    return [D2dTrials(*c) for c in cols]


def run_d2d_batch(
    ppp_config: PppConfig,
    sched_config: ScheduleConfig,
    thresholds=None,
    n_trials: int = 100_000,
    alpha: float = 4.0,
) -> EmpiricalCcdf:
    if thresholds is None:
        thresholds = default_thresholds()
    trials = simulate_d2d(ppp_config, sched_config, n_trials, alpha, with_counts=False)
    return EmpiricalCcdf.from_samples(trials.sir, thresholds)


class CellularBatch(NamedTuple):
    ccdf: EmpiricalCcdf
    e_inv_kc: float
    e_inv_kc_half_width: float


def cellular_trial(
    lambda_a: float,
    lambda_c: float,
    alpha: float,
    gen: np.random.Generator,
    window: SimWindow,
    count_radius: float,
) -> tuple[float, int] | None:
    """One downlink draw: (SIR_c, K_c), or None when no AP was sampled.

    Other cellular users are drawn in a disc of radius ``count_radius``
    around the serving AP, which must contain its cell.
    """
    aps = sample_ppp(lambda_a, window, gen)
    if len(aps) == 0:
        return None
    d2 = aps[:, 0] ** 2 + aps[:, 1] ** 2
    serving = int(np.argmin(d2))
    g = gen.exponential(size=len(aps))
    power = g * d2 ** (-0.5 * alpha)
    interference = power.sum() - power[serving]
    sir = power[serving] / interference if interference > 0 else math.inf
    a0 = aps[serving]
    users = sample_ppp(lambda_c, SimWindow(count_radius, Point2(a0[0], a0[1])), gen)
    k_c = 1
    if len(users):
        # a user within count_radius of a0 can only prefer APs within 2 count_radius of a0
        near = np.flatnonzero((aps[:, 0] - a0[0]) ** 2 + (aps[:, 1] - a0[1]) ** 2 <= 4.0 * count_radius**2)
        owner = near[nearest_index(users, aps[near])]
        k_c += int(np.count_nonzero(owner == serving))
    return sir, k_c


def run_cellular_batch(
    lambda_a: float,
    lambda_c: float,
    alpha: float = 4.0,
    thresholds=None,
    n_trials: int = 100_000,
    seed: int = 0,
    expected_aps: float = 1000.0,
    count_radius: float = 2.5,
) -> CellularBatch:
    """Typical downlink user at the origin served by its nearest AP.

    Interference comes from every other AP in a window holding
    ``expected_aps`` APs on average.  K_c counts the typical user plus the
    other cellular users (density ``lambda_c``) whose nearest AP is the
    serving one.  ``count_radius`` is in units of 1/sqrt(lambda_a); a cell
    reaching farther than 2.5 of those from its AP has probability below
    1e-6.
    """
    if not (lambda_a > 0 and lambda_c > 0):
        raise ParameterError("densities must be positive")
    _check_alpha(alpha)
    if n_trials < 1:
        raise ParameterError(f"n_trials must be >= 1, got {n_trials}")
    if thresholds is None:
        thresholds = default_thresholds()
    window = SimWindow.for_expected_count(lambda_a, expected_aps)
    reach = count_radius / math.sqrt(lambda_a)
    streams = rngmod.StreamPool(seed)
    sir = np.empty(n_trials)
    inv_k = np.empty(n_trials)
    for i in range(n_trials):
        for attempt in range(64):
            gen = streams.get(i, rngmod.CELLULAR, attempt)
            res = cellular_trial(lambda_a, lambda_c, alpha, gen, window, reach)
            if res is not None:
                break
        else:
            raise ParameterError("cellular window too small to contain an AP")
        sir[i] = res[0]
        inv_k[i] = 1.0 / res[1]
    hw = Z95 * inv_k.std(ddof=1) / math.sqrt(n_trials) if n_trials > 1 else math.inf
    return CellularBatch(EmpiricalCcdf.from_samples(sir, thresholds), float(inv_k.mean()), float(hw))
