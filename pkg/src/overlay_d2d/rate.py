"""Average user rate of a downlink cellular system with overlay D2D links.

R = w_c (1 - eta) R_c + w_d eta R_d with population weights
w_c = lambda_c / (lambda_c + lambda_d), w_d = 1 - w_c and

    R_c = E(1/K_c) P(SIR_c >= theta0) log(1 + theta0)
    R_d = (1/N) P(SIR_d >= theta0) log(1 + theta0)

The cellular factors come from Monte Carlo and are cached, since they do not
depend on the D2D parameters.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from functools import lru_cache
from typing import NamedTuple

from . import analytic
from .errors import ParameterError
from .geometry import PppConfig
from .scheduling import Mode, ScheduleConfig
from .sir import run_cellular_batch, run_d2d_batch

BACKENDS = ("B1", "B2", "monte_carlo")
DEFAULT_LOG_BASE = 2.0


@dataclass(frozen=True)
class RateParams:
    lambda_a: float = 1.0
    lambda_c: float = 10.0
    lambda_d: float = 10.0
    eta: float | None = None  # None: fair partition lambda_d / (lambda_c + lambda_d)
    theta0: float = 1.0
    alpha: float = 4.0
    r_d: float = 0.3
    n_range: tuple[int, int] = (1, 64)
    backend: str = "B2"
    mode: Mode = Mode.COORDINATED
    log_base: float = DEFAULT_LOG_BASE
    cellular_trials: int = 100_000
    d2d_trials: int = 100_000
    seed: int = 0

    def __post_init__(self):
        if not (self.lambda_a > 0 and self.lambda_c > 0 and self.lambda_d > 0):
            raise ParameterError("densities must be positive")
        if self.eta is None:
            object.__setattr__(self, "eta", self.lambda_d / (self.lambda_c + self.lambda_d))
        if not 0.0 <= self.eta <= 1.0:
            raise ParameterError(f"eta must lie in [0, 1], got {self.eta}")
        if not self.theta0 > 0:
            raise ParameterError(f"theta0 must be positive, got {self.theta0}")
        if not self.alpha > 2:
            raise ParameterError(f"alpha must exceed 2, got {self.alpha}")
        if not self.r_d > 0:
            raise ParameterError(f"r_d must be positive, got {self.r_d}")
        lo, hi = self.n_range
        if not 1 <= lo <= hi:
            raise ParameterError(f"n_range must satisfy 1 <= lo <= hi, got {self.n_range}")
        if self.backend not in BACKENDS:
            raise ParameterError(f"backend must be one of {BACKENDS}, got {self.backend!r}")
        object.__setattr__(self, "mode", Mode.parse(self.mode))
        if not (self.log_base > 1):
            raise ParameterError("log_base must exceed 1")

    @property
    def spectral_efficiency(self) -> float:
        return math.log(1.0 + self.theta0, self.log_base)


@dataclass(frozen=True)
class RateBreakdown:
    r_cellular: float
    r_d2d: float
    r_total: float
    n_opt: int
    e_inv_kc: float
    p_cov_cellular: float
    p_cov_d2d: float
    eta: float


class CellularEstimate(NamedTuple):
    e_inv_kc: float
    p_cov: float


@lru_cache(maxsize=None)
def cellular_estimate(
    lambda_a: float, lambda_c: float, alpha: float, theta0: float, n_trials: int, seed: int
) -> CellularEstimate:
    """Monte Carlo E(1/K_c) and P(SIR_c >= theta0), cached per argument set."""
    batch = run_cellular_batch(lambda_a, lambda_c, alpha, [theta0], n_trials, seed)
    return CellularEstimate(batch.e_inv_kc, float(batch.ccdf.survival[0]))


def d2d_coverage(params: RateParams, n: int) -> float:
    """P(SIR_d >= theta0) with n subchannels under the configured backend."""
    if params.backend == "monte_carlo":
        ppp = PppConfig(params.lambda_a, params.lambda_d, params.r_d, seed=params.seed)
        ccdf = run_d2d_batch(ppp, ScheduleConfig(n, params.mode), [params.theta0], params.d2d_trials, params.alpha)
        return float(ccdf.survival[0])
    ap = analytic.AnalyticParams(
        params.lambda_a, params.lambda_d, n, params.r_d, params.alpha, analytic.CellApprox(params.backend)
    )
    # coordinated and uncoordinated coincide for a single subchannel
    if params.mode is Mode.UNCOORDINATED or n == 1:
        return analytic.uncoordinated_ccdf(ap, params.theta0)
    return analytic.unconditional_ccdf(ap, params.theta0)


def average_rate(params: RateParams, n: int) -> RateBreakdown:
    if int(n) != n or n < 1:
        raise ParameterError(f"n must be an integer >= 1, got {n}")
    cell = cellular_estimate(
        params.lambda_a, params.lambda_c, params.alpha, params.theta0, params.cellular_trials, params.seed
    )
    se = params.spectral_efficiency
    p_d = d2d_coverage(params, n)
    r_c = cell.e_inv_kc * cell.p_cov * se
    r_d = p_d * se / n
    w_c = params.lambda_c / (params.lambda_c + params.lambda_d)
    total = w_c * (1.0 - params.eta) * r_c + (1.0 - w_c) * params.eta * r_d
    return RateBreakdown(r_c, r_d, total, int(n), cell.e_inv_kc, cell.p_cov, p_d, params.eta)


def optimize_subchannels(params: RateParams, search_eta: bool = False) -> tuple[int, RateBreakdown]:
    """Exhaustive search of N over ``params.n_range``; ties go to the smaller N.

    With ``search_eta`` the bandwidth share is also scanned on [0, 1] in
    steps of 0.01.
    """
    lo, hi = params.n_range
    best: RateBreakdown | None = None
    for n in range(lo, hi + 1):
        b = average_rate(params, n)
        if best is None or b.r_total > best.r_total:
            best = b
    if search_eta:
        for k in range(101):
            eta = k / 100
            b = average_rate(replace(params, eta=eta), best.n_opt)
            if b.r_total > best.r_total:
                best = b
    return best.n_opt, best


def baseline_rate(
    lambda_a: float,
    lambda_c_total: float,
    theta0: float,
    alpha: float = 4.0,
    cellular_trials: int = 100_000,
    seed: int = 0,
    log_base: float = DEFAULT_LOG_BASE,
) -> float:
    """Average rate when every user is cellular (no D2D band)."""
    if not (lambda_a > 0 and lambda_c_total > 0):
        raise ParameterError("densities must be positive")
    cell = cellular_estimate(lambda_a, lambda_c_total, alpha, theta0, cellular_trials, seed)
    return cell.e_inv_kc * cell.p_cov * math.log(1.0 + theta0, log_base)


class BeneficialDistance(NamedTuple):
    r_d: float
    bracketed: bool


def rate_gap(params: RateParams, r_d: float) -> float:
    """Optimized average rate with D2D minus the all-cellular baseline."""
    _, best = optimize_subchannels(replace(params, r_d=r_d))
    base = baseline_rate(
        params.lambda_a,
        params.lambda_c + params.lambda_d,
        params.theta0,
        params.alpha,
        params.cellular_trials,
        params.seed,
        params.log_base,
    )
    return best.r_total - base


def max_beneficial_distance(params: RateParams, bracket: tuple[float, float] | None = None) -> BeneficialDistance:
    """Largest r_d at which D2D with optimized N still beats the baseline.

    Bisection to 1e-3 / sqrt(lambda_a).  When the bracket does not hold a
    sign change the nearer edge is returned with ``bracketed=False``.
    """
    unit = 1.0 / math.sqrt(params.lambda_a)
    lo, hi = bracket if bracket is not None else (0.02 * unit, 2.0 * unit)
    f_lo, f_hi = rate_gap(params, lo), rate_gap(params, hi)
    if f_lo < 0:
        return BeneficialDistance(lo, False)
    if f_hi >= 0:
        return BeneficialDistance(hi, False)
    tol = 1e-3 * unit
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if rate_gap(params, mid) >= 0:
            lo = mid
        else:
            hi = mid
    return BeneficialDistance(0.5 * (lo + hi), True)
