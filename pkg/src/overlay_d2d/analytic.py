"""Closed-form and integral SIR distributions for overlay D2D links.

Coordinated scheduling is evaluated by replacing the Voronoi cell of the
typical link with a disc whose size depends on the distance ``r_a`` from
the typical RX to its nearest AP:

* ``B1``: the disc with diameter [origin, AP], area pi r_a^2 / 4.  The
  typical RX sits on its boundary, so in polar coordinates around the
  origin the boundary is ``r_a cos(phi)`` for ``|phi| < pi/2``.
* ``B2``: the disc of radius ``r_a`` centred on the typical RX.

Setting ``b1_literal`` evaluates B1 with boundary ``2 r_a cos(phi)`` (a
disc of radius r_a through the origin) while keeping the area pi r_a^2 / 4.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate, special

from .errors import NumericalError, ParameterError


class CellApprox(str, enum.Enum):
    B1 = "B1"
    B2 = "B2"

    @classmethod
    def parse(cls, value: "str | CellApprox") -> "CellApprox":
        if isinstance(value, CellApprox):
            return value
        try:
            return cls(str(value).upper())
        except ValueError:
            raise ParameterError(f"unknown cell approximation {value!r}") from None


@dataclass(frozen=True)
class AnalyticParams:
    lambda_a: float = 1.0
    lambda_d: float = 10.0
    n_subchannels: int = 10
    r_d: float = 0.3
    alpha: float = 4.0
    cell_approx: CellApprox = CellApprox.B2
    b1_literal: bool = False

    def __post_init__(self):
        if not (self.lambda_a > 0 and self.lambda_d > 0):
            raise ParameterError("densities must be positive")
        if int(self.n_subchannels) != self.n_subchannels or self.n_subchannels < 1:
            raise ParameterError(f"n_subchannels must be an integer >= 1, got {self.n_subchannels}")
        if not self.r_d > 0:
            raise ParameterError(f"r_d must be positive, got {self.r_d}")
        if not self.alpha > 2:
            raise ParameterError(f"alpha must exceed 2, got {self.alpha}")
        object.__setattr__(self, "cell_approx", CellApprox.parse(self.cell_approx))


@dataclass(frozen=True)
class QuadratureSpec:
    rel_tol: float = 1e-10
    abs_tol: float = 1e-13
    max_subdivisions: int = 200
    outer_truncation: float = 5.0  # r_a cut-off in units of 1/sqrt(lambda_a)

    def __post_init__(self):
        if not (self.rel_tol > 0 and self.abs_tol > 0):
            raise ParameterError("quadrature tolerances must be positive")
        if self.max_subdivisions < 1 or not self.outer_truncation > 0:
            raise ParameterError("invalid quadrature limits")


DEFAULT_QUAD = QuadratureSpec()


def _quad(f, a, b, quad: QuadratureSpec, what: str) -> float:
    res = integrate.quad(f, a, b, epsabs=quad.abs_tol, epsrel=quad.rel_tol, limit=quad.max_subdivisions, full_output=1)
    if len(res) > 3:
        raise NumericalError(
            f"{what}: quadrature did not converge",
            interval=(a, b),
            estimate=res[0],
            abs_error=res[1],
            evaluations=res[2].get("neval"),
            detail=res[3].splitlines()[0],
        )
    return res[0]


def kappa(alpha: float) -> float:
    """Interference constant (2 pi^2 / alpha) / sin(2 pi / alpha) of a Poisson field."""
    if not alpha > 2:
        raise ParameterError(f"kappa diverges for alpha <= 2, got {alpha}")
    return (2.0 * math.pi**2 / alpha) / math.sin(2.0 * math.pi / alpha)


def regularized_upper_gamma(n: int, z):
    """Gamma(n, z) / (n - 1)! for integer ``n >= 1``.

    Uses the finite series ``exp(-z) sum_{k<n} z^k / k!`` with every term
    formed in log space, so it stays accurate when ``exp(-z)`` underflows.
    Accepts scalar or array ``z``.
    """
    if int(n) != n or n < 1:
        raise ParameterError(f"n must be an integer >= 1, got {n}")
    z_arr = np.asarray(z, dtype=float)
    if np.any(z_arr < 0) or np.any(np.isnan(z_arr)):
        raise ParameterError("z must be non-negative")
    k = np.arange(int(n), dtype=float)
    zz = z_arr[..., None]
    with np.errstate(divide="ignore", invalid="ignore"):
        logs = -zz + k * np.log(zz) - special.gammaln(k + 1.0)
    logs = np.where(zz == 0, np.where(k == 0, 0.0, -np.inf), logs)
    m = logs.max(axis=-1, keepdims=True)
    out = np.exp(m[..., 0]) * np.exp(logs - m).sum(axis=-1)
    out = np.minimum(out, 1.0)
    return float(out) if out.ndim == 0 else out


def uncoordinated_ccdf(params: AnalyticParams, theta):
    """Exact ccdf under uncoordinated scheduling (thinned Poisson field)."""
    theta = np.asarray(theta, dtype=float)
    if np.any(theta < 0):
        raise ParameterError("theta must be non-negative")
    out = np.exp(-_thinned_exponent(params, theta))
    return float(out) if out.ndim == 0 else out


def _thinned_exponent(params: AnalyticParams, theta: np.ndarray) -> np.ndarray:
    # shared by both schemes so the coordinated result can only round upward
    lam = params.lambda_d / params.n_subchannels
    return lam * kappa(params.alpha) * params.r_d**2 * theta ** (2.0 / params.alpha)


def approx_cell_area(params: AnalyticParams, r_a):
    """Area of the disc standing in for the typical cell."""
    r_a = np.asarray(r_a, dtype=float)
    if params.cell_approx is CellApprox.B1:
        return math.pi * r_a**2 / 4.0
    return math.pi * r_a**2


def _require_coordinated(params: AnalyticParams):
    if params.n_subchannels < 2:
        raise ParameterError("coordinated analysis requires n_subchannels >= 2")


def intracell_density(params: AnalyticParams, area):
    """Co-channel interferer density inside a typical cell of the given area."""
    _require_coordinated(params)
    lam = params.lambda_d / params.n_subchannels
    return lam * (1.0 - regularized_upper_gamma(params.n_subchannels - 1, params.lambda_d * np.asarray(area)))


def intracell_deficit(params: AnalyticParams, area):
    """lambda_d / N minus the intracell density, without the cancellation.

    Stays positive for areas where ``1 - Q`` already rounds to one.
    """
    _require_coordinated(params)
    lam = params.lambda_d / params.n_subchannels
    return lam * regularized_upper_gamma(params.n_subchannels - 1, params.lambda_d * np.asarray(area))


def interferer_densities(params: AnalyticParams, r_a: float) -> tuple[float, float]:
    """(intercell, intracell) co-channel densities under coordinated scheduling."""
    _require_coordinated(params)
    if not r_a > 0:
        raise ParameterError(f"r_a must be positive, got {r_a}")
    return params.lambda_d / params.n_subchannels, float(intracell_density(params, approx_cell_area(params, r_a)))


def _radial(params: AnalyticParams, theta: float, r0: float, quad: QuadratureSpec) -> float:
    # int_0^r0 u / (1 + (u/r_d)^alpha / theta) du
    if r0 <= 0:
        return 0.0
    if params.alpha == 4.0:
        c = math.sqrt(theta) * params.r_d**2
        return 0.5 * c * math.atan(r0 * r0 / c)
    a, rd = params.alpha, params.r_d
    return _quad(lambda u: u / (1.0 + (u / rd) ** a / theta), 0.0, r0, quad, "radial integral")


def cell_integral(params: AnalyticParams, theta: float, r_a: float, quad: QuadratureSpec = DEFAULT_QUAD) -> float:
    """Integral of 1 / (1 + (|x| / r_d)^alpha / theta) over the approximate cell."""
    if theta == 0 or r_a == 0:
        return 0.0
    if params.cell_approx is CellApprox.B2:
        return 2.0 * math.pi * _radial(params, theta, r_a, quad)
    reach = 2.0 * r_a if params.b1_literal else r_a
    half = _quad(lambda phi: _radial(params, theta, reach * math.cos(phi), quad), 0.0, math.pi / 2, quad, "angular integral")
    return 2.0 * half


def conditional_ccdf(params: AnalyticParams, theta: float, r_a: float, quad: QuadratureSpec = DEFAULT_QUAD) -> float:
    """Coordinated-scheduling ccdf given the distance ``r_a`` to the nearest AP.

    The intercell field is treated as Poisson with density lambda_d / N on
    the whole plane, and the intracell deficit is added back over the
    approximate cell.
    """
    _require_coordinated(params)
    if theta < 0 or r_a < 0:
        raise ParameterError("theta and r_a must be non-negative")
    if theta == 0:
        return 1.0
    lam = params.lambda_d / params.n_subchannels
    base = float(_thinned_exponent(params, np.asarray(theta, dtype=float)))
    q = regularized_upper_gamma(params.n_subchannels - 1, params.lambda_d * float(approx_cell_area(params, r_a)))
    return math.exp(-base + lam * q * cell_integral(params, theta, r_a, quad))


def unconditional_ccdf(params: AnalyticParams, theta: float, quad: QuadratureSpec = DEFAULT_QUAD) -> float:
    """Coordinated ccdf averaged over a Rayleigh ``r_a`` with mean 1/(2 sqrt(lambda_a)).

    Integrates in t = pi lambda_a r_a^2, where the weight becomes exp(-t).
    """
    _require_coordinated(params)
    if theta < 0:
        raise ParameterError("theta must be non-negative")
    if theta == 0:
        return 1.0
    scale = 1.0 / (math.pi * params.lambda_a)
    t_max = math.pi * quad.outer_truncation**2

    def f(t):
        return math.exp(-t) * conditional_ccdf(params, theta, math.sqrt(t * scale), quad)

    return min(1.0, _quad(f, 0.0, t_max, quad, "r_a average"))


def cellular_ccdf(lambda_a: float, alpha: float, theta: float, quad: QuadratureSpec = DEFAULT_QUAD) -> float:
    """Coverage of a nearest-AP downlink user with Rayleigh fading and no noise.

    The result does not depend on ``lambda_a``.
    """
    if not lambda_a > 0:
        raise ParameterError("lambda_a must be positive")
    if not alpha > 2:
        raise ParameterError(f"alpha must exceed 2, got {alpha}")
    if theta < 0:
        raise ParameterError("theta must be non-negative")
    if theta == 0:
        return 1.0
    if alpha == 4.0:
        s = math.sqrt(theta)
        rho = s * (math.pi / 2 - math.atan(1.0 / s))
    else:
        lo = theta ** (-2.0 / alpha)
        tail = integrate.quad(lambda u: 1.0 / (1.0 + u ** (alpha / 2)), lo, math.inf, epsabs=quad.abs_tol, epsrel=quad.rel_tol, limit=quad.max_subdivisions)[0]
        rho = theta ** (2.0 / alpha) * tail
    return 1.0 / (1.0 + rho)
