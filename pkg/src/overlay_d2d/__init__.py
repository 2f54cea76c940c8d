"""Simulation and analysis of overlay in-band D2D links under coordinated and
uncoordinated subchannel scheduling in a Poisson cellular network."""

from .analytic import (
    AnalyticParams,
    CellApprox,
    QuadratureSpec,
    cellular_ccdf,
    conditional_ccdf,
    interferer_densities,
    intracell_deficit,
    intracell_density,
    kappa,
    regularized_upper_gamma,
    uncoordinated_ccdf,
    unconditional_ccdf,
)
from .errors import NumericalError, ParameterError
from .geometry import NetworkRealization, Point2, PppConfig, SimWindow, cell_area, count_in_cell, sample_network
from .rate import RateBreakdown, RateParams, average_rate, max_beneficial_distance, optimize_subchannels
from .scheduling import Mode, ScheduleConfig, SubchannelAssignment, cochannel_interferers, schedule
from .sir import EmpiricalCcdf, compute_sir, run_cellular_batch, run_d2d_batch, simulate_d2d

__version__ = "0.1.0"

__all__ = [
    "AnalyticParams",
    "CellApprox",
    "EmpiricalCcdf",
    "Mode",
    "NetworkRealization",
    "NumericalError",
    "ParameterError",
    "Point2",
    "PppConfig",
    "QuadratureSpec",
    "RateBreakdown",
    "RateParams",
    "ScheduleConfig",
    "SimWindow",
    "SubchannelAssignment",
    "average_rate",
    "cell_area",
    "cellular_ccdf",
    "cochannel_interferers",
    "compute_sir",
    "conditional_ccdf",
    "count_in_cell",
    "interferer_densities",
    "intracell_deficit",
    "intracell_density",
    "kappa",
    "max_beneficial_distance",
    "optimize_subchannels",
    "regularized_upper_gamma",
    "run_cellular_batch",
    "run_d2d_batch",
    "sample_network",
    "schedule",
    "simulate_d2d",
    "uncoordinated_ccdf",
    "unconditional_ccdf",
]
