"""Characteristic polynomials of Haar unitary and SO(2n) matrices, sampled in O(n)."""

__version__ = "0.1.0"

from .analytics.oracles import (CumulantTable, Group, MomentQuery, cumulant, fourier_w,
                                lyapunov, mellin_t, moment_factor, moment_so2n,
                                moment_unitary, variance_sum)
from .distributions import WjParams, sample_beta, sample_gamma, sample_w, w_density
from .rng import RngStream
from .samplers import (LogCharPoly, SampleBatch, Trajectory, sample_joint,
                       sample_so2n_log_charpoly, sample_trajectory,
                       sample_unitary_log_charpoly)

__all__ = [
    "CumulantTable", "Group", "LogCharPoly", "MomentQuery", "RngStream", "SampleBatch",
    "Trajectory", "WjParams", "cumulant", "fourier_w", "lyapunov", "mellin_t",
    "moment_factor", "moment_so2n", "moment_unitary", "sample_beta", "sample_gamma",
    "sample_joint", "sample_so2n_log_charpoly", "sample_trajectory",
    "sample_unitary_log_charpoly", "sample_w", "variance_sum", "w_density",
]
