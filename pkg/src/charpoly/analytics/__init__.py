"""Exact oracles, convergence diagnostics and the statistical test kit."""

from .oracles import (CumulantTable, Group, MomentQuery, abs_third_moment_t,
                      abs_third_moment_w, cumulant, fourier_w, log_moment,
                      lyapunov, mellin_t, moment_factor, moment_so2n,
                      moment_unitary, variance_sum)
from .stats import (CheckResult, KSResult, MomentEstimate, empirical_moment,
                    ks_2samp, ks_statistic)
