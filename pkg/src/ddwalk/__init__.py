"""Sublinear-time estimation of single solution coordinates of diagonally
dominant linear systems through a query oracle."""

from .errors import *  # noqa: F401,F403
from .hardgen import (HardInstance, c0, distinguish_experiment, random_regular_expander,
                      sample_mu_n, verify_gap)
from .oracle import Oracle, QueryLedger, ShiftedOracle, shifted_oracle
from .reference import (DenseSolveResult, dense_solve, fj_fixed_point, in_range, kappa_inf,
                        pseudo_solve_symmetric)
from .solver import (EstimateReport, WalkSample, estimate_entry, estimate_entry_boosted,
                     estimate_entry_nonstrict, estimate_entry_relative, estimate_fj_opinion,
                     recursive_sample, sample_count, truncated_sample)
from .system import (SparseDDSystem, fj_system, from_triplets, is_delta_dd, max_delta, s_max,
                     weighted_max_degree)

__version__ = "0.1.0"
