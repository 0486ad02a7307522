"""Certify, refute and map uniqueness of nonnegative and PSD solutions of underdetermined systems."""

from .errors import (ContractError, DegenerateGraph, EmptyNullSpace, EnumerationTooLarge,
                     NumericalError)
from .ensembles import Seed, bernoulli01, gaussian_matrix, gaussian_sym_operator, random_bipartite
from .sdp import SymOperator, solve_sdp
from .lp import LinearProgram, solve_lp, check_feasible
from .vector import (mplus_membership, probe_singleton, exact_singleton, l1_recover,
                     null_space_support_property, neighborliness_check, all_supports_singleton,
                     min_rows_bound, wendel_probability, rip_constant_brute)
from .expander import degree_profile, verify_expansion, uniqueness_threshold, expander_report
from .psd import (apply_operator, operator_null_basis, probe_singleton_psd, exact_singleton_psd,
                  eig_condition_sample, construct_second_solution, semicircle_alpha, semicircle_c)

__version__ = "0.1.0"
