"""Periodic potentials of the Landau Hamiltonian with an eigenvalue ``(2m+1)B``."""
from .cmatrix import CMatrixBundle, build_c_matrix, make_bundle
from .family_solver import FamilySolution, iterate_family, leading_terms, residual_check
from .landau_rep import (ChannelState, b_chain_apply, build_eigenfunction, fiber_matrix,
                         flat_band_scan, ladder_apply, mul_matrix, multiply_state)
from .pendulum import amplitude_bounds, period_integral, solve_ode
from .periodic_fn import PeriodicFn
from .potential_chain import PotentialChain, build_chain, cross_check_systems, verify_conditions

__version__ = "0.1.0"

__all__ = [
    "CMatrixBundle", "ChannelState", "FamilySolution", "PeriodicFn", "PotentialChain",
    "amplitude_bounds", "b_chain_apply", "build_c_matrix", "build_chain", "build_eigenfunction",
    "cross_check_systems", "fiber_matrix", "flat_band_scan", "iterate_family", "ladder_apply",
    "leading_terms", "make_bundle", "mul_matrix", "multiply_state", "period_integral",
    "residual_check", "solve_ode", "verify_conditions",
]
