"""
Exact ground-state backends with a common interface.

This package provides exhaustive enumeration, a transfer matrix for strips
and branch and bound, selected and cross-checked through SolverManager.
"""

from solvers.base import (
    BackendDisagreementError,
    BaseGroundStateSolver,
    CapacityExceededError,
    SolverError,
    UnsupportedTopologyError,
)
from solvers.branch_and_bound import BranchAndBoundSolver, branch_and_bound_enumerate
from solvers.exhaustive import ExhaustiveSolver, enumerate_exhaustive
from solvers.solver_manager import SolverManager, get_solver_manager, solve_ground_state
from solvers.transfer_matrix import TransferMatrixSolver, transfer_matrix_count
from solvers.utils import group_by_exterior

__all__ = [
    "BackendDisagreementError",
    "BaseGroundStateSolver",
    "CapacityExceededError",
    "SolverError",
    "UnsupportedTopologyError",
    "BranchAndBoundSolver",
    "ExhaustiveSolver",
    "TransferMatrixSolver",
    "SolverManager",
    "branch_and_bound_enumerate",
    "enumerate_exhaustive",
    "transfer_matrix_count",
    "get_solver_manager",
    "solve_ground_state",
    "group_by_exterior",
]
