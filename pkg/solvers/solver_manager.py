"""
Ground-state solver manager with backend selection and fallback.

Picks a backend by domain (exhaustive for small lattices, transfer matrix for
strips, branch and bound otherwise), falls back to the next applicable one on
capacity or topology errors, and optionally cross-checks every applicable
backend against each other.
"""

import logging
from typing import Any, Dict, List, Optional

from core.config import get_settings
from core.ising import CouplingConfig
from core.lattice import Lattice
from core.models import GroundStateResult
from solvers.base import (
    BackendDisagreementError,
    BaseGroundStateSolver,
    CapacityExceededError,
    SolverError,
    UnsupportedTopologyError,
)
from solvers.branch_and_bound import BranchAndBoundSolver
from solvers.exhaustive import ExhaustiveSolver
from solvers.transfer_matrix import TransferMatrixSolver

logger = logging.getLogger(__name__)

AUTO = "auto"


class SolverManager:
    """
    Manages the exact ground-state backends.

    Tries backends in preference order until one succeeds. Includes:
    - Domain-based selection ("auto")
    - Fallback on capacity and topology errors
    - Self-check mode that runs every applicable backend and compares
    """

    def __init__(
        self,
        solvers: Optional[List[BaseGroundStateSolver]] = None,
        enable_fallback: bool = True,
        self_check: bool = False,
        workers: Optional[int] = None,
    ):
        """
        Initialize solver manager.

        Args:
            solvers: Backend instances (defaults to all three)
            enable_fallback: Whether to try the next backend on domain errors
            self_check: Run every applicable backend and require agreement
            workers: Worker processes for the default backends (defaults to settings.threads)
        """
        if solvers is None:
            solvers = [ExhaustiveSolver(workers=workers), TransferMatrixSolver(), BranchAndBoundSolver(workers=workers)]
        self.solvers = sorted(solvers, key=lambda s: s.priority)
        self.enable_fallback = enable_fallback
        self.self_check = self_check
        self.auto_exhaustive_max_sites = get_settings().auto_exhaustive_max_sites

        # Stats
        self.total_requests = 0
        self.fallback_count = 0
        self.self_checks = 0

        logger.debug(
            f"SolverManager initialized with {[s.name for s in self.solvers]} "
            f"(fallback={enable_fallback}, self_check={self_check})"
        )

    def get_solver(self, name: str) -> Optional[BaseGroundStateSolver]:
        for solver in self.solvers:
            if solver.name == name:
                return solver
        return None

    @property
    def backend_names(self) -> List[str]:
        return [s.name for s in self.solvers]

    def candidates(self, lattice: Lattice, collect_states: bool = False) -> List[BaseGroundStateSolver]:
        """Applicable backends, preferred one first."""
        usable = [
            s for s in self.solvers
            if s.supports(lattice, collect_states) and (s.can_collect_states or not collect_states)
        ]

        def rank(solver: BaseGroundStateSolver) -> tuple:
            if solver.name == "exhaustive" and lattice.n_sites <= self.auto_exhaustive_max_sites:
                return (0, solver.priority)
            if solver.name == "transfer_matrix":
                return (1, solver.priority)
            return (2, solver.priority)

        return sorted(usable, key=rank)

    def _no_backend_error(self, lattice: Lattice, collect_states: bool) -> SolverError:
        reasons = []
        capacity = False
        for solver in self.solvers:
            try:
                solver.check_domain(lattice, collect_states)
                if collect_states and not solver.can_collect_states:
                    reasons.append(f"{solver.name}: does not produce explicit states")
            except CapacityExceededError as e:
                capacity = True
                reasons.append(f"{solver.name}: {e}")
            except SolverError as e:
                reasons.append(f"{solver.name}: {e}")
        message = f"No backend can solve {lattice.describe()}: " + "; ".join(reasons)
        return CapacityExceededError(message) if capacity else UnsupportedTopologyError(message)

    def solve(
        self,
        lattice: Lattice,
        couplings: CouplingConfig,
        collect_states: bool = False,
        backend: str = AUTO,
    ) -> GroundStateResult:
        """
        Solve with the named backend, or pick one when ``backend`` is "auto".

        Raises:
            CapacityExceededError: No backend fits the instance
            UnsupportedTopologyError: No backend handles the topology
            BackendDisagreementError: Self-check found two different answers
        """
        self.total_requests += 1

        if backend != AUTO:
            solver = self.get_solver(backend)
            if solver is None:
                raise ValueError(f"Unknown backend '{backend}' (choose from {', '.join(self.backend_names)})")
            return solver.solve(lattice, couplings, collect_states)

        candidates = self.candidates(lattice, collect_states)
        if not candidates:
            raise self._no_backend_error(lattice, collect_states)

        if self.self_check:
            return self._solve_checked(lattice, couplings, collect_states, candidates)

        errors = []
        for position, solver in enumerate(candidates):
            try:
                logger.debug(f"Trying backend: {solver.name}")
                result = solver.solve(lattice, couplings, collect_states)
                if position > 0:
                    self.fallback_count += 1
                    logger.info(f"Fell back to {solver.name} for {lattice.describe()}")
                return result
            except (CapacityExceededError, UnsupportedTopologyError) as e:
                errors.append(e)
                logger.warning(f"Backend {solver.name} failed: {e.__class__.__name__} - {str(e)[:100]}")
                if not self.enable_fallback:
                    raise
                continue

        raise errors[-1]

    def _solve_checked(
        self,
        lattice: Lattice,
        couplings: CouplingConfig,
        collect_states: bool,
        candidates: List[BaseGroundStateSolver],
    ) -> GroundStateResult:
        self.self_checks += 1
        results = []
        for solver in candidates:
            results.append(solver.solve(lattice, couplings, collect_states and solver.can_collect_states))

        reference = results[0]
        for other in results[1:]:
            if (other.energy, other.degeneracy) != (reference.energy, reference.degeneracy):
                raise BackendDisagreementError(
                    f"{reference.backend} gives (E={reference.energy}, D={reference.degeneracy}) but "
                    f"{other.backend} gives (E={other.energy}, D={other.degeneracy}) on {lattice.describe()}"
                )
            if reference.states is not None and other.states is not None:
                if set(reference.states) != set(other.states):
                    raise BackendDisagreementError(
                        f"{reference.backend} and {other.backend} return different ground-state sets"
                    )
        logger.info(
            f"Self-check passed across {[r.backend for r in results]}: "
            f"E={reference.energy}, D={reference.degeneracy}"
        )
        return reference

    def get_manager_stats(self) -> Dict[str, Any]:
        return {
            "total_requests": self.total_requests,
            "fallback_count": self.fallback_count,
            "self_checks": self.self_checks,
            "solver_stats": {s.name: s.get_stats() for s in self.solvers},
        }

    def __repr__(self) -> str:
        names = ", ".join(self.backend_names)
        return f"SolverManager(solvers=[{names}], fallback={self.enable_fallback}, self_check={self.self_check})"


# Global manager instance
_solver_manager = None


def get_solver_manager() -> SolverManager:
    """
    Get singleton solver manager instance.

    Returns:
        SolverManager instance
    """
    global _solver_manager
    if _solver_manager is None:
        _solver_manager = SolverManager()
    return _solver_manager


def reset_solver_manager():
    """Reset the global solver manager (for testing, or after settings change)."""
    global _solver_manager
    _solver_manager = None
    logger.debug("Solver manager reset")


def solve_ground_state(
    lattice: Lattice,
    couplings: CouplingConfig,
    collect_states: bool = False,
    backend: str = AUTO,
) -> GroundStateResult:
    """Solve through the shared manager."""
    return get_solver_manager().solve(lattice, couplings, collect_states, backend)
