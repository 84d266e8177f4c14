"""
Base abstraction for exact ground-state backends.

Every backend implements the same interface so the solver manager can pick
one by domain, fall back to the next, or cross-check several against each
other.
"""

import logging
import time
from abc import ABC, abstractmethod
from datetime import datetime
from typing import Any, Dict, Optional

from core.ising import CouplingConfig, SpinState
from core.lattice import Lattice
from core.models import GroundStateResult

logger = logging.getLogger(__name__)


class SolverError(Exception):
    """Base exception for solver errors."""
    pass


class CapacityExceededError(SolverError):
    """Raised when an instance is above a backend's size cap."""
    pass


class UnsupportedTopologyError(SolverError):
    """Raised when a backend cannot handle the lattice's kind or boundary."""
    pass


class BackendDisagreementError(SolverError):
    """Raised when two backends return different answers on the same instance."""
    pass


class BaseGroundStateSolver(ABC):
    """
    Abstract base class for all ground-state backends.

    Subclasses implement ``check_domain`` and ``_solve``; ``solve`` wraps them
    with timing, invariant checks and usage statistics.
    """

    name: str = "base"
    can_collect_states: bool = True

    def __init__(self, priority: int = 1):
        """
        Initialize base solver.

        Args:
            priority: Selection priority (1 = tried first)
        """
        self.priority = priority

        # Usage tracking
        self.request_count = 0
        self.success_count = 0
        self.error_count = 0
        self.last_error: Optional[str] = None
        self.last_success_time: Optional[datetime] = None

        logger.debug(f"Initialized {self.name} solver (priority={priority})")

    @abstractmethod
    def check_domain(self, lattice: Lattice, collect_states: bool = False) -> None:
        """
        Raise if this backend cannot solve the lattice.

        Raises:
            CapacityExceededError: Instance above the size cap
            UnsupportedTopologyError: Kind/boundary/width outside the domain
        """
        pass

    @abstractmethod
    def _solve(
        self, lattice: Lattice, couplings: CouplingConfig, collect_states: bool
    ) -> GroundStateResult:
        pass

    def supports(self, lattice: Lattice, collect_states: bool = False) -> bool:
        try:
            self.check_domain(lattice, collect_states)
        except SolverError:
            return False
        return True

    def solve(
        self, lattice: Lattice, couplings: CouplingConfig, collect_states: bool = False
    ) -> GroundStateResult:
        """
        Compute the exact ground-state energy and degeneracy.

        Args:
            lattice: Lattice to solve
            couplings: Coupling configuration on the lattice
            collect_states: Also return every ground state

        Returns:
            GroundStateResult with backend name and elapsed time
        """
        self.request_count += 1
        if couplings.bonds != lattice.bonds:
            raise ValueError("Coupling configuration is not defined on this lattice's bonds")
        if collect_states and not self.can_collect_states:
            raise UnsupportedTopologyError(f"{self.name} does not produce explicit states")

        try:
            self.check_domain(lattice, collect_states)
            start = time.perf_counter()
            result = self._solve(lattice, couplings, collect_states)
            result.elapsed_ms = round((time.perf_counter() - start) * 1000.0, 3)
        except SolverError as e:
            self.record_error(e)
            raise

        check_result(lattice, result)
        self.record_success()
        logger.debug(
            f"{self.name}: energy={result.energy} degeneracy={result.degeneracy} "
            f"({result.elapsed_ms} ms) on {lattice.describe()}"
        )
        return result

    def record_success(self) -> None:
        self.success_count += 1
        self.last_success_time = datetime.now()

    def record_error(self, error: Exception) -> None:
        self.error_count += 1
        self.last_error = str(error)
        logger.debug(f"{self.name}: error recorded - {str(error)[:100]}")

    def get_stats(self) -> Dict[str, Any]:
        return {
            "name": self.name,
            "priority": self.priority,
            "request_count": self.request_count,
            "success_count": self.success_count,
            "error_count": self.error_count,
            "last_error": self.last_error,
        }

    def __repr__(self) -> str:
        return f"{self.__class__.__name__}(priority={self.priority})"


def check_result(lattice: Lattice, result: GroundStateResult) -> None:
    """Invariants every backend must satisfy (global flip, energy parity)."""
    if result.degeneracy < 2 or result.degeneracy % 2:
        raise SolverError(f"Degeneracy {result.degeneracy} violates global-flip symmetry")
    if result.energy < -lattice.n_bonds or (result.energy + lattice.n_bonds) % 2:
        raise SolverError(f"Energy {result.energy} is not of the form 2u - {lattice.n_bonds}")
    if result.states is not None and len(result.states) != result.degeneracy:
        raise SolverError(
            f"Collected {len(result.states)} states but degeneracy is {result.degeneracy}"
        )


def states_from_bits(lattice: Lattice, rows) -> list:
    """Turn an iterable of per-site bit arrays (grid indexed) into SpinStates."""
    return [SpinState(lattice.sites, row) for row in rows]
