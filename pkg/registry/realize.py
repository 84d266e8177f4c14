"""
Coupling configurations with a prescribed frustration pattern.

The fast path peels the specified plaquettes: repeatedly remove one that owns
a bond no other remaining plaquette uses. Read backwards, the removals give an
order in which every plaquette has a bond outside all earlier ones, so the
plaquettes can be satisfied one at a time by flipping that bond. When no such
order exists the constraints are solved by elimination over GF(2) instead.
"""

import logging
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from core.ising import CouplingConfig, Frustration, FrustrationPattern, plaquette_bond_ids, plaquette_frustration
from core.lattice import Lattice
from registry.specs import ModuleSpec, ModuleSpecError

logger = logging.getLogger(__name__)


class DegreeOfFreedomError(ModuleSpecError):
    """Raised when the specified plaquettes admit no private-bond ordering."""
    pass


class InfeasibleConstraintsError(ModuleSpecError):
    """Raised when the frustration constraints contradict each other."""

    def __init__(self, message: str, plaquettes: Sequence[int] = ()):
        super().__init__(message)
        # plaquette ids whose constraints combine to 0 = 1
        self.plaquettes = tuple(plaquettes)


def degree_of_freedom_order(lattice: Lattice, plaquette_ids: Sequence[int]) -> List[Tuple[int, int]]:
    """
    Order the plaquettes so each owns a bond absent from all earlier ones.

    Returns:
        List of (plaquette id, private bond index) in forward order

    Raises:
        DegreeOfFreedomError: If the peeling gets stuck
    """
    bonds_of = plaquette_bond_ids(lattice)
    remaining = {pid: set(bonds_of[pid]) for pid in plaquette_ids}
    usage: Dict[int, int] = {}
    for bonds in remaining.values():
        for b in bonds:
            usage[b] = usage.get(b, 0) + 1

    removed: List[Tuple[int, int]] = []
    while remaining:
        for pid in sorted(remaining):
            private = sorted(b for b in remaining[pid] if usage[b] == 1)
            if private:
                break
        else:
            raise DegreeOfFreedomError(
                f"No private bond among plaquettes {sorted(remaining)[:8]}"
                f"{'...' if len(remaining) > 8 else ''}"
            )
        removed.append((pid, private[0]))
        for b in remaining.pop(pid):
            usage[b] -= 1

    return removed[::-1]


def _required(pattern: FrustrationPattern) -> Dict[int, int]:
    return {pid: 1 if v == Frustration.FRUSTRATED else 0 for pid, v in pattern.items() if v != Frustration.UNSPECIFIED}


def solve_gf2(lattice: Lattice, pattern: FrustrationPattern, base: np.ndarray) -> np.ndarray:
    """
    Adjust ``base`` so every specified plaquette gets its required parity.

    Rows are bit-packed integers (bit k = bond k, top bit = right-hand side);
    free variables keep their value from ``base``.

    Raises:
        InfeasibleConstraintsError: With the plaquettes of a contradictory combination
    """
    required = _required(pattern)
    bonds_of = plaquette_bond_ids(lattice)
    n = lattice.n_bonds
    rhs_bit = 1 << n

    rows: List[int] = []
    origins: List[int] = []  # which plaquettes were combined into each row
    for index, (pid, parity) in enumerate(sorted(required.items())):
        row = 0
        current = 0
        for b in bonds_of[pid]:
            row |= 1 << b
            current ^= int(base[b])
        # solve for the correction vector: sum(x) = parity ^ current
        if parity ^ current:
            row |= rhs_bit
        rows.append(row)
        origins.append(1 << index)

    pids = [pid for pid, _ in sorted(required.items())]
    pivots: List[Tuple[int, int]] = []
    rank = 0
    for col in range(n):
        pivot = next((i for i in range(rank, len(rows)) if rows[i] >> col & 1), None)
        if pivot is None:
            continue
        rows[rank], rows[pivot] = rows[pivot], rows[rank]
        origins[rank], origins[pivot] = origins[pivot], origins[rank]
        for i in range(len(rows)):
            if i != rank and rows[i] >> col & 1:
                rows[i] ^= rows[rank]
                origins[i] ^= origins[rank]
        pivots.append((rank, col))
        rank += 1

    for i in range(rank, len(rows)):
        if rows[i] & rhs_bit:
            culprits = [pids[k] for k in range(len(pids)) if origins[i] >> k & 1]
            raise InfeasibleConstraintsError(
                f"Frustration constraints on plaquettes {culprits} cannot hold together",
                plaquettes=culprits,
            )

    correction = np.zeros(n, dtype=np.uint8)
    for r, col in pivots:
        correction[col] = (rows[r] >> n) & 1
    return base ^ correction


def realize_pattern(
    lattice: Lattice,
    pattern: FrustrationPattern,
    rng: Optional[np.random.Generator] = None,
) -> CouplingConfig:
    """
    A coupling configuration on ``lattice`` meeting every specified constraint.

    Free bonds start random when ``rng`` is given and +1 otherwise.

    Raises:
        InfeasibleConstraintsError: If the constraints contradict each other
    """
    if rng is None:
        bits = np.zeros(lattice.n_bonds, dtype=np.uint8)
    else:
        bits = rng.integers(0, 2, size=lattice.n_bonds, dtype=np.uint8)

    required = _required(pattern)
    bonds_of = plaquette_bond_ids(lattice)
    try:
        order = degree_of_freedom_order(lattice, list(required))
    except DegreeOfFreedomError as e:
        logger.debug(f"Peeling failed ({e}); solving over GF(2)")
        bits = solve_gf2(lattice, pattern, bits)
    else:
        for pid, private in order:
            parity = int(bits[list(bonds_of[pid])].sum()) % 2
            if parity != required[pid]:
                bits[private] ^= 1

    couplings = CouplingConfig(lattice.bonds, bits)
    check_pattern(lattice, couplings, pattern)
    return couplings


def check_pattern(lattice: Lattice, couplings: CouplingConfig, pattern: FrustrationPattern) -> None:
    """Raise if ``couplings`` violates a specified constraint."""
    actual = plaquette_frustration(lattice, couplings)
    wrong = [pid for pid, v in pattern.items() if v != Frustration.UNSPECIFIED and actual[pid] != v]
    if wrong:
        raise ModuleSpecError(f"Realized couplings violate constraints on plaquettes {wrong}")


def realize_coupling(spec: ModuleSpec, seed=None, randomize: bool = True) -> CouplingConfig:
    """
    Draw a coupling configuration on the spec's block meeting its pattern.

    Args:
        spec: Module specification
        seed: Anything ``numpy.random.default_rng`` accepts
        randomize: Start free bonds at random (else all +1)

    Returns:
        CouplingConfig on ``spec.block_lattice``
    """
    rng = np.random.default_rng(seed) if randomize else None
    return realize_pattern(spec.block_lattice, spec.pattern, rng)
