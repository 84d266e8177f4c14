"""
Transfer-matrix ground-state counting for strips.

Sites are swept in column-major order, one site at a time. The dynamic
programme keeps, for every assignment of the last K swept sites (K is the
longest bond reach along the sweep, rows + 1 for triangular strips), the
minimum number of unhappy bonds so far and how many partial states reach it.

Toroidal strips are handled by fixing the spins of the first column (the
seam), running one sweep per seam assignment and treating the wrapped bonds
as fields on the last column.
"""

import logging
from dataclasses import dataclass
from typing import Dict, List, Optional, Tuple

import numpy as np

from core.config import get_settings
from core.ising import CouplingConfig
from core.lattice import Lattice, LatticeKind
from core.models import GroundStateResult
from solvers.base import BaseGroundStateSolver, CapacityExceededError, UnsupportedTopologyError

logger = logging.getLogger(__name__)

INF = 1 << 40
# Promote counts to Python ints before they can overflow int64
PROMOTE_AT = 1 << 60


@dataclass
class _SweepPlan:
    window: int  # K
    order: List[int]  # site id per sweep step (absent sites included)
    present: List[bool]
    local: List[List[Tuple[int, int]]]  # per step: (distance, J bit) to earlier sites
    seam_fields: List[List[Tuple[int, int]]]  # per step: (seam site, J bit)
    seam_sites: List[int]


def _plan(lattice: Lattice, couplings: CouplingConfig) -> _SweepPlan:
    rows, cols = lattice.rows, lattice.cols
    order = [lattice.site_id(r, c) for c in range(cols) for r in range(rows)]
    position = {s: t for t, s in enumerate(order)}
    reach = rows + 1

    local: List[List[Tuple[int, int]]] = [[] for _ in order]
    seam_fields: List[List[Tuple[int, int]]] = [[] for _ in order]
    window = 1

    for (i, j), jbit in zip(lattice.bonds, couplings.bits):
        a, b = sorted((position[i], position[j]))
        distance = b - a
        if distance <= reach:
            local[b].append((distance, int(jbit)))
            window = max(window, distance)
            continue
        seam = order[a]
        if lattice.coords(seam)[1] != 0 or not lattice.wraps_cols:
            raise UnsupportedTopologyError(
                f"Bond ({i}, {j}) reaches {distance} sites along the sweep; not a strip"
            )
        seam_fields[b].append((seam, int(jbit)))

    seam_sites = []
    if any(seam_fields):
        seam_sites = [s for s in (lattice.site_id(r, 0) for r in range(rows)) if lattice.has_site(s)]

    return _SweepPlan(
        window=window,
        order=order,
        present=[lattice.has_site(s) for s in order],
        local=local,
        seam_fields=seam_fields,
        seam_sites=seam_sites,
    )


def _sweep(plan: _SweepPlan, fixed: Optional[Dict[int, int]] = None) -> Tuple[int, int]:
    """One pass over the strip; returns (min unhappy count, number of optima)."""
    fixed = fixed or {}
    k = plan.window
    size = 1 << k
    half = size >> 1
    states = np.arange(size, dtype=np.int64)
    window_bits = [(states >> d) & 1 for d in range(k)]

    best = np.full(size, INF, dtype=np.int64)
    best[0] = 0
    counts = np.zeros(size, dtype=np.int64)
    counts[0] = 1

    for step, site in enumerate(plan.order):
        if not plan.present[step]:
            choices = (0,)
        elif site in fixed:
            choices = (fixed[site],)
        else:
            choices = (0, 1)

        new_best = np.full(size, INF, dtype=np.int64)
        new_counts = np.zeros(size, dtype=counts.dtype)
        for x in choices:
            cost = np.zeros(size, dtype=np.int64)
            for distance, jbit in plan.local[step]:
                cost += window_bits[distance - 1] ^ (x ^ jbit)
            field = sum((x ^ jbit ^ fixed[seam]) for seam, jbit in plan.seam_fields[step])

            cand = (best + cost + field).reshape(2, half)
            cand_counts = counts.reshape(2, half)
            low = cand.min(axis=0)
            hit = cand == low
            merged = (cand_counts * hit).sum(axis=0)
            valid = low < INF
            # next window: shift left, new spin in bit 0
            new_best[x::2] = np.where(valid, low, INF)
            new_counts[x::2] = np.where(valid, merged, 0)

        best, counts = new_best, new_counts
        if counts.dtype != object and counts.max() > PROMOTE_AT:
            counts = counts.astype(object)

    low = int(best.min())
    return low, int(counts[best == low].sum())


class TransferMatrixSolver(BaseGroundStateSolver):
    """Column-by-column dynamic programming; counts only, no explicit states."""

    name = "transfer_matrix"
    can_collect_states = False

    def __init__(self, max_width: Optional[int] = None, priority: int = 2):
        super().__init__(priority=priority)
        self.max_width = max_width or get_settings().transfer_max_width

    def check_domain(self, lattice: Lattice, collect_states: bool = False) -> None:
        if lattice.kind == LatticeKind.GENERAL:
            raise UnsupportedTopologyError("Transfer matrix needs a square, triangular or hexagonal strip")
        if lattice.rows > self.max_width:
            raise CapacityExceededError(
                f"Strip width {lattice.rows} exceeds the transfer-matrix cap of {self.max_width}"
            )

    def _solve(
        self, lattice: Lattice, couplings: CouplingConfig, collect_states: bool
    ) -> GroundStateResult:
        plan = _plan(lattice, couplings)
        logger.debug(f"transfer matrix: window {plan.window}, {len(plan.seam_sites)} seam spins")

        if not plan.seam_sites:
            unhappy, count = _sweep(plan)
        else:
            # pin the first seam spin (global flip), loop over the rest
            free = plan.seam_sites[1:]
            unhappy, count = INF, 0
            for code in range(1 << len(free)):
                fixed = {plan.seam_sites[0]: 0}
                fixed.update({s: (code >> q) & 1 for q, s in enumerate(free)})
                u, c = _sweep(plan, fixed)
                if u < unhappy:
                    unhappy, count = u, c
                elif u == unhappy:
                    count += c
            count *= 2

        return GroundStateResult(
            energy=2 * unhappy - lattice.n_bonds,
            degeneracy=count,
            backend=self.name,
        )


def transfer_matrix_count(lattice: Lattice, couplings: CouplingConfig) -> GroundStateResult:
    """Convenience wrapper around ``TransferMatrixSolver``."""
    return TransferMatrixSolver().solve(lattice, couplings)
