"""
Depth-first branch and bound with exact optimum counting.

Sites are assigned in breadth-first order from the smallest present site,
which is pinned to +1 (the count is doubled afterwards). The bound at depth t
is

    decided unhappy bonds
    + sum over undecided sites of min(unhappy bonds to decided neighbours)
    + number of frustrated plaquettes, from a fixed bond-disjoint packing,
      whose sites are all still undecided

Every frustrated plaquette carries at least one unhappy bond, and the three
terms count disjoint bond sets, so the bound is admissible. Only branches
strictly worse than the incumbent are cut, so every optimum is reached.
"""

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import networkx as nx
import numpy as np

from core.config import get_settings
from core.ising import CouplingConfig
from core.lattice import Lattice
from core.models import GroundStateResult
from solvers.base import BaseGroundStateSolver, CapacityExceededError, states_from_bits

logger = logging.getLogger(__name__)

INF = 1 << 40


@dataclass
class _Outcome:
    best: int
    count: int
    hits: List[Tuple[int, ...]]
    nodes: int


class _Search:
    """Static search data: site order, neighbour tables and plaquette bonus."""

    def __init__(self, lattice: Lattice, couplings: CouplingConfig):
        graph = lattice.to_networkx()
        root = lattice.sites[0]
        self.order = [root] + [v for _, v in nx.bfs_edges(graph, root, sort_neighbors=sorted)]
        self.n = len(self.order)
        position = {s: t for t, s in enumerate(self.order)}

        self.neighbors: List[List[Tuple[int, int]]] = [[] for _ in range(self.n)]
        for (i, j), jbit in zip(lattice.bonds, couplings.bits):
            a, b = position[i], position[j]
            self.neighbors[a].append((b, int(jbit)))
            self.neighbors[b].append((a, int(jbit)))

        # greedy bond-disjoint packing, latest-decided plaquettes first
        used = set()
        frustrated_start: List[int] = []
        ranked = sorted(lattice.plaquettes, key=lambda p: -min(position[s] for s in p.sites))
        for p in ranked:
            if used.intersection(p.bonds):
                continue
            used.update(p.bonds)
            parity = sum(int(couplings.bits[lattice.bond_id(*b)]) for b in p.bonds) % 2
            if parity:
                frustrated_start.append(min(position[s] for s in p.sites))

        self.bonus = [0] * (self.n + 1)
        for start in frustrated_start:
            for t in range(start + 1):
                self.bonus[t] += 1

    def run(self, prefix: Sequence[int], collect: bool, cap: int) -> _Outcome:
        """Search with positions 1..len(prefix) fixed to ``prefix``."""
        n = self.n
        neighbors = self.neighbors
        bonus = self.bonus
        bits = [0] * n
        cost0 = [0] * n
        cost1 = [0] * n
        fixed = {t + 1: b for t, b in enumerate(prefix)}

        best = INF
        count = 0
        nodes = 0
        site_term = 0
        hits: List[Tuple[int, ...]] = []

        def place(t: int, x: int, sign: int) -> None:
            nonlocal site_term
            for v, jbit in neighbors[t]:
                if v > t:
                    before = min(cost0[v], cost1[v])
                    cost0[v] += sign * (x ^ jbit)
                    cost1[v] += sign * (1 ^ x ^ jbit)
                    site_term += min(cost0[v], cost1[v]) - before

        def descend(t: int, unhappy: int) -> None:
            nonlocal best, count, nodes, site_term
            nodes += 1
            if t == n:
                if unhappy > best:
                    return
                if unhappy < best:
                    best, count = unhappy, 0
                    hits.clear()
                count += 1
                if collect:
                    if count > cap:
                        raise CapacityExceededError(
                            f"More than {cap} ground states; raise max_collected_states or disable collection"
                        )
                    hits.append(tuple(bits))
                return

            if unhappy + site_term + bonus[t] > best:
                return

            if t == 0:
                choices = (0,)
            elif t in fixed:
                choices = (fixed[t],)
            else:
                choices = (0, 1) if cost0[t] <= cost1[t] else (1, 0)

            own = min(cost0[t], cost1[t])
            site_term -= own
            for x in choices:
                gain = cost1[t] if x else cost0[t]
                bits[t] = x
                place(t, x, 1)
                descend(t + 1, unhappy + gain)
                place(t, x, -1)
            bits[t] = 0
            site_term += own

        descend(0, 0)
        return _Outcome(best=best, count=count, hits=hits, nodes=nodes)


def _run_prefix(search: _Search, prefix: Tuple[int, ...], collect: bool, cap: int) -> _Outcome:
    return search.run(prefix, collect, cap)


def _merge(parts: List[_Outcome]) -> _Outcome:
    best = min(p.best for p in parts)
    winners = [p for p in parts if p.best == best]
    return _Outcome(
        best=best,
        count=sum(p.count for p in winners),
        hits=[h for p in winners for h in p.hits],
        nodes=sum(p.nodes for p in parts),
    )


class BranchAndBoundSolver(BaseGroundStateSolver):
    """Exact search for irregular or mid-sized lattices (up to 64 sites)."""

    name = "branch_and_bound"

    def __init__(self, max_sites: Optional[int] = None, workers: Optional[int] = None, priority: int = 3):
        settings = get_settings()
        super().__init__(priority=priority)
        self.max_sites = max_sites or settings.branch_and_bound_max_sites
        self.workers = workers or settings.threads
        self.max_collected_states = settings.max_collected_states

    def check_domain(self, lattice: Lattice, collect_states: bool = False) -> None:
        if lattice.n_sites > self.max_sites:
            raise CapacityExceededError(
                f"Branch and bound is capped at {self.max_sites} sites (lattice has {lattice.n_sites})"
            )

    def _solve(
        self, lattice: Lattice, couplings: CouplingConfig, collect_states: bool
    ) -> GroundStateResult:
        search = _Search(lattice, couplings)
        cap = self.max_collected_states

        depth = 0
        if self.workers > 1:
            depth = min(search.n - 1, math.ceil(math.log2(4 * self.workers)))

        if depth > 0:
            prefixes = [tuple((code >> q) & 1 for q in range(depth)) for code in range(1 << depth)]
            with ProcessPoolExecutor(max_workers=self.workers) as pool:
                futures = [pool.submit(_run_prefix, search, pfx, collect_states, cap) for pfx in prefixes]
                outcome = _merge([f.result() for f in futures])
        else:
            outcome = search.run((), collect_states, cap)

        logger.debug(f"branch and bound: {outcome.nodes} nodes, {outcome.count} gauge-fixed optima")

        states = None
        if collect_states:
            rows = []
            for hit in sorted(outcome.hits):
                grid = np.zeros(lattice.n_grid_sites, dtype=np.uint8)
                grid[search.order] = hit
                rows.append(grid)
            rows += [r ^ 1 for r in rows]
            states = states_from_bits(lattice, rows)

        return GroundStateResult(
            energy=2 * outcome.best - lattice.n_bonds,
            degeneracy=2 * outcome.count,
            backend=self.name,
            states=states,
        )


def branch_and_bound_enumerate(
    lattice: Lattice, couplings: CouplingConfig, collect_states: bool = False
) -> GroundStateResult:
    """Convenience wrapper around ``BranchAndBoundSolver``."""
    return BranchAndBoundSolver().solve(lattice, couplings, collect_states)
