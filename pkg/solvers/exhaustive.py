"""
Exhaustive ground-state enumeration.

The first present site is pinned to +1 (global-flip gauge) and the remaining
spins are split in two halves. The low half (up to ``exhaustive_chunk_bits``
spins) is evaluated for all 2^k assignments at once with numpy; the high half
is walked in Gray-code order, so each step flips one spin and updates the
high-half energy and the cross-bond coefficients incrementally.
"""

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np

from core.config import get_settings
from core.ising import CouplingConfig
from core.lattice import Lattice
from core.models import GroundStateResult
from solvers.base import BaseGroundStateSolver, CapacityExceededError, states_from_bits

logger = logging.getLogger(__name__)

# Target number of (low state, prefix) cells evaluated per numpy block
BLOCK_CELLS = 1 << 21


def to_gray_code(x: int) -> int:
    """Convert a counter index to its corresponding Gray code."""
    return (x >> 1) ^ x


@dataclass
class _ScanPlan:
    """Precompiled bond tables; picklable so ranges can run in worker processes."""

    low_sites: List[int]
    high_sites: List[int]
    gauge_site: int
    low_matrix: np.ndarray  # (2^k, k) bits of every low assignment, float64
    low_unhappy: np.ndarray  # (2^k,) unhappy count among gauge/low bonds
    high_bonds: List[Tuple[int, int, int]]  # (high pos or -1 for gauge, high pos, J bit)
    cross_bonds: List[Tuple[int, int, int]]  # (low pos, high pos, J bit)
    high_adj: List[List[int]] = field(default_factory=list)
    cross_adj: List[List[int]] = field(default_factory=list)

    @property
    def n_high(self) -> int:
        return len(self.high_sites)


@dataclass
class _ScanResult:
    best: Optional[int]  # minimum unhappy count seen
    count: int
    hits: List[Tuple[int, int]]  # (low assignment, high Gray code) of optima


def _compile(lattice: Lattice, couplings: CouplingConfig, chunk_bits: int) -> _ScanPlan:
    sites = list(lattice.sites)
    gauge = sites[0]
    free = sites[1:]
    k = min(chunk_bits, len(free))
    low_sites, high_sites = free[:k], free[k:]
    low_pos = {s: i for i, s in enumerate(low_sites)}
    high_pos = {s: i for i, s in enumerate(high_sites)}

    codes = np.arange(1 << k, dtype=np.int64)
    low_bits = ((codes[:, None] >> np.arange(k, dtype=np.int64)) & 1).astype(np.int64)
    low_unhappy = np.zeros(1 << k, dtype=np.int64)

    high_bonds: List[Tuple[int, int, int]] = []
    cross_bonds: List[Tuple[int, int, int]] = []

    def low_column(site: int) -> np.ndarray:
        if site == gauge:
            return np.zeros(1 << k, dtype=np.int64)
        return low_bits[:, low_pos[site]]

    for (i, j), jbit in zip(lattice.bonds, couplings.bits):
        jbit = int(jbit)
        i_high, j_high = i in high_pos, j in high_pos
        if not i_high and not j_high:
            low_unhappy += low_column(i) ^ low_column(j) ^ jbit
        elif i_high and j_high:
            high_bonds.append((high_pos[i], high_pos[j], jbit))
        else:
            h, other = (i, j) if i_high else (j, i)
            if other == gauge:
                high_bonds.append((-1, high_pos[h], jbit))
            else:
                cross_bonds.append((low_pos[other], high_pos[h], jbit))

    plan = _ScanPlan(
        low_sites=low_sites,
        high_sites=high_sites,
        gauge_site=gauge,
        low_matrix=low_bits.astype(np.float64),
        low_unhappy=low_unhappy,
        high_bonds=high_bonds,
        cross_bonds=cross_bonds,
        high_adj=[[] for _ in high_sites],
        cross_adj=[[] for _ in high_sites],
    )
    for idx, (u, v, _) in enumerate(high_bonds):
        if u >= 0:
            plan.high_adj[u].append(idx)
        plan.high_adj[v].append(idx)
    for idx, (_, v, _) in enumerate(cross_bonds):
        plan.cross_adj[v].append(idx)
    return plan


def _scan_range(plan: _ScanPlan, start: int, stop: int, collect: bool, cap: int) -> _ScanResult:
    """Scan Gray-code prefixes with counter index in [start, stop)."""
    n_low = len(plan.low_sites)
    width = max(1, min(stop - start, BLOCK_CELLS >> n_low))

    code = to_gray_code(start)
    hb = np.array([(code >> q) & 1 for q in range(plan.n_high)], dtype=np.int64)

    def bond_bad(u: int, v: int, jbit: int) -> int:
        return (0 if u < 0 else int(hb[u])) ^ int(hb[v]) ^ jbit

    high_unhappy = sum(bond_bad(u, v, j) for u, v, j in plan.high_bonds)
    t = np.array([int(hb[v]) ^ j for _, v, j in plan.cross_bonds], dtype=np.int64)
    const = int(t.sum())
    delta = np.zeros(n_low, dtype=np.float64)
    for (lp, _, _), tc in zip(plan.cross_bonds, t):
        delta[lp] += 1 - 2 * tc

    best: Optional[int] = None
    count = 0
    hits: List[Tuple[int, int]] = []

    index = start
    while index < stop:
        size = min(width, stop - index)
        block = np.empty((n_low, size), dtype=np.float64)
        offsets = np.empty(size, dtype=np.int64)
        block_codes = np.empty(size, dtype=np.int64)

        for col in range(size):
            if index + col > start:
                # advance one Gray step: flip exactly one high spin
                new_code = to_gray_code(index + col)
                q = (new_code ^ code).bit_length() - 1
                code = new_code
                for b in plan.high_adj[q]:
                    u, v, j = plan.high_bonds[b]
                    high_unhappy += 1 - 2 * bond_bad(u, v, j)
                for c in plan.cross_adj[q]:
                    old = int(t[c])
                    const += 1 - 2 * old
                    delta[plan.cross_bonds[c][0]] += 4 * old - 2
                    t[c] = 1 - old
                hb[q] ^= 1
            block[:, col] = delta
            offsets[col] = high_unhappy + const
            block_codes[col] = code

        unhappy = plan.low_unhappy[:, None] + offsets[None, :]
        if n_low:
            unhappy = unhappy + np.rint(plan.low_matrix @ block).astype(np.int64)

        block_min = int(unhappy.min())
        if best is None or block_min < best:
            best, count, hits = block_min, 0, []
        if block_min == best:
            where = unhappy == best
            count += int(where.sum())
            if collect:
                if count > cap:
                    raise CapacityExceededError(
                        f"More than {cap} ground states; raise max_collected_states or disable collection"
                    )
                for a, col in zip(*np.nonzero(where)):
                    hits.append((int(a), int(block_codes[col])))
        index += size

    return _ScanResult(best=best, count=count, hits=hits)


def _merge(parts: List[_ScanResult]) -> _ScanResult:
    best = min(p.best for p in parts if p.best is not None)
    winners = [p for p in parts if p.best == best]
    return _ScanResult(
        best=best,
        count=sum(p.count for p in winners),
        hits=[h for p in winners for h in p.hits],
    )


class ExhaustiveSolver(BaseGroundStateSolver):
    """Brute force over 2^(n-1) gauge-fixed states; the reference oracle."""

    name = "exhaustive"

    def __init__(
        self,
        max_sites: Optional[int] = None,
        chunk_bits: Optional[int] = None,
        workers: Optional[int] = None,
        priority: int = 1,
    ):
        settings = get_settings()
        super().__init__(priority=priority)
        self.max_sites = max_sites or settings.exhaustive_max_sites
        self.chunk_bits = chunk_bits or settings.exhaustive_chunk_bits
        self.workers = workers or settings.threads
        self.max_collected_states = settings.max_collected_states

    def check_domain(self, lattice: Lattice, collect_states: bool = False) -> None:
        if lattice.n_sites > self.max_sites:
            raise CapacityExceededError(
                f"Exhaustive search is capped at {self.max_sites} sites (lattice has {lattice.n_sites})"
            )

    def _solve(
        self, lattice: Lattice, couplings: CouplingConfig, collect_states: bool
    ) -> GroundStateResult:
        plan = _compile(lattice, couplings, self.chunk_bits)
        total = 1 << plan.n_high
        cap = self.max_collected_states

        if self.workers > 1 and total >= 2 * self.workers:
            bounds = np.linspace(0, total, self.workers + 1).astype(int)
            with ProcessPoolExecutor(max_workers=self.workers) as pool:
                futures = [
                    pool.submit(_scan_range, plan, int(a), int(b), collect_states, cap)
                    for a, b in zip(bounds[:-1], bounds[1:])
                    if b > a
                ]
                scan = _merge([f.result() for f in futures])
        else:
            scan = _scan_range(plan, 0, total, collect_states, cap)

        logger.debug(
            f"exhaustive: {len(plan.low_sites)} vectorised + {plan.n_high} Gray-walked spins, "
            f"{scan.count} gauge-fixed optima"
        )

        states = None
        if collect_states:
            rows = []
            for a, code in sorted(scan.hits, key=lambda h: (h[1], h[0])):
                bits = np.zeros(lattice.n_grid_sites, dtype=np.uint8)
                for p, s in enumerate(plan.low_sites):
                    bits[s] = (a >> p) & 1
                for q, s in enumerate(plan.high_sites):
                    bits[s] = (code >> q) & 1
                rows.append(bits)
            rows += [r ^ 1 for r in rows]
            states = states_from_bits(lattice, rows)

        return GroundStateResult(
            energy=2 * scan.best - lattice.n_bonds,
            degeneracy=2 * scan.count,
            backend=self.name,
            states=states,
        )


def enumerate_exhaustive(
    lattice: Lattice,
    couplings: CouplingConfig,
    collect_states: bool = False,
    max_sites: Optional[int] = None,
) -> GroundStateResult:
    """Convenience wrapper around ``ExhaustiveSolver``."""
    return ExhaustiveSolver(max_sites=max_sites).solve(lattice, couplings, collect_states)
