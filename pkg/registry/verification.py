"""
Exact check of the module property on small host lattices.

For every sample: realize the block's couplings, fill the rest of the host
with random couplings, enumerate all ground states and group them by their
spins outside the block. The module property holds for the sample iff no
group is a singleton, i.e. every ground state has a partner that differs only
inside the block.
"""

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import List, Optional, Tuple

import networkx as nx
import numpy as np

from core.config import get_settings
from core.ising import CouplingConfig
from core.lattice import BoundaryCondition, Lattice, build_lattice
from core.models import SampleVerdict, VerificationReport
from registry.matching import compile_placement
from registry.realize import realize_coupling
from registry.specs import ModuleSpec
from solvers.base import CapacityExceededError
from solvers.branch_and_bound import BranchAndBoundSolver
from solvers.exhaustive import ExhaustiveSolver
from solvers.utils import group_by_exterior

logger = logging.getLogger(__name__)

# Empty rows/cols around the block in the ambient grid
MARGIN = 2


@dataclass
class Host:
    """Host lattice around a placed block."""

    lattice: Lattice
    block_sites: Tuple[int, ...]
    block_bonds: Tuple[int, ...]  # host bond per block bond, block_lattice order
    exterior_bonds: Tuple[int, ...]

    def describe(self) -> str:
        return self.lattice.describe()


def build_host(spec: ModuleSpec, collar: int) -> Host:
    """
    The block plus its first ``collar`` exterior sites in breadth-first order.

    Exterior sites are ranked by graph distance from the block, then by site
    id, in an ambient free grid with a margin around the block.

    Raises:
        ValueError: If collar < 1 or the ambient grid has too few sites
    """
    if collar < 1:
        raise ValueError(f"collar must be >= 1 (got {collar})")

    ambient = build_lattice(
        spec.kind, spec.height + 2 * MARGIN, spec.width + 2 * MARGIN, BoundaryCondition.FREE
    )
    origin = (MARGIN, MARGIN)
    placed = compile_placement(spec, ambient, origin)
    block = set(placed.sites)

    graph = ambient.to_networkx()
    graph.add_node("block")
    graph.add_edges_from(("block", v) for u in block for v in graph.neighbors(u) if v not in block)
    distance = nx.single_source_shortest_path_length(graph, "block")
    exterior = sorted(
        (s for s in ambient.sites if s not in block and s in distance),
        key=lambda s: (distance[s], s),
    )
    if len(exterior) < collar:
        raise ValueError(f"Only {len(exterior)} exterior sites available (collar {collar})")

    keep = block | set(exterior[:collar])
    host = ambient.with_removed([s for s in ambient.sites if s not in keep], [])
    placed = compile_placement(spec, host, origin)

    block_bond_set = set(placed.bonds)
    exterior_bonds = tuple(k for k in range(host.n_bonds) if k not in block_bond_set)
    return Host(
        lattice=host,
        block_sites=placed.sites,
        block_bonds=placed.bonds,
        exterior_bonds=exterior_bonds,
    )


def sample_host_couplings(spec: ModuleSpec, host: Host, rng: np.random.Generator) -> CouplingConfig:
    """Realized block couplings plus fair random couplings on the exterior bonds."""
    block_j = realize_coupling(spec, rng)
    bits = np.zeros(host.lattice.n_bonds, dtype=np.uint8)
    bits[list(host.block_bonds)] = block_j.bits
    if host.exterior_bonds:
        bits[list(host.exterior_bonds)] = rng.integers(0, 2, size=len(host.exterior_bonds), dtype=np.uint8)
    return CouplingConfig(host.lattice.bonds, bits)


def _pick_solver(host: Host):
    settings = get_settings()
    if host.lattice.n_sites <= settings.exhaustive_max_sites:
        return ExhaustiveSolver(workers=1)
    if host.lattice.n_sites <= settings.branch_and_bound_max_sites:
        return BranchAndBoundSolver(workers=1)
    raise CapacityExceededError(
        f"Host has {host.lattice.n_sites} sites; no backend collects states at that size"
    )


def check_sample(spec: ModuleSpec, host: Host, index: int, seed_seq: np.random.SeedSequence) -> SampleVerdict:
    """Run one verification sample."""
    rng = np.random.default_rng(seed_seq)
    couplings = sample_host_couplings(spec, host, rng)
    result = _pick_solver(host).solve(host.lattice, couplings, collect_states=True)
    groups = group_by_exterior(result.states, host.block_sites)
    sizes = [len(g) for g in groups]
    return SampleVerdict(
        index=index,
        ground_energy=result.energy,
        degeneracy=result.degeneracy,
        n_groups=len(groups),
        min_group_size=min(sizes),
        passed=min(sizes) >= 2,
    )


def verify_module(
    spec: ModuleSpec,
    collar: int,
    n_samples: int,
    seed: int = 0,
    threads: Optional[int] = None,
) -> VerificationReport:
    """
    Sample exterior couplings and check the module property exactly.

    Args:
        spec: Module to verify
        collar: Number of exterior host sites (>= 1)
        n_samples: Number of coupling samples
        seed: Master seed; sample i uses child i of SeedSequence(seed)
        threads: Worker processes (defaults to settings.threads)

    Returns:
        VerificationReport with one verdict per sample, ordered by index
    """
    if n_samples < 1:
        raise ValueError(f"n_samples must be >= 1 (got {n_samples})")
    threads = threads or get_settings().threads

    host = build_host(spec, collar)
    solver = _pick_solver(host)
    children = np.random.SeedSequence(seed).spawn(n_samples)
    logger.info(
        f"Verifying '{spec.id}' on {host.describe()}: {n_samples} samples, "
        f"seed={seed}, backend={solver.name}, threads={threads}"
    )

    verdicts: List[SampleVerdict]
    if threads > 1 and n_samples > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            futures = [pool.submit(check_sample, spec, host, i, child) for i, child in enumerate(children)]
            verdicts = [f.result() for f in futures]
    else:
        verdicts = [check_sample(spec, host, i, child) for i, child in enumerate(children)]

    for verdict in verdicts:
        if not verdict.passed:
            logger.warning(
                f"Sample {verdict.index} failed: smallest exterior class has {verdict.min_group_size} state(s)"
            )

    report = VerificationReport(
        spec_id=spec.id,
        host=host.describe(),
        host_sites=host.lattice.n_sites,
        collar=collar,
        n_samples=n_samples,
        seed=seed,
        backend=solver.name,
        samples=sorted(verdicts, key=lambda v: v.index),
    )
    logger.info(f"Verification of '{spec.id}': {'PASS' if report.passed else 'FAIL'}")
    return report
