"""
Probability that a block realizes a module.

f(1/2) is exact: with one private bond per specified plaquette every pattern
of m constraints is hit by exactly 2^(|B| - m) of the 2^|B| assignments. For
other p the probability is estimated by Monte Carlo over batches drawn from
independent child seeds.
"""

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from fractions import Fraction
from itertools import product
from typing import List, Optional, Union

import numpy as np

from core.config import get_settings
from core.models import DensityEstimate
from registry.matching import CompiledPattern, orientation_patterns
from registry.realize import degree_of_freedom_order
from registry.specs import ModuleSpec

logger = logging.getLogger(__name__)

# Exact enumeration over bond assignments is limited to this many bonds
EXACT_MAX_BONDS = 20


def f_of_half(spec: ModuleSpec) -> Fraction:
    """
    Exactly 2^-m for a spec whose specified plaquettes admit a private-bond order.

    Raises:
        DegreeOfFreedomError: If no such order exists
    """
    degree_of_freedom_order(spec.block_lattice, list(spec.pattern))
    return Fraction(1, 2 ** spec.m)


def block_patterns(spec: ModuleSpec) -> List[CompiledPattern]:
    """Every counted orientation compiled on the spec's own block."""
    return orientation_patterns(spec, spec.block_lattice, (0, 0))


def exact_match_probability(
    spec: ModuleSpec,
    p: Union[Fraction, float] = Fraction(1, 2),
    orientations: Optional[List[str]] = None,
) -> Fraction:
    """
    Probability over all 2^|B| assignments that some orientation matches.

    Each bond is negative with probability ``p``. Only feasible for small
    blocks (at most EXACT_MAX_BONDS bonds).
    """
    n = spec.block_lattice.n_bonds
    if n > EXACT_MAX_BONDS:
        raise ValueError(f"Exact enumeration needs <= {EXACT_MAX_BONDS} bonds (block has {n})")
    p = Fraction(p)
    patterns = [
        pat for pat in block_patterns(spec)
        if orientations is None or pat.transform in orientations
    ]

    total = Fraction(0)
    for assignment in product((0, 1), repeat=n):
        bits = np.asarray(assignment, dtype=np.uint8)
        if any(pat.holds(bits) for pat in patterns):
            negatives = int(bits.sum())
            total += p ** negatives * (1 - p) ** (n - negatives)
    return total


def _count_batch(patterns: List[CompiledPattern], n_bonds: int, p: float, size: int, seed_seq) -> int:
    rng = np.random.default_rng(seed_seq)
    bits = (rng.random((size, n_bonds)) < p).astype(np.uint8)
    hit = np.zeros(size, dtype=bool)
    for pattern in patterns:
        hit |= pattern.holds_batch(bits)
    return int(hit.sum())


def empirical_module_density(
    spec: ModuleSpec,
    p: float,
    n_samples: int,
    seed: int = 0,
    threads: Optional[int] = None,
    batch_size: Optional[int] = None,
) -> DensityEstimate:
    """
    Monte Carlo frequency with which a random block matches the spec.

    Bonds are negative independently with probability ``p``. Batch i draws
    from child i of SeedSequence(seed), so the estimate does not depend on the
    number of workers.
    """
    if n_samples < 1:
        raise ValueError(f"n_samples must be >= 1 (got {n_samples})")
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"p must lie in [0, 1] (got {p})")

    settings = get_settings()
    threads = threads or settings.threads
    batch_size = batch_size or settings.mc_batch_size

    patterns = block_patterns(spec)
    n_bonds = spec.block_lattice.n_bonds
    sizes = [batch_size] * (n_samples // batch_size)
    if n_samples % batch_size:
        sizes.append(n_samples % batch_size)
    children = np.random.SeedSequence(seed).spawn(len(sizes))

    logger.info(
        f"Sampling '{spec.id}' at p={p}: {n_samples} blocks in {len(sizes)} batches, threads={threads}"
    )
    if threads > 1 and len(sizes) > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            futures = [
                pool.submit(_count_batch, patterns, n_bonds, p, size, child)
                for size, child in zip(sizes, children)
            ]
            matches = sum(f.result() for f in futures)
    else:
        matches = sum(_count_batch(patterns, n_bonds, p, size, child) for size, child in zip(sizes, children))

    estimate = matches / n_samples
    stderr = math.sqrt(estimate * (1.0 - estimate) / n_samples)
    return DensityEstimate(
        spec_id=spec.id,
        p=p,
        samples=n_samples,
        matches=matches,
        estimate=estimate,
        stderr=stderr,
        seed=seed,
    )
