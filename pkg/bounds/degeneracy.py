"""Degeneracy lower bounds from module occurrences, and entropy density."""

import logging
import math

from core.ising import CouplingConfig
from core.lattice import Lattice
from core.models import DegeneracyCertificate
from registry.matching import orientation_patterns, tiling_origins
from registry.specs import ModuleSpec

logger = logging.getLogger(__name__)


def degeneracy_lower_bound(spec: ModuleSpec, lattice: Lattice, couplings: CouplingConfig) -> DegeneracyCertificate:
    """
    Count disjoint block placements where J realizes the module.

    Each matching block independently offers a nontrivial energy-preserving
    flip, so the ground-state degeneracy is at least 2^n_found.

    Raises:
        PlacementError: If the lattice is not tileable by the spec's period
    """
    if couplings.bonds != lattice.bonds:
        raise ValueError("Coupling configuration is not defined on this lattice's bonds")

    origins = tiling_origins(spec, lattice)
    anchors = []
    for origin, placement in origins:
        patterns = orientation_patterns(spec, lattice, origin, placement)
        if any(p.holds(couplings.bits) for p in patterns):
            anchors.append([origin[0], origin[1]])

    certificate = DegeneracyCertificate(
        spec_id=spec.id,
        lattice=lattice.describe(),
        blocks=len(origins),
        n_found=len(anchors),
        anchors=anchors,
    )
    logger.debug(f"'{spec.id}' matches {certificate.n_found} of {certificate.blocks} blocks on {lattice.describe()}")
    return certificate


def entropy_density(lattice: Lattice, couplings: CouplingConfig, exact_degeneracy: int) -> float:
    """log2(degeneracy) / |sites|; exact for integer counts of any size."""
    if couplings.bonds != lattice.bonds:
        raise ValueError("Coupling configuration is not defined on this lattice's bonds")
    if exact_degeneracy < 1:
        raise ValueError(f"Degeneracy must be >= 1 (got {exact_degeneracy})")
    # math.log2 accepts arbitrarily large ints
    return math.log2(exact_degeneracy) / lattice.n_sites
