"""
Placing module blocks on a lattice and testing whether J realizes them.

A placement maps the block's local chart onto lattice coordinates: an anchor
cell, a tiling offset and an orientation transform. Compiling a placement
resolves every specified plaquette to bond indices once, so matching a
coupling configuration is a handful of XORs.
"""

import logging
from dataclasses import dataclass
from typing import Dict, List, Optional, Tuple

import numpy as np

from core.ising import CouplingConfig, Frustration
from core.lattice import Lattice, LatticeKind, make_bond
from registry.specs import Cell, ModuleSpec, ModuleSpecError, Placement

logger = logging.getLogger(__name__)


class PlacementError(ModuleSpecError):
    """Raised when a block placed at an anchor does not fit the lattice."""
    pass


@dataclass(frozen=True)
class CompiledPattern:
    """One placed orientation of a spec, resolved to lattice indices."""

    transform: str
    sites: Tuple[int, ...]  # lattice site per block site, in spec.sites order
    bonds: Tuple[int, ...]  # lattice bond per block bond, in block_lattice.bonds order
    plaquette_bonds: Tuple[Tuple[int, ...], ...]  # per specified plaquette
    parities: Tuple[int, ...]  # required parity, 1 = Frustrated

    def holds(self, bits: np.ndarray) -> bool:
        for bonds, parity in zip(self.plaquette_bonds, self.parities):
            if int(bits[list(bonds)].sum()) % 2 != parity:
                return False
        return True

    def holds_batch(self, bits: np.ndarray) -> np.ndarray:
        """Vectorised ``holds`` over rows of an (n_samples, n_bonds) bit matrix."""
        ok = np.ones(bits.shape[0], dtype=bool)
        for bonds, parity in zip(self.plaquette_bonds, self.parities):
            odd = np.bitwise_xor.reduce(bits[:, list(bonds)], axis=1)
            ok &= odd == parity
        return ok


def _cell_mapper(spec: ModuleSpec, lattice: Lattice, origin: Cell, transform: str):
    move = spec.transform(transform)

    def to_site(cell: Cell) -> int:
        tr, tc = move(cell)
        r, c = origin[0] + tr, origin[1] + tc
        if lattice.wraps_rows:
            r %= lattice.rows
        if lattice.wraps_cols:
            c %= lattice.cols
        if not (0 <= r < lattice.rows and 0 <= c < lattice.cols):
            raise PlacementError(
                f"{spec.id} block at {origin} ({transform}) leaves the {lattice.rows}x{lattice.cols} lattice"
            )
        return lattice.site_id(r, c)

    return to_site


def compile_placement(
    spec: ModuleSpec, lattice: Lattice, origin: Cell, transform: str = "identity"
) -> Optional[CompiledPattern]:
    """
    Resolve a placed block to lattice indices.

    Returns:
        CompiledPattern, or None when a block site or bond is absent (dilution)

    Raises:
        PlacementError: Block leaves the lattice, folds onto itself, or lands
            on the wrong sublattice of a hexagonal lattice
    """
    if lattice.kind != spec.kind:
        raise PlacementError(f"{spec.id} is a {spec.kind.value} module; lattice is {lattice.kind.value}")
    if spec.kind == LatticeKind.HEXAGONAL and transform != "identity":
        raise PlacementError("Hexagonal blocks are only placed by translation")

    to_site = _cell_mapper(spec, lattice, origin, transform)
    sites = tuple(to_site(cell) for cell in spec.sites)
    if len(set(sites)) != len(sites):
        raise PlacementError(f"{spec.id} block at {origin} wraps onto itself")

    if spec.kind == LatticeKind.HEXAGONAL:
        # hexagons sit at even r + c; translations must preserve that
        r0, c0 = lattice.coords(sites[0])
        lr, lc = spec.sites[0]
        if (r0 + c0 - lr - lc) % 2:
            raise PlacementError(f"{spec.id} block at {origin} is off the hexagon sublattice")

    if any(not lattice.has_site(s) for s in sites):
        return None

    local_to_global = {spec.local_id(cell): site for cell, site in zip(spec.sites, sites)}
    block = spec.block_lattice
    bonds = []
    for i, j in block.bonds:
        a, b = local_to_global[i], local_to_global[j]
        if not lattice.has_bond(a, b):
            return None
        bonds.append(lattice.bond_id(a, b))

    plaquette_bonds = []
    parities = []
    local_bond = {b: k for k, b in enumerate(block.bonds)}
    for pid, value in sorted(spec.pattern.items()):
        plaquette = block.plaquettes_by_id[pid]
        plaquette_bonds.append(tuple(bonds[local_bond[make_bond(*b)]] for b in plaquette.bonds))
        parities.append(1 if value == Frustration.FRUSTRATED else 0)

    return CompiledPattern(
        transform=transform,
        sites=sites,
        bonds=tuple(bonds),
        plaquette_bonds=tuple(plaquette_bonds),
        parities=tuple(parities),
    )


def orientation_patterns(
    spec: ModuleSpec, lattice: Lattice, origin: Cell, placement: Placement = Placement()
) -> List[CompiledPattern]:
    """Every counted orientation of the spec at one placement, composed with its transform."""
    patterns = []
    for name in spec.orientations:
        composed = _compose(placement.transform, name)
        pattern = compile_placement(spec, lattice, origin, composed)
        if pattern is not None:
            patterns.append(pattern)
    return patterns


# (outer, inner) -> single transform; all are rotations of one chart
_ROTATION_STEPS = {"identity": 0, "rot90": 1, "rot180": 2}
_BY_STEPS = {0: "identity", 1: "rot90", 2: "rot180"}


def _compose(outer: str, inner: str) -> str:
    steps = (_ROTATION_STEPS[outer] + _ROTATION_STEPS[inner]) % 4
    if steps not in _BY_STEPS:
        raise ModuleSpecError(f"Composition of {outer} and {inner} is not supported")
    return _BY_STEPS[steps]


def matches(spec: ModuleSpec, lattice: Lattice, couplings: CouplingConfig, anchor: int) -> bool:
    """
    True iff J realizes the spec's pattern at ``anchor`` in at least one orientation.

    Raises:
        PlacementError: If the block placed at the anchor does not fit
    """
    if not 0 <= anchor < lattice.n_grid_sites:
        raise PlacementError(f"Anchor {anchor} is outside the lattice")
    origin = lattice.coords(anchor)
    return any(p.holds(couplings.bits) for p in orientation_patterns(spec, lattice, origin))


def tiling_origins(spec: ModuleSpec, lattice: Lattice) -> List[Tuple[Cell, Placement]]:
    """
    Disjoint block placements covering the lattice, anchored at site 0.

    Raises:
        PlacementError: If the lattice dimensions are not multiples of the
            tiling period or the spec has no tiling
    """
    pr, pc = spec.tiling_period
    if pr <= 0 or pc <= 0:
        raise PlacementError(f"{spec.id} declares no tiling period")
    if lattice.rows % pr or lattice.cols % pc:
        raise PlacementError(
            f"A {lattice.rows}x{lattice.cols} lattice is not tileable by the {pr}x{pc} period of {spec.id}"
        )

    out = []
    for r in range(0, lattice.rows, pr):
        for c in range(0, lattice.cols, pc):
            for placement in spec.tiling_placements:
                origin = (r + placement.offset[0], c + placement.offset[1])
                try:
                    compile_placement(spec, lattice, origin, placement.transform)
                except PlacementError:
                    # only blocks that fit without wrapping count on free axes
                    continue
                out.append((origin, placement))
    return out


def embed_block(
    spec: ModuleSpec,
    lattice: Lattice,
    block_couplings: CouplingConfig,
    origin: Cell,
    base: CouplingConfig,
    transform: str = "identity",
) -> CouplingConfig:
    """Copy a block coupling configuration into ``base`` at a placement."""
    pattern = compile_placement(spec, lattice, origin, transform)
    if pattern is None:
        raise PlacementError(f"{spec.id} block at {origin} touches absent sites or bonds")
    bits = base.bits.copy()
    bits[list(pattern.bonds)] = block_couplings.bits
    return base.with_bits(bits)


def match_counts(spec: ModuleSpec, lattice: Lattice, couplings: CouplingConfig) -> Dict[Cell, bool]:
    """Match verdict for every tiling placement."""
    verdicts = {}
    for origin, placement in tiling_origins(spec, lattice):
        patterns = orientation_patterns(spec, lattice, origin, placement)
        verdicts[origin] = any(p.holds(couplings.bits) for p in patterns)
    return verdicts
