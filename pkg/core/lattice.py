"""
Lattice construction and validation.

Builds the finite graphs everything else runs on: square, triangular and
hexagonal (brick-wall) grids with free, cylindrical or toroidal boundaries,
optionally diluted. Sites are numbered row-major (site = r * cols + c) and keep
their ids after dilution; removed sites are only marked absent.
"""

import json
import logging
from dataclasses import dataclass
from enum import Enum
from functools import cached_property
from typing import Any, Dict, FrozenSet, Iterable, List, Optional, Sequence, Tuple

import networkx as nx
import numpy as np

logger = logging.getLogger(__name__)

Bond = Tuple[int, int]  # always stored with the smaller site id first


class LatticeError(ValueError):
    """Raised for invalid lattice parameters or inconsistent lattices."""
    pass


class LatticeKind(str, Enum):
    SQUARE = "square"
    TRIANGULAR = "triangular"
    HEXAGONAL = "hexagonal"
    GENERAL = "general"


class BoundaryCondition(str, Enum):
    FREE = "free"
    CYLINDRICAL = "cylindrical"  # rows wrap, every column is a ring
    TOROIDAL = "toroidal"


PLAQUETTE_SIZE = {
    LatticeKind.SQUARE: 4,
    LatticeKind.TRIANGULAR: 3,
    LatticeKind.HEXAGONAL: 6,
}


def make_bond(i: int, j: int) -> Bond:
    """Return the canonical (sorted) bond between two distinct sites."""
    if i == j:
        raise LatticeError(f"A bond needs two distinct sites (got {i}, {j})")
    return (i, j) if i < j else (j, i)


@dataclass(frozen=True)
class Plaquette:
    """A minimal closed cycle of the lattice."""

    id: int
    sites: Tuple[int, ...]  # cyclic order
    bonds: Tuple[Bond, ...]  # bonds[k] joins sites[k] and sites[k + 1]


@dataclass(frozen=True)
class DilutionParams:
    """Constant site/bond retention probabilities and the RNG seed."""

    p_s: float = 1.0
    p_b: float = 1.0
    seed: int = 0

    def __post_init__(self):
        for name in ("p_s", "p_b"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise LatticeError(f"{name} must lie in [0, 1] (got {value})")
        if not 0 <= self.seed < 2**64:
            raise LatticeError(f"seed must be a 64-bit unsigned integer (got {self.seed})")


class Lattice:
    """
    Immutable graph of sites, bonds and plaquettes.

    Instances are produced by ``build_lattice``, ``dilute``, ``general_lattice``
    or ``Lattice.from_dict``; the constructor validates connectivity and every
    plaquette cycle.
    """

    def __init__(
        self,
        kind: LatticeKind,
        rows: int,
        cols: int,
        boundary: BoundaryCondition,
        bonds: Iterable[Bond],
        plaquette_cycles: Sequence[Sequence[int]],
        removed_sites: Iterable[int] = (),
        removed_bonds: Iterable[Bond] = (),
    ):
        self._kind = LatticeKind(kind)
        self._rows = rows
        self._cols = cols
        self._boundary = BoundaryCondition(boundary)
        self._removed_sites = frozenset(removed_sites)
        self._removed_bonds = frozenset(make_bond(*b) for b in removed_bonds)

        all_bonds = sorted(set(make_bond(*b) for b in bonds))
        self._full_bond_count = len(all_bonds)
        n_grid = rows * cols
        for i, j in all_bonds:
            if not (0 <= i < n_grid and 0 <= j < n_grid):
                raise LatticeError(f"Bond ({i}, {j}) references a site outside [0, {n_grid})")

        self._sites = tuple(s for s in range(n_grid) if s not in self._removed_sites)
        self._bonds = tuple(
            b for b in all_bonds
            if b not in self._removed_bonds
            and b[0] not in self._removed_sites
            and b[1] not in self._removed_sites
        )
        self._bond_index = {b: k for k, b in enumerate(self._bonds)}

        adjacency: Dict[int, List[int]] = {s: [] for s in self._sites}
        for k, (i, j) in enumerate(self._bonds):
            adjacency[i].append(k)
            adjacency[j].append(k)
        self._adjacency = {s: tuple(v) for s, v in adjacency.items()}

        plaquettes = []
        for pid, cycle in enumerate(plaquette_cycles):
            cycle = tuple(cycle)
            cycle_bonds = tuple(
                make_bond(cycle[k], cycle[(k + 1) % len(cycle)]) for k in range(len(cycle))
            )
            if any(s in self._removed_sites for s in cycle):
                continue
            if any(b not in self._bond_index for b in cycle_bonds):
                continue
            plaquettes.append(Plaquette(id=pid, sites=cycle, bonds=cycle_bonds))
        self._plaquettes = tuple(plaquettes)

        self._validate()

    # ------------------------------------------------------------------
    # Accessors
    # ------------------------------------------------------------------

    @property
    def kind(self) -> LatticeKind:
        return self._kind

    @property
    def rows(self) -> int:
        return self._rows

    @property
    def cols(self) -> int:
        return self._cols

    @property
    def boundary(self) -> BoundaryCondition:
        return self._boundary

    @property
    def sites(self) -> Tuple[int, ...]:
        """Present site ids in increasing order."""
        return self._sites

    @property
    def n_sites(self) -> int:
        return len(self._sites)

    @property
    def n_grid_sites(self) -> int:
        """Size of the id space, including absent sites."""
        return self._rows * self._cols

    @property
    def bonds(self) -> Tuple[Bond, ...]:
        return self._bonds

    @property
    def n_bonds(self) -> int:
        return len(self._bonds)

    @property
    def plaquettes(self) -> Tuple[Plaquette, ...]:
        return self._plaquettes

    @property
    def removed_sites(self) -> FrozenSet[int]:
        return self._removed_sites

    @property
    def removed_bonds(self) -> FrozenSet[Bond]:
        return self._removed_bonds

    @property
    def is_diluted(self) -> bool:
        return bool(self._removed_sites or self._removed_bonds)

    @cached_property
    def bond_array(self) -> np.ndarray:
        """Bonds as an (n_bonds, 2) integer array aligned with ``bonds``."""
        if not self._bonds:
            return np.zeros((0, 2), dtype=np.int64)
        return np.asarray(self._bonds, dtype=np.int64)

    @cached_property
    def plaquettes_by_sites(self) -> Dict[FrozenSet[int], Plaquette]:
        return {frozenset(p.sites): p for p in self._plaquettes}

    @cached_property
    def plaquettes_by_id(self) -> Dict[int, Plaquette]:
        return {p.id: p for p in self._plaquettes}

    def bond_id(self, i: int, j: int) -> int:
        """Index of bond {i, j} in ``bonds``."""
        try:
            return self._bond_index[make_bond(i, j)]
        except KeyError:
            raise LatticeError(f"Sites {i} and {j} are not joined by a bond") from None

    def has_bond(self, i: int, j: int) -> bool:
        return i != j and make_bond(i, j) in self._bond_index

    def has_site(self, site: int) -> bool:
        return 0 <= site < self.n_grid_sites and site not in self._removed_sites

    def incident_bonds(self, site: int) -> Tuple[int, ...]:
        """Bond indices touching a site."""
        return self._adjacency[site]

    def neighbors(self, site: int) -> Tuple[int, ...]:
        out = []
        for k in self._adjacency[site]:
            i, j = self._bonds[k]
            out.append(j if i == site else i)
        return tuple(out)

    def degree(self, site: int) -> int:
        return len(self._adjacency[site])

    def site_id(self, row: int, col: int) -> int:
        return row * self._cols + col

    def coords(self, site: int) -> Tuple[int, int]:
        return divmod(site, self._cols)

    @property
    def wraps_rows(self) -> bool:
        return self._boundary in (BoundaryCondition.CYLINDRICAL, BoundaryCondition.TOROIDAL)

    @property
    def wraps_cols(self) -> bool:
        return self._boundary == BoundaryCondition.TOROIDAL

    def to_networkx(self) -> nx.Graph:
        graph = nx.Graph()
        graph.add_nodes_from(self._sites)
        graph.add_edges_from(self._bonds)
        return graph

    def describe(self) -> str:
        text = (
            f"{self._kind.value} {self._rows}x{self._cols} {self._boundary.value} "
            f"({self.n_sites} sites, {self.n_bonds} bonds, {len(self._plaquettes)} plaquettes)"
        )
        if self.is_diluted:
            text += " diluted"
        return text

    def __repr__(self) -> str:
        return f"Lattice({self.describe()})"

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Lattice):
            return NotImplemented
        return (
            self._kind == other._kind
            and self._rows == other._rows
            and self._cols == other._cols
            and self._boundary == other._boundary
            and self._sites == other._sites
            and self._bonds == other._bonds
            and [p.sites for p in self._plaquettes] == [p.sites for p in other._plaquettes]
        )

    def __hash__(self) -> int:
        return hash((self._kind, self._rows, self._cols, self._boundary, self._sites, self._bonds))

    # ------------------------------------------------------------------
    # Validation
    # ------------------------------------------------------------------

    def _validate(self) -> None:
        if not self._sites:
            raise LatticeError("Lattice has no sites")

        if self.n_sites > 1 and not nx.is_connected(self.to_networkx()):
            raise LatticeError(f"Lattice is not connected: {self.describe()}")

        expected = PLAQUETTE_SIZE.get(self._kind)
        for p in self._plaquettes:
            if expected is not None and len(p.sites) != expected:
                raise LatticeError(
                    f"Plaquette {p.id} has {len(p.sites)} sites, expected {expected} for {self._kind.value}"
                )
            if len(set(p.sites)) != len(p.sites):
                raise LatticeError(f"Plaquette {p.id} visits a site twice")
            if not is_closed_curve(self, p.sites + (p.sites[0],)):
                raise LatticeError(f"Plaquette {p.id} is not a closed curve of the lattice")

    # ------------------------------------------------------------------
    # Serialization
    # ------------------------------------------------------------------

    def to_dict(self) -> Dict[str, Any]:
        data: Dict[str, Any] = {
            "kind": self._kind.value,
            "rows": self._rows,
            "cols": self._cols,
            "boundary": self._boundary.value,
            "removed_sites": sorted(self._removed_sites),
            "removed_bonds": [list(b) for b in sorted(self._removed_bonds)],
        }
        if self._kind == LatticeKind.GENERAL:
            # No generator to regenerate from
            data["bonds"] = [list(b) for b in self._bonds]
            data["plaquettes"] = [list(p.sites) for p in self._plaquettes]
        return data

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "Lattice":
        try:
            kind = LatticeKind(data["kind"])
            rows, cols = int(data["rows"]), int(data["cols"])
            boundary = BoundaryCondition(data.get("boundary", "free"))
        except (KeyError, ValueError) as e:
            raise LatticeError(f"Invalid lattice document: {e}") from e

        removed_sites = [int(s) for s in data.get("removed_sites", [])]
        removed_bonds = [tuple(b) for b in data.get("removed_bonds", [])]

        if kind == LatticeKind.GENERAL:
            return cls(
                kind, rows, cols, boundary,
                bonds=[tuple(b) for b in data.get("bonds", [])],
                plaquette_cycles=data.get("plaquettes", []),
                removed_sites=removed_sites,
                removed_bonds=removed_bonds,
            )

        base = build_lattice(kind, rows, cols, boundary)
        if not removed_sites and not removed_bonds:
            return base
        return base.with_removed(removed_sites, removed_bonds)

    @classmethod
    def from_json(cls, text: str) -> "Lattice":
        return cls.from_dict(json.loads(text))

    def with_removed(self, removed_sites: Iterable[int], removed_bonds: Iterable[Bond]) -> "Lattice":
        """Same generator with additional sites/bonds marked absent."""
        full_bonds, cycles = _generate(self._kind, self._rows, self._cols, self._boundary) \
            if self._kind != LatticeKind.GENERAL else (self._bonds, [p.sites for p in self._plaquettes])
        return Lattice(
            self._kind, self._rows, self._cols, self._boundary,
            bonds=full_bonds,
            plaquette_cycles=cycles,
            removed_sites=set(self._removed_sites) | set(removed_sites),
            removed_bonds=set(self._removed_bonds) | {make_bond(*b) for b in removed_bonds},
        )


# ----------------------------------------------------------------------
# Curves
# ----------------------------------------------------------------------

def is_curve(lattice: Lattice, sites: Sequence[int]) -> bool:
    """True if consecutive sites are joined by bonds and the length is >= 1."""
    if len(sites) < 2:
        return False
    return all(lattice.has_bond(a, b) for a, b in zip(sites[:-1], sites[1:]))


def is_closed_curve(lattice: Lattice, sites: Sequence[int]) -> bool:
    return is_curve(lattice, sites) and sites[0] == sites[-1]


# ----------------------------------------------------------------------
# Generators
# ----------------------------------------------------------------------

def _generate(
    kind: LatticeKind, rows: int, cols: int, boundary: BoundaryCondition
) -> Tuple[List[Bond], List[Tuple[int, ...]]]:
    """Enumerate bonds and plaquette cycles of a full grid."""
    wrap_r = boundary in (BoundaryCondition.CYLINDRICAL, BoundaryCondition.TOROIDAL)
    wrap_c = boundary == BoundaryCondition.TOROIDAL

    def at(r: int, c: int) -> Optional[int]:
        if wrap_r:
            r %= rows
        if wrap_c:
            c %= cols
        if 0 <= r < rows and 0 <= c < cols:
            return r * cols + c
        return None

    seen: set = set()
    bonds: List[Bond] = []

    def add_bond(a: Optional[int], b: Optional[int]) -> None:
        if a is None or b is None:
            return
        if a == b:
            raise LatticeError(
                f"{boundary.value} {kind.value} {rows}x{cols} would create a self-loop"
            )
        bond = make_bond(a, b)
        if bond in seen:
            raise LatticeError(
                f"{boundary.value} {kind.value} {rows}x{cols} would create doubled bonds at {bond}"
            )
        seen.add(bond)
        bonds.append(bond)

    cycles: List[Tuple[int, ...]] = []

    def add_cycle(points: Sequence[Tuple[int, int]]) -> None:
        ids = [at(r, c) for r, c in points]
        if any(s is None for s in ids):
            return
        cycles.append(tuple(ids))

    for r in range(rows):
        for c in range(cols):
            here = at(r, c)
            if kind == LatticeKind.HEXAGONAL:
                add_bond(here, at(r, c + 1))
                if (r + c) % 2 == 0:
                    add_bond(here, at(r + 1, c))
            else:
                add_bond(here, at(r, c + 1))
                add_bond(here, at(r + 1, c))
                if kind == LatticeKind.TRIANGULAR:
                    add_bond(here, at(r + 1, c + 1))

    for r in range(rows):
        for c in range(cols):
            if kind == LatticeKind.SQUARE:
                add_cycle([(r, c), (r, c + 1), (r + 1, c + 1), (r + 1, c)])
            elif kind == LatticeKind.TRIANGULAR:
                add_cycle([(r, c), (r + 1, c), (r + 1, c + 1)])  # lower
                add_cycle([(r, c), (r, c + 1), (r + 1, c + 1)])  # upper
            elif kind == LatticeKind.HEXAGONAL and (r + c) % 2 == 0:
                add_cycle([(r, c), (r, c + 1), (r, c + 2), (r + 1, c + 2), (r + 1, c + 1), (r + 1, c)])

    # A wrapped plaquette must not repeat sites (possible on very thin grids)
    for cycle in cycles:
        if len(set(cycle)) != len(cycle):
            raise LatticeError(
                f"{boundary.value} {kind.value} {rows}x{cols} is too small: a plaquette folds onto itself"
            )
    return bonds, cycles


def build_lattice(
    kind: LatticeKind,
    rows: int,
    cols: int,
    boundary: BoundaryCondition = BoundaryCondition.FREE,
) -> Lattice:
    """
    Build a full square, triangular or hexagonal lattice.

    Args:
        kind: Lattice kind (General is not generated, see ``general_lattice``)
        rows: Number of rows (>= 2)
        cols: Number of columns (>= 2)
        boundary: Free, cylindrical (rows wrap) or toroidal

    Returns:
        Connected lattice with all bonds and plaquettes enumerated

    Raises:
        LatticeError: For undersized grids, multigraph wraps or hexagonal
            wraps of odd length
    """
    kind = LatticeKind(kind)
    boundary = BoundaryCondition(boundary)

    if kind == LatticeKind.GENERAL:
        raise LatticeError("General lattices have no generator; use general_lattice()")
    if rows < 2 or cols < 2:
        raise LatticeError(f"rows and cols must be >= 2 (got {rows}x{cols})")

    if kind == LatticeKind.HEXAGONAL:
        if boundary != BoundaryCondition.FREE and rows % 2:
            raise LatticeError(f"Hexagonal tiling does not close with {rows} wrapped rows (need even)")
        if boundary == BoundaryCondition.TOROIDAL and cols % 2:
            raise LatticeError(f"Hexagonal tiling does not close with {cols} wrapped cols (need even)")

    bonds, cycles = _generate(kind, rows, cols, boundary)
    lattice = Lattice(kind, rows, cols, boundary, bonds=bonds, plaquette_cycles=cycles)
    logger.debug(f"Built {lattice.describe()}")
    return lattice


def general_lattice(
    n_sites: int,
    bonds: Iterable[Bond],
    plaquettes: Optional[Sequence[Sequence[int]]] = None,
) -> Lattice:
    """Escape hatch: an arbitrary connected graph on sites 0..n_sites-1."""
    if n_sites < 1:
        raise LatticeError("A lattice needs at least one site")
    return Lattice(
        LatticeKind.GENERAL, 1, n_sites, BoundaryCondition.FREE,
        bonds=list(bonds),
        plaquette_cycles=list(plaquettes or []),
    )


def chain_lattice(n_sites: int) -> Lattice:
    """Open one-dimensional chain (no closed curves)."""
    return general_lattice(n_sites, [(i, i + 1) for i in range(n_sites - 1)])


# ----------------------------------------------------------------------
# Dilution and contours
# ----------------------------------------------------------------------

def dilute(lattice: Lattice, params: DilutionParams) -> Lattice:
    """
    Randomly remove sites and bonds, keeping the largest connected component.

    Each grid site is kept with probability p_s and each bond with probability
    p_b, both drawn from one generator seeded with ``params.seed``; a bond
    disappears with either endpoint. Ties between components of equal size go
    to the one holding the smallest site id.

    Raises:
        LatticeError: If the input is already diluted or nothing survives
    """
    if lattice.is_diluted:
        raise LatticeError("dilute() expects an undiluted lattice")

    rng = np.random.default_rng(params.seed)
    site_keep = rng.random(lattice.n_grid_sites) < params.p_s
    bond_keep = rng.random(lattice.n_bonds) < params.p_b

    graph = nx.Graph()
    graph.add_nodes_from(s for s in lattice.sites if site_keep[s])
    graph.add_edges_from(
        b for k, b in enumerate(lattice.bonds)
        if bond_keep[k] and site_keep[b[0]] and site_keep[b[1]]
    )
    if graph.number_of_nodes() == 0:
        raise LatticeError(f"Dilution (p_s={params.p_s}, p_b={params.p_b}) left an empty lattice")

    component = max(nx.connected_components(graph), key=lambda comp: (len(comp), -min(comp)))
    removed_sites = [s for s in lattice.sites if s not in component]
    removed_bonds = [b for k, b in enumerate(lattice.bonds) if not bond_keep[k]]

    diluted = lattice.with_removed(removed_sites, removed_bonds)
    logger.info(
        f"Diluted {lattice.describe()} -> {diluted.n_sites} sites, {diluted.n_bonds} bonds "
        f"(p_s={params.p_s}, p_b={params.p_b}, seed={params.seed})"
    )
    return diluted


def boundary_bonds(lattice: Lattice, subset: Iterable[int]) -> FrozenSet[Bond]:
    """
    Contour bonds B_S: bonds with exactly one endpoint in ``subset``.

    Raises:
        LatticeError: If ``subset`` names an absent site
    """
    inside = set(subset)
    missing = [s for s in inside if not lattice.has_site(s)]
    if missing:
        raise LatticeError(f"Sites {sorted(missing)[:5]} are not present in the lattice")
    return frozenset(b for b in lattice.bonds if (b[0] in inside) != (b[1] in inside))
