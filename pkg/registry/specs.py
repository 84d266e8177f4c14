"""
Module specifications: the three transcribed frustration patterns.

A ModuleSpec is a block of sites in a local chart (row 0 at the top) with a
frustration constraint on some of its plaquettes. Plaquettes are named by the
figure label and referenced by shape and anchor cell; bonds and plaquette
cycles are regenerated from the lattice rules on load.
"""

import json
import logging
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Tuple, Union

from core.ising import Frustration, FrustrationPattern
from core.lattice import BoundaryCondition, Lattice, LatticeKind, build_lattice

logger = logging.getLogger(__name__)

DATA_DIR = Path(__file__).parent / "data"

Cell = Tuple[int, int]


class ModuleSpecError(ValueError):
    """Raised when a module asset is malformed or disagrees with the figures."""
    pass


# Local cycles per plaquette shape, relative to the anchor cell
SHAPES: Dict[str, Tuple[Cell, ...]] = {
    "square": ((0, 0), (0, 1), (1, 1), (1, 0)),
    "lower": ((0, 0), (1, 0), (1, 1)),
    "upper": ((0, 0), (0, 1), (1, 1)),
    "hexagon": ((0, 0), (0, 1), (0, 2), (1, 2), (1, 1), (1, 0)),
}

SHAPES_BY_KIND = {
    LatticeKind.SQUARE: {"square"},
    LatticeKind.TRIANGULAR: {"lower", "upper"},
    LatticeKind.HEXAGONAL: {"hexagon"},
}

TRANSFORMS = ("identity", "rot90", "rot180")

# Constraints stated outright in the proofs; a transcription must honour them
FIGURE_SPOT_CHECKS: Dict[str, Dict[str, Frustration]] = {
    "square": {"p5": Frustration.FRUSTRATED},
    "triangular": {
        "p11": Frustration.FRUSTRATED,
        "p5": Frustration.UNFRUSTRATED,
        "p4": Frustration.UNFRUSTRATED,
        "p1": Frustration.UNFRUSTRATED,
        "p3": Frustration.FRUSTRATED,
    },
    "hexagonal": {
        "p1": Frustration.FRUSTRATED,
        "p3": Frustration.UNFRUSTRATED,
        "p12": Frustration.FRUSTRATED,
        "p13": Frustration.FRUSTRATED,
        "p14": Frustration.FRUSTRATED,
    },
}

# (sites, specified plaquettes) of the built-in blocks
EXPECTED_SIZES = {"square": (25, 14), "triangular": (21, 19), "hexagonal": (54, 19)}


@dataclass(frozen=True)
class PlaquetteRef:
    """A labelled plaquette of the block: shape plus anchor cell."""

    label: str
    shape: str
    row: int
    col: int

    @property
    def cells(self) -> Tuple[Cell, ...]:
        return tuple((self.row + dr, self.col + dc) for dr, dc in SHAPES[self.shape])


@dataclass(frozen=True)
class Placement:
    """One block position inside a tiling period."""

    offset: Cell = (0, 0)
    transform: str = "identity"


@dataclass(frozen=True)
class ModuleSpec:
    """A block of sites with a frustration pattern on its plaquettes."""

    id: str
    kind: LatticeKind
    sites: Tuple[Cell, ...]
    expected_bonds: int
    plaquettes: Tuple[PlaquetteRef, ...]
    constraints: Dict[str, Frustration] = field(hash=False)
    orientations: Tuple[str, ...] = ("identity",)
    tiling_period: Cell = (0, 0)
    tiling_placements: Tuple[Placement, ...] = (Placement(),)
    description: str = ""

    # ------------------------------------------------------------------
    # Geometry
    # ------------------------------------------------------------------

    @property
    def height(self) -> int:
        return max(r for r, _ in self.sites) + 1

    @property
    def width(self) -> int:
        return max(c for _, c in self.sites) + 1

    @property
    def n_sites(self) -> int:
        return len(self.sites)

    @property
    def m(self) -> int:
        """Number of specified plaquettes."""
        return sum(1 for v in self.constraints.values() if v != Frustration.UNSPECIFIED)

    def transform(self, name: str) -> Callable[[Cell], Cell]:
        """Map a local cell to its image under an orientation transform."""
        h, w = self.height, self.width
        if name == "identity":
            return lambda cell: cell
        if name == "rot90":
            if h != w:
                raise ModuleSpecError(f"rot90 needs a square bounding box ({self.id} is {h}x{w})")
            return lambda cell: (cell[1], h - 1 - cell[0])
        if name == "rot180":
            return lambda cell: (h - 1 - cell[0], w - 1 - cell[1])
        raise ModuleSpecError(f"Unknown transform '{name}' (choose from {', '.join(TRANSFORMS)})")

    @cached_property
    def block_lattice(self) -> Lattice:
        """The block as a free lattice on its bounding box, other sites absent."""
        box = build_lattice(self.kind, self.height, self.width, BoundaryCondition.FREE)
        inside = {r * self.width + c for r, c in self.sites}
        return box.with_removed([s for s in box.sites if s not in inside], [])

    def local_id(self, cell: Cell) -> int:
        return cell[0] * self.width + cell[1]

    @cached_property
    def plaquette_ids(self) -> Dict[str, int]:
        """Figure label -> plaquette id in ``block_lattice``."""
        by_sites = self.block_lattice.plaquettes_by_sites
        out = {}
        for ref in self.plaquettes:
            key = frozenset(self.local_id(c) for c in ref.cells)
            if key not in by_sites:
                raise ModuleSpecError(f"{self.id}: plaquette {ref.label} is not a plaquette of the block")
            out[ref.label] = by_sites[key].id
        return out

    @property
    def pattern(self) -> FrustrationPattern:
        """Specified constraints keyed by block plaquette id."""
        return {
            self.plaquette_ids[label]: value
            for label, value in self.constraints.items()
            if value != Frustration.UNSPECIFIED
        }

    @property
    def refs_by_label(self) -> Dict[str, PlaquetteRef]:
        return {ref.label: ref for ref in self.plaquettes}

    def with_constraints(self, changes: Dict[str, Frustration]) -> "ModuleSpec":
        """Copy with some constraints replaced (used for negative controls)."""
        unknown = set(changes) - set(self.refs_by_label)
        if unknown:
            raise ModuleSpecError(f"{self.id} has no plaquettes labelled {sorted(unknown)}")
        constraints = dict(self.constraints)
        constraints.update({label: Frustration(v) for label, v in changes.items()})
        return ModuleSpec(
            id=f"{self.id}-modified",
            kind=self.kind,
            sites=self.sites,
            expected_bonds=self.expected_bonds,
            plaquettes=self.plaquettes,
            constraints=constraints,
            orientations=self.orientations,
            tiling_period=self.tiling_period,
            tiling_placements=self.tiling_placements,
            description=self.description,
        )

    # ------------------------------------------------------------------
    # Validation
    # ------------------------------------------------------------------

    def validate(self) -> None:
        """
        Check the asset against the lattice rules.

        Raises:
            ModuleSpecError: Duplicate sites, shapes of the wrong kind, labels
                without a plaquette, or a bond count that does not regenerate
        """
        if len(set(self.sites)) != len(self.sites):
            raise ModuleSpecError(f"{self.id}: duplicate sites")
        if min(r for r, _ in self.sites) != 0 or min(c for _, c in self.sites) != 0:
            raise ModuleSpecError(f"{self.id}: local chart must start at row 0 and column 0")

        allowed = SHAPES_BY_KIND.get(self.kind)
        if allowed is None:
            raise ModuleSpecError(f"{self.id}: no module shapes for {self.kind.value} lattices")
        for ref in self.plaquettes:
            if ref.shape not in allowed:
                raise ModuleSpecError(f"{self.id}: shape '{ref.shape}' does not fit a {self.kind.value} lattice")

        labels = {ref.label for ref in self.plaquettes}
        unknown = set(self.constraints) - labels
        if unknown:
            raise ModuleSpecError(f"{self.id}: constraints on unknown plaquettes {sorted(unknown)}")

        for name in self.orientations:
            self.transform(name)
        for placement in self.tiling_placements:
            self.transform(placement.transform)

        lattice = self.block_lattice
        if lattice.n_bonds != self.expected_bonds:
            raise ModuleSpecError(
                f"{self.id}: asset declares {self.expected_bonds} bonds, lattice rules give {lattice.n_bonds}"
            )
        self.plaquette_ids  # resolves every label or raises

    def check_figure(self) -> None:
        """
        Built-in specs only: sizes and the constraints named in the proofs.

        Raises:
            ModuleSpecError: On any disagreement
        """
        expected = EXPECTED_SIZES.get(self.id)
        if expected is not None and (self.n_sites, self.m) != expected:
            raise ModuleSpecError(
                f"{self.id}: expected {expected[0]} sites and {expected[1]} specified plaquettes, "
                f"found {self.n_sites} and {self.m}"
            )
        for label, value in FIGURE_SPOT_CHECKS.get(self.id, {}).items():
            actual = self.constraints.get(label, Frustration.UNSPECIFIED)
            if actual != value:
                raise ModuleSpecError(
                    f"{self.id}: plaquette {label} must be {value.value} (found {actual.value})"
                )

    # ------------------------------------------------------------------
    # Serialization
    # ------------------------------------------------------------------

    def to_dict(self) -> Dict[str, Any]:
        return {
            "id": self.id,
            "kind": self.kind.value,
            "description": self.description,
            "sites": [list(c) for c in self.sites],
            "bonds": self.expected_bonds,
            "plaquettes": {ref.label: [ref.shape, ref.row, ref.col] for ref in self.plaquettes},
            "constraints": {label: v.value for label, v in self.constraints.items()},
            "orientations": list(self.orientations),
            "tiling": {
                "period": list(self.tiling_period),
                "placements": [
                    {"offset": list(p.offset), "transform": p.transform} for p in self.tiling_placements
                ],
            },
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "ModuleSpec":
        try:
            tiling = data.get("tiling", {})
            spec = cls(
                id=str(data["id"]),
                kind=LatticeKind(data["kind"]),
                description=data.get("description", ""),
                sites=tuple((int(r), int(c)) for r, c in data["sites"]),
                expected_bonds=int(data["bonds"]),
                plaquettes=tuple(
                    PlaquetteRef(label=label, shape=shape, row=int(r), col=int(c))
                    for label, (shape, r, c) in data["plaquettes"].items()
                ),
                constraints={label: Frustration(v) for label, v in data["constraints"].items()},
                orientations=tuple(data.get("orientations", ["identity"])),
                tiling_period=tuple(tiling.get("period", [0, 0])),
                tiling_placements=tuple(
                    Placement(offset=tuple(p.get("offset", [0, 0])), transform=p.get("transform", "identity"))
                    for p in tiling.get("placements", [{}])
                ),
            )
        except (KeyError, TypeError, ValueError) as e:
            raise ModuleSpecError(f"Invalid module document: {e}") from e
        spec.validate()
        return spec


def load_spec(source: Union[str, Path, Dict[str, Any]]) -> ModuleSpec:
    """Load a spec from a JSON file path or an already parsed document."""
    if isinstance(source, dict):
        return ModuleSpec.from_dict(source)
    path = Path(source)
    if not path.exists():
        raise FileNotFoundError(f"Module spec not found: {path}")
    spec = ModuleSpec.from_dict(json.loads(path.read_text()))
    logger.debug(f"Loaded module spec '{spec.id}' from {path}")
    return spec


_builtin_specs: Optional[Dict[str, ModuleSpec]] = None


def builtin_specs() -> List[ModuleSpec]:
    """The square, triangular and hexagonal modules, each checked against the figures."""
    global _builtin_specs
    if _builtin_specs is None:
        specs = {}
        for name in ("square", "triangular", "hexagonal"):
            spec = load_spec(DATA_DIR / f"{name}.json")
            spec.check_figure()
            specs[name] = spec
        _builtin_specs = specs
        logger.debug(f"Loaded built-in module specs: {', '.join(specs)}")
    return list(_builtin_specs.values())


def get_spec(name_or_path: str) -> ModuleSpec:
    """Built-in spec by id, or a spec file by path."""
    for spec in builtin_specs():
        if spec.id == name_or_path:
            return spec
    if Path(name_or_path).suffix == ".json" or Path(name_or_path).exists():
        return load_spec(name_or_path)
    names = ", ".join(s.id for s in builtin_specs())
    raise ModuleSpecError(f"Unknown module spec '{name_or_path}' (built-in: {names})")
