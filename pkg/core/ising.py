"""
Energy and frustration algebra of the zero-field +-1 Ising model.

Couplings and spins are packed bit vectors: bit 0 means +1 and bit 1 means -1,
so a bond is unhappy exactly when J_bit ^ s_i ^ s_j == 1.
"""

import json
import logging
from dataclasses import dataclass
from enum import Enum
from functools import cached_property
from typing import Any, Dict, FrozenSet, Iterable, Mapping, Sequence, Tuple

import numpy as np

from core.lattice import Bond, Lattice, LatticeKind, boundary_bonds, make_bond

logger = logging.getLogger(__name__)


class IsingError(ValueError):
    """Raised when couplings, spins or curves do not fit the lattice."""
    pass


class Frustration(str, Enum):
    FRUSTRATED = "F"
    UNFRUSTRATED = "U"
    UNSPECIFIED = "-"


# plaquette id -> frustration
FrustrationPattern = Dict[int, Frustration]


def _frozen(bits: np.ndarray) -> np.ndarray:
    bits = np.ascontiguousarray(bits, dtype=np.uint8)
    bits.setflags(write=False)
    return bits


def _signs_to_bits(values: Iterable[int]) -> np.ndarray:
    arr = np.asarray(list(values), dtype=np.int64)
    if arr.size and not np.all(np.isin(arr, (-1, 1))):
        raise IsingError("Values must be +1 or -1")
    return (arr == -1).astype(np.uint8)


class CouplingConfig:
    """Assignment of +-1 to every bond of one lattice (J)."""

    def __init__(self, bonds: Tuple[Bond, ...], bits: np.ndarray):
        if len(bits) != len(bonds):
            raise IsingError(f"Expected {len(bonds)} coupling bits, got {len(bits)}")
        self._bonds = bonds
        self._bits = _frozen(bits)

    @property
    def bonds(self) -> Tuple[Bond, ...]:
        return self._bonds

    @property
    def bits(self) -> np.ndarray:
        """1 where J = -1."""
        return self._bits

    @cached_property
    def signs(self) -> np.ndarray:
        return 1 - 2 * self._bits.astype(np.int64)

    @property
    def values(self) -> Dict[Bond, int]:
        return {b: int(s) for b, s in zip(self._bonds, self.signs)}

    @property
    def n_negative(self) -> int:
        return int(self._bits.sum())

    def value(self, i: int, j: int) -> int:
        return self.values[make_bond(i, j)]

    @classmethod
    def uniform(cls, lattice: Lattice, sign: int = 1) -> "CouplingConfig":
        if sign not in (-1, 1):
            raise IsingError(f"sign must be +1 or -1 (got {sign})")
        return cls(lattice.bonds, np.full(lattice.n_bonds, 1 if sign == -1 else 0, dtype=np.uint8))

    @classmethod
    def from_signs(cls, lattice: Lattice, signs: Sequence[int]) -> "CouplingConfig":
        return cls(lattice.bonds, _signs_to_bits(signs))

    @classmethod
    def from_values(cls, lattice: Lattice, values: Mapping[Bond, int]) -> "CouplingConfig":
        normalized = {make_bond(*b): v for b, v in values.items()}
        if set(normalized) != set(lattice.bonds):
            raise IsingError("Coupling values must be defined on exactly the lattice's bonds")
        return cls(lattice.bonds, _signs_to_bits(normalized[b] for b in lattice.bonds))

    @classmethod
    def random(cls, lattice: Lattice, p: float, rng: np.random.Generator) -> "CouplingConfig":
        """Each bond independently negative with probability ``p``."""
        if not 0.0 <= p <= 1.0:
            raise IsingError(f"p must lie in [0, 1] (got {p})")
        return cls(lattice.bonds, (rng.random(lattice.n_bonds) < p).astype(np.uint8))

    def with_bits(self, bits: np.ndarray) -> "CouplingConfig":
        return CouplingConfig(self._bonds, bits)

    def to_dict(self) -> Dict[str, Any]:
        return {"bonds": [[int(i), int(j), int(s)] for (i, j), s in zip(self._bonds, self.signs)]}

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, lattice: Lattice, data: Dict[str, Any]) -> "CouplingConfig":
        try:
            values = {make_bond(int(i), int(j)): int(s) for i, j, s in data["bonds"]}
        except (KeyError, TypeError, ValueError) as e:
            raise IsingError(f"Invalid coupling document: {e}") from e
        return cls.from_values(lattice, values)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, CouplingConfig):
            return NotImplemented
        return self._bonds == other._bonds and np.array_equal(self._bits, other._bits)

    def __hash__(self) -> int:
        return hash((self._bonds, self._bits.tobytes()))

    def __repr__(self) -> str:
        return f"CouplingConfig({len(self._bonds)} bonds, {self.n_negative} negative)"


class SpinState:
    """Assignment of +-1 to every present site (sigma)."""

    def __init__(self, sites: Tuple[int, ...], bits: np.ndarray):
        # bits cover the full id space; absent sites are held at 0
        bits = np.array(bits, dtype=np.uint8)
        present = np.zeros(len(bits), dtype=bool)
        present[list(sites)] = True
        bits[~present] = 0
        self._sites = sites
        self._bits = _frozen(bits)

    @property
    def sites(self) -> Tuple[int, ...]:
        return self._sites

    @property
    def bits(self) -> np.ndarray:
        """Indexed by site id; 1 where sigma = -1."""
        return self._bits

    @cached_property
    def signs(self) -> np.ndarray:
        return 1 - 2 * self._bits.astype(np.int64)

    @property
    def values(self) -> Dict[int, int]:
        return {s: int(self.signs[s]) for s in self._sites}

    def spin(self, site: int) -> int:
        return int(self.signs[site])

    @classmethod
    def all_up(cls, lattice: Lattice) -> "SpinState":
        return cls(lattice.sites, np.zeros(lattice.n_grid_sites, dtype=np.uint8))

    @classmethod
    def from_bits(cls, lattice: Lattice, bits: np.ndarray) -> "SpinState":
        if len(bits) != lattice.n_grid_sites:
            raise IsingError(f"Expected {lattice.n_grid_sites} spin bits, got {len(bits)}")
        return cls(lattice.sites, bits)

    @classmethod
    def from_values(cls, lattice: Lattice, values: Mapping[int, int]) -> "SpinState":
        if set(values) != set(lattice.sites):
            raise IsingError("Spin values must be defined on exactly the present sites")
        bits = np.zeros(lattice.n_grid_sites, dtype=np.uint8)
        for s, v in values.items():
            if v not in (-1, 1):
                raise IsingError(f"Spin at site {s} must be +1 or -1 (got {v})")
            bits[s] = 1 if v == -1 else 0
        return cls(lattice.sites, bits)

    @classmethod
    def from_signs(cls, lattice: Lattice, signs: Sequence[int]) -> "SpinState":
        """Signs listed in present-site order."""
        if len(signs) != lattice.n_sites:
            raise IsingError(f"Expected {lattice.n_sites} spins, got {len(signs)}")
        return cls.from_values(lattice, dict(zip(lattice.sites, signs)))

    @classmethod
    def random(cls, lattice: Lattice, rng: np.random.Generator) -> "SpinState":
        return cls(lattice.sites, rng.integers(0, 2, size=lattice.n_grid_sites, dtype=np.uint8))

    def negate(self) -> "SpinState":
        return SpinState(self._sites, self._bits ^ 1)

    def restrict(self, subset: Iterable[int]) -> Tuple[int, ...]:
        """Spin bits on ``subset`` in increasing site order."""
        return tuple(int(self._bits[s]) for s in sorted(subset))

    def to_dict(self) -> Dict[str, Any]:
        return {"spins": [int(self.signs[s]) for s in self._sites]}

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, lattice: Lattice, data: Dict[str, Any]) -> "SpinState":
        try:
            return cls.from_signs(lattice, [int(v) for v in data["spins"]])
        except (KeyError, TypeError) as e:
            raise IsingError(f"Invalid spin document: {e}") from e

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, SpinState):
            return NotImplemented
        return self._sites == other._sites and np.array_equal(self._bits, other._bits)

    def __hash__(self) -> int:
        return hash(self._bits.tobytes())

    def __repr__(self) -> str:
        down = int(self._bits.sum())
        return f"SpinState({len(self._sites)} sites, {down} down)"


@dataclass(frozen=True)
class Curve:
    """Sequence of sites s_0..s_n with every consecutive pair a bond (n >= 1)."""

    sites: Tuple[int, ...]

    @property
    def length(self) -> int:
        return len(self.sites) - 1

    @property
    def closed(self) -> bool:
        return len(self.sites) >= 2 and self.sites[0] == self.sites[-1]

    def steps(self) -> Iterable[Bond]:
        for a, b in zip(self.sites[:-1], self.sites[1:]):
            yield make_bond(a, b)

    @classmethod
    def around(cls, cycle: Sequence[int]) -> "Curve":
        """Closed curve visiting a cyclic site list (e.g. a plaquette)."""
        return cls(tuple(cycle) + (cycle[0],))

    def concat(self, other: "Curve") -> "Curve":
        if self.sites[-1] != other.sites[0]:
            raise IsingError("Curves can only be joined end to start")
        return Curve(self.sites + other.sites[1:])


# ----------------------------------------------------------------------
# Checks
# ----------------------------------------------------------------------

def _check_coupling(lattice: Lattice, couplings: CouplingConfig) -> None:
    if couplings.bonds != lattice.bonds:
        raise IsingError("Coupling configuration is not defined on this lattice's bonds")


def _check_spins(lattice: Lattice, sigma: SpinState) -> None:
    if sigma.sites != lattice.sites or len(sigma.bits) != lattice.n_grid_sites:
        raise IsingError("Spin state is not defined on this lattice's sites")


def _check_subset(lattice: Lattice, subset: Iterable[int]) -> FrozenSet[int]:
    subset = frozenset(subset)
    missing = [s for s in subset if not lattice.has_site(s)]
    if missing:
        raise IsingError(f"Sites {sorted(missing)[:5]} are not present in the lattice")
    return subset


# ----------------------------------------------------------------------
# Energy
# ----------------------------------------------------------------------

def unhappy_mask(lattice: Lattice, couplings: CouplingConfig, sigma: SpinState) -> np.ndarray:
    """Boolean array over bonds, True where J_ij s_i s_j = -1."""
    _check_coupling(lattice, couplings)
    _check_spins(lattice, sigma)
    if lattice.n_bonds == 0:
        return np.zeros(0, dtype=bool)
    ends = lattice.bond_array
    return (couplings.bits ^ sigma.bits[ends[:, 0]] ^ sigma.bits[ends[:, 1]]).astype(bool)


def unhappy_bonds(lattice: Lattice, couplings: CouplingConfig, sigma: SpinState) -> FrozenSet[Bond]:
    """The set U of unhappy bonds."""
    mask = unhappy_mask(lattice, couplings, sigma)
    return frozenset(b for b, bad in zip(lattice.bonds, mask) if bad)


def energy_by_sum(lattice: Lattice, couplings: CouplingConfig, sigma: SpinState) -> int:
    """H = -sum J_ij s_i s_j, evaluated term by term."""
    _check_coupling(lattice, couplings)
    _check_spins(lattice, sigma)
    if lattice.n_bonds == 0:
        return 0
    ends = lattice.bond_array
    return int(-np.sum(couplings.signs * sigma.signs[ends[:, 0]] * sigma.signs[ends[:, 1]]))


def energy_by_unhappy(lattice: Lattice, couplings: CouplingConfig, sigma: SpinState) -> int:
    """H = 2|U| - |B|."""
    return 2 * int(unhappy_mask(lattice, couplings, sigma).sum()) - lattice.n_bonds


def energy(lattice: Lattice, couplings: CouplingConfig, sigma: SpinState) -> int:
    """
    Exact energy of a spin state.

    Both the summation and the unhappy-bond count are evaluated; they must agree.
    """
    direct = energy_by_sum(lattice, couplings, sigma)
    counted = energy_by_unhappy(lattice, couplings, sigma)
    if direct != counted:
        raise ArithmeticError(f"Energy identity violated: sum={direct}, 2|U|-|B|={counted}")
    return direct


def unhappy_per_site(lattice: Lattice, couplings: CouplingConfig, sigma: SpinState) -> Dict[int, int]:
    """Number of unhappy bonds touching each present site."""
    mask = unhappy_mask(lattice, couplings, sigma)
    counts = np.zeros(lattice.n_grid_sites, dtype=np.int64)
    if lattice.n_bonds:
        ends = lattice.bond_array[mask]
        np.add.at(counts, ends[:, 0], 1)
        np.add.at(counts, ends[:, 1], 1)
    return {s: int(counts[s]) for s in lattice.sites}


def max_unhappy_per_site(lattice: Lattice, couplings: CouplingConfig, sigma: SpinState) -> int:
    counts = unhappy_per_site(lattice, couplings, sigma)
    return max(counts.values()) if counts else 0


# ----------------------------------------------------------------------
# Curves and plaquettes
# ----------------------------------------------------------------------

def curve_parity_check(
    lattice: Lattice, couplings: CouplingConfig, sigma: SpinState, curve: Curve
) -> bool:
    """
    Parity of negative-J bonds along a closed curve equals parity of unhappy ones.

    Bonds traversed several times are counted with multiplicity. Always true
    for valid input; meant to be asserted.

    Raises:
        IsingError: If the curve is open or steps off the lattice's bonds
    """
    if not curve.closed or curve.length < 1:
        raise IsingError("curve_parity_check needs a closed curve")
    unhappy = unhappy_mask(lattice, couplings, sigma)
    negatives = 0
    bad = 0
    for step in curve.steps():
        if not lattice.has_bond(*step):
            raise IsingError(f"Curve step {step} is not a bond of the lattice")
        k = lattice.bond_id(*step)
        negatives += int(couplings.bits[k])
        bad += int(unhappy[k])
    return negatives % 2 == bad % 2


def plaquette_bond_ids(lattice: Lattice) -> Dict[int, Tuple[int, ...]]:
    """Bond indices of every plaquette, keyed by plaquette id."""
    return {p.id: tuple(lattice.bond_id(*b) for b in p.bonds) for p in lattice.plaquettes}


def plaquette_frustration(lattice: Lattice, couplings: CouplingConfig) -> FrustrationPattern:
    """
    Frustrated iff the product of J around the plaquette is -1.

    Raises:
        IsingError: For General lattices that carry no plaquettes
    """
    _check_coupling(lattice, couplings)
    if lattice.kind == LatticeKind.GENERAL and not lattice.plaquettes:
        raise IsingError("General lattice has no plaquettes to evaluate")
    pattern: FrustrationPattern = {}
    for pid, ids in plaquette_bond_ids(lattice).items():
        odd = int(couplings.bits[list(ids)].sum()) % 2 == 1
        pattern[pid] = Frustration.FRUSTRATED if odd else Frustration.UNFRUSTRATED
    return pattern


def frustrated_plaquettes(lattice: Lattice, couplings: CouplingConfig) -> FrozenSet[int]:
    pattern = plaquette_frustration(lattice, couplings)
    return frozenset(pid for pid, f in pattern.items() if f == Frustration.FRUSTRATED)


def gauge_transform(lattice: Lattice, couplings: CouplingConfig, site: int) -> CouplingConfig:
    """Flip every coupling touching ``site``."""
    _check_coupling(lattice, couplings)
    bits = couplings.bits.copy()
    bits[list(lattice.incident_bonds(site))] ^= 1
    return couplings.with_bits(bits)


# ----------------------------------------------------------------------
# Flips and entropic sets
# ----------------------------------------------------------------------

def flip(sigma: SpinState, subset: Iterable[int]) -> SpinState:
    """sigma_S: spins in ``subset`` negated, all others unchanged."""
    subset = list(subset)
    present = set(sigma.sites)
    bad = [s for s in subset if s not in present]
    if bad:
        raise IsingError(f"Sites {sorted(bad)[:5]} are not present in the spin state")
    bits = sigma.bits.copy()
    if subset:
        bits[subset] ^= 1
    return SpinState(sigma.sites, bits)


def contour_split(
    lattice: Lattice, couplings: CouplingConfig, sigma: SpinState, subset: Iterable[int]
) -> Tuple[int, int]:
    """(|B_S cap U|, |B_S minus U|)."""
    subset = _check_subset(lattice, subset)
    unhappy = unhappy_mask(lattice, couplings, sigma)
    contour = boundary_bonds(lattice, subset)
    bad = sum(int(unhappy[lattice.bond_id(*b)]) for b in contour)
    return bad, len(contour) - bad


def is_entropic(
    lattice: Lattice, couplings: CouplingConfig, sigma: SpinState, subset: Iterable[int]
) -> bool:
    """
    True iff the contour bonds of ``subset`` split evenly into unhappy and happy.

    The empty set and the whole lattice are entropic (B_S is empty); callers
    that need a nontrivial set exclude them. The answer is cross-checked
    against a direct energy comparison.
    """
    subset = _check_subset(lattice, subset)
    bad, good = contour_split(lattice, couplings, sigma, subset)
    verdict = bad == good
    same_energy = energy(lattice, couplings, flip(sigma, subset)) == energy(lattice, couplings, sigma)
    if verdict != same_energy:
        raise ArithmeticError(f"Entropic-set identity violated for S of size {len(subset)}")
    return verdict
