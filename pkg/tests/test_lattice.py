"""
Unit tests for lattice construction, dilution and contours.

Run with: pytest tests/test_lattice.py -v
"""

import networkx as nx
import pytest

from core.lattice import (
    BoundaryCondition,
    DilutionParams,
    Lattice,
    LatticeError,
    LatticeKind,
    boundary_bonds,
    build_lattice,
    chain_lattice,
    dilute,
    general_lattice,
    is_closed_curve,
)
from tests.helpers import random_lattice

FREE = BoundaryCondition.FREE
CYL = BoundaryCondition.CYLINDRICAL
TORUS = BoundaryCondition.TOROIDAL


class TestBuildLattice:
    """Counts of sites, bonds and plaquettes per kind and boundary."""

    def test_smallest_square(self, square_2x2):
        assert square_2x2.n_sites == 4
        assert square_2x2.n_bonds == 4
        assert len(square_2x2.plaquettes) == 1

    def test_square_5x5_free(self, square_5x5):
        assert square_5x5.n_sites == 25
        assert square_5x5.n_bonds == 40
        assert len(square_5x5.plaquettes) == 16

    def test_square_3x3_torus(self):
        lattice = build_lattice(LatticeKind.SQUARE, 3, 3, TORUS)
        assert lattice.n_sites == 9
        assert lattice.n_bonds == 18
        assert len(lattice.plaquettes) == 9

    @pytest.mark.parametrize("rows,cols", [(2, 3), (3, 4), (4, 7), (6, 6)])
    def test_square_free_formula(self, rows, cols):
        lattice = build_lattice(LatticeKind.SQUARE, rows, cols, FREE)
        assert lattice.n_bonds == 2 * rows * cols - rows - cols
        assert len(lattice.plaquettes) == (rows - 1) * (cols - 1)

    def test_square_cylinder(self):
        lattice = build_lattice(LatticeKind.SQUARE, 4, 5, CYL)
        # rings of 4 in every column plus 4 rows of 4 horizontal bonds
        assert lattice.n_bonds == 4 * 5 + 4 * 4
        assert len(lattice.plaquettes) == 4 * 4

    @pytest.mark.parametrize("rows,cols", [(3, 3), (4, 5)])
    def test_triangular_free(self, rows, cols):
        lattice = build_lattice(LatticeKind.TRIANGULAR, rows, cols, FREE)
        assert lattice.n_bonds == 3 * rows * cols - 2 * rows - 2 * cols + 1
        assert len(lattice.plaquettes) == 2 * (rows - 1) * (cols - 1)
        assert all(len(p.sites) == 3 for p in lattice.plaquettes)

    def test_triangular_torus(self):
        lattice = build_lattice(LatticeKind.TRIANGULAR, 3, 3, TORUS)
        assert lattice.n_bonds == 27
        assert len(lattice.plaquettes) == 18

    def test_hexagonal_brick_wall(self):
        lattice = build_lattice(LatticeKind.HEXAGONAL, 4, 6, FREE)
        assert lattice.n_sites == 24
        assert lattice.n_bonds == 20 + 9
        assert len(lattice.plaquettes) == 6
        assert all(len(p.sites) == 6 for p in lattice.plaquettes)

    def test_coordination_numbers(self):
        square = build_lattice(LatticeKind.SQUARE, 5, 5, FREE)
        triangular = build_lattice(LatticeKind.TRIANGULAR, 5, 5, FREE)
        hexagonal = build_lattice(LatticeKind.HEXAGONAL, 4, 6, FREE)
        assert square.degree(square.site_id(2, 2)) == 4
        assert triangular.degree(triangular.site_id(2, 2)) == 6
        assert hexagonal.degree(hexagonal.site_id(1, 2)) == 3

    def test_plaquettes_are_closed_curves(self):
        for kind in (LatticeKind.SQUARE, LatticeKind.TRIANGULAR, LatticeKind.HEXAGONAL):
            lattice = build_lattice(kind, 4, 4, TORUS)
            for p in lattice.plaquettes:
                assert is_closed_curve(lattice, p.sites + (p.sites[0],))

    def test_networkx_view(self, square_5x5):
        graph = square_5x5.to_networkx()
        assert graph.number_of_nodes() == 25
        assert graph.number_of_edges() == 40


class TestBuildLatticeErrors:
    """Rejected dimensions and kinds."""

    def test_two_wrapped_columns_double_bonds(self):
        with pytest.raises(LatticeError):
            build_lattice(LatticeKind.SQUARE, 3, 2, TORUS)

    def test_hexagonal_odd_wrap(self):
        with pytest.raises(LatticeError):
            build_lattice(LatticeKind.HEXAGONAL, 3, 4, CYL)

    def test_too_small(self):
        with pytest.raises(LatticeError):
            build_lattice(LatticeKind.SQUARE, 1, 5, FREE)

    def test_general_has_no_generator(self):
        with pytest.raises(LatticeError):
            build_lattice(LatticeKind.GENERAL, 3, 3, FREE)

    def test_disconnected_general_lattice(self):
        with pytest.raises(LatticeError):
            general_lattice(4, [(0, 1), (2, 3)])

    def test_lattice_error_is_value_error(self):
        with pytest.raises(ValueError):
            build_lattice(LatticeKind.SQUARE, 0, 0, FREE)


class TestGeneralLattices:
    """The graph escape hatch."""

    def test_chain(self):
        chain = chain_lattice(6)
        assert chain.kind == LatticeKind.GENERAL
        assert chain.n_sites == 6
        assert chain.n_bonds == 5
        assert chain.plaquettes == ()

    def test_general_with_plaquette(self):
        lattice = general_lattice(3, [(0, 1), (1, 2), (0, 2)], plaquettes=[[0, 1, 2]])
        assert len(lattice.plaquettes) == 1


class TestDilution:
    """Random site/bond removal keeping the largest component."""

    def test_no_dilution_is_identity(self, square_5x5):
        assert dilute(square_5x5, DilutionParams(p_s=1.0, p_b=1.0, seed=3)) == square_5x5

    def test_empty_lattice_rejected(self, square_5x5):
        with pytest.raises(LatticeError):
            dilute(square_5x5, DilutionParams(p_s=0.0, p_b=1.0, seed=3))

    def test_reproducible_with_seed(self, square_5x5):
        params = DilutionParams(p_s=0.9, p_b=0.9, seed=42)
        first = dilute(square_5x5, params)
        second = dilute(square_5x5, params)
        assert first == second
        assert (first.n_sites, first.n_bonds) == (second.n_sites, second.n_bonds)
        assert first.n_sites <= 25 and first.n_bonds <= 40

    def test_result_is_connected(self):
        lattice = build_lattice(LatticeKind.TRIANGULAR, 6, 6, FREE)
        diluted = dilute(lattice, DilutionParams(p_s=0.7, p_b=0.8, seed=1))
        assert nx.is_connected(diluted.to_networkx())
        assert diluted.is_diluted

    def test_rejects_double_dilution(self, square_5x5):
        once = dilute(square_5x5, DilutionParams(p_s=0.8, p_b=1.0, seed=7))
        if once.is_diluted:
            with pytest.raises(LatticeError):
                dilute(once, DilutionParams(p_s=0.8, p_b=1.0, seed=7))

    def test_invalid_probability(self):
        with pytest.raises(LatticeError):
            DilutionParams(p_s=1.5)


class TestBoundaryBonds:
    """Contour bonds B_S."""

    def test_empty_set(self, square_2x2):
        assert boundary_bonds(square_2x2, []) == frozenset()

    def test_whole_lattice(self, square_5x5):
        assert boundary_bonds(square_5x5, square_5x5.sites) == frozenset()

    def test_corner_site(self, square_2x2):
        contour = boundary_bonds(square_2x2, [0])
        assert contour == frozenset({(0, 1), (0, 2)})

    def test_absent_site_rejected(self, square_2x2):
        with pytest.raises(LatticeError):
            boundary_bonds(square_2x2, [17])

    def test_complement_has_same_contour(self, rng):
        seen = set()
        for _ in range(500):
            lattice = random_lattice(rng, max_sites=24)
            seen.add((lattice.kind, lattice.boundary))
            mask = rng.random(lattice.n_sites) < 0.5
            subset = {s for s, keep in zip(lattice.sites, mask) if keep}
            complement = set(lattice.sites) - subset
            assert boundary_bonds(lattice, subset) == boundary_bonds(lattice, complement)
        assert len(seen) == 9


class TestSerialization:
    """JSON documents rebuild the same lattice."""

    @pytest.mark.parametrize("kind,boundary", [
        (LatticeKind.SQUARE, FREE),
        (LatticeKind.TRIANGULAR, CYL),
        (LatticeKind.HEXAGONAL, TORUS),
    ])
    def test_round_trip(self, kind, boundary):
        lattice = build_lattice(kind, 4, 6, boundary)
        assert Lattice.from_json(lattice.to_json()) == lattice

    def test_diluted_round_trip(self, square_5x5):
        diluted = dilute(square_5x5, DilutionParams(p_s=0.85, p_b=0.85, seed=11))
        assert Lattice.from_json(diluted.to_json()) == diluted

    def test_general_round_trip(self):
        chain = chain_lattice(5)
        assert Lattice.from_dict(chain.to_dict()) == chain

    def test_invalid_document(self):
        with pytest.raises(LatticeError):
            Lattice.from_dict({"kind": "pentagonal", "rows": 2, "cols": 2})
