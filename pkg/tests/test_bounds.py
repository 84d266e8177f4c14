"""
Unit tests for the counting lemma, module probabilities and the bound report.

Run with: pytest tests/test_bounds.py -v
"""

import math
from fractions import Fraction

import numpy as np
import pandas as pd
import pytest

from bounds import (
    BoundParameterError,
    degeneracy_lower_bound,
    density_constant,
    empirical_module_density,
    entropy_density,
    exact_match_probability,
    f_of_half,
    hoeffding_k0,
    lemma_counts,
    reports_to_csv,
    bound_report,
    write_reports,
)
from bounds.estimators import block_patterns
from bounds.report import CSV_COLUMNS
from core.ising import CouplingConfig
from core.lattice import BoundaryCondition, LatticeKind, build_lattice
from registry import PlacementError, embed_block, get_spec, load_spec, realize_coupling
from solvers.transfer_matrix import transfer_matrix_count
from tests.helpers import tiny_document

FREE = BoundaryCondition.FREE


def union_probability(spec) -> Fraction:
    """P(some orientation holds) at p = 1/2 by inclusion-exclusion over two orientations."""
    patterns = block_patterns(spec)
    single = Fraction(1, 2 ** spec.m)
    if len(patterns) == 1:
        return single
    first, second = patterns
    merged = {}
    for pattern in (first, second):
        for bonds, parity in zip(pattern.plaquette_bonds, pattern.parities):
            key = tuple(sorted(bonds))
            if merged.setdefault(key, parity) != parity:
                return 2 * single
    return 2 * single - Fraction(1, 2 ** len(merged))


class TestLemmaCounts:
    """Parity split of completions of a curve."""

    def test_no_fixed_bonds(self):
        assert lemma_counts(4, 0, 0) == (8, 8)

    def test_one_free_bond(self):
        assert lemma_counts(3, 2, 1) == (1, 1)

    def test_exhaustive_small_curves(self):
        for n in range(1, 21):
            for q in range(n):
                for negatives in {0, min(1, q)}:
                    assert lemma_counts(n, q, negatives) == (2 ** (n - q - 1),) * 2

    @pytest.mark.parametrize("n,q,negatives", [(3, 3, 0), (4, 5, 0), (0, 0, 0), (5, 2, 3), (5, 2, -1)])
    def test_invalid(self, n, q, negatives):
        with pytest.raises(BoundParameterError):
            lemma_counts(n, q, negatives)


class TestModuleProbability:
    """f(1/2) exactly and f(p) by sampling."""

    @pytest.mark.parametrize("name,m", [("square", 14), ("triangular", 19), ("hexagonal", 19)])
    def test_f_of_half(self, name, m):
        assert f_of_half(get_spec(name)) == Fraction(1, 2 ** m)

    def test_exact_enumeration_agrees_on_small_block(self):
        spec = load_spec(tiny_document("F"))
        assert exact_match_probability(spec) == f_of_half(spec) == Fraction(1, 16)

    def test_exact_enumeration_away_from_half(self):
        unfrustrated = load_spec(tiny_document("U"))
        frustrated = load_spec(tiny_document("F"))
        assert exact_match_probability(unfrustrated, p=0) == 1
        assert exact_match_probability(frustrated, p=0) == 0
        assert exact_match_probability(frustrated, p=1) == 0

    def test_exact_enumeration_refuses_large_blocks(self):
        with pytest.raises(ValueError):
            exact_match_probability(get_spec("square"))

    def test_ferromagnetic_limit(self):
        estimate = empirical_module_density(get_spec("square"), p=0.0, n_samples=10_000)
        assert estimate.matches == 0
        assert estimate.estimate == 0.0

    def test_square_at_half(self):
        spec = get_spec("square")
        n = 1_000_000
        estimate = empirical_module_density(spec, p=0.5, n_samples=n, seed=1, batch_size=200_000)
        exact = float(union_probability(spec))
        assert abs(estimate.estimate - exact) <= 4 * math.sqrt(exact * (1 - exact) / n)
        assert estimate.stderr > 0

    def test_seeded_and_worker_independent(self):
        spec = get_spec("triangular")
        serial = empirical_module_density(spec, p=0.3, n_samples=60_000, seed=5, threads=1, batch_size=20_000)
        again = empirical_module_density(spec, p=0.3, n_samples=60_000, seed=5, threads=1, batch_size=20_000)
        parallel = empirical_module_density(spec, p=0.3, n_samples=60_000, seed=5, threads=2, batch_size=20_000)
        assert serial.matches == again.matches == parallel.matches

    def test_invalid_arguments(self):
        with pytest.raises(ValueError):
            empirical_module_density(get_spec("square"), p=1.5, n_samples=10)
        with pytest.raises(ValueError):
            empirical_module_density(get_spec("square"), p=0.5, n_samples=0)

    @pytest.mark.slow
    def test_square_acceptance(self):
        spec = get_spec("square")
        n = 100_000_000
        estimate = empirical_module_density(spec, p=0.5, n_samples=n, seed=2024)
        exact = float(union_probability(spec))
        assert abs(estimate.estimate - exact) <= 3 * math.sqrt(exact * (1 - exact) / n)


class TestDensityConstants:
    """The epsilon -> 0 entropy-density constants."""

    @pytest.mark.parametrize("name,constant,approx", [
        ("square", Fraction(1, 204800), 4.883e-6),
        ("triangular", Fraction(1, 11010048), 9.083e-8),
        ("hexagonal", Fraction(1, 28311552), 3.532e-8),
    ])
    def test_constant(self, name, constant, approx):
        spec = get_spec(name)
        assert density_constant(spec) == constant
        assert float(constant) == pytest.approx(approx, rel=1e-3)
        report = bound_report(spec, lattice_size=spec.n_sites * 1000)
        assert report.density_limit == str(constant)
        assert report.method == "closed_form"


class TestBoundReport:
    """Degeneracy exponent, density and Hoeffding threshold."""

    def test_square_closed_form(self):
        report = bound_report(get_spec("square"), lattice_size=204800)
        assert report.k == 8192
        assert report.q == 2 ** -13
        assert report.q_exact == "1/8192"
        assert report.f_p == 2 ** -14
        assert report.exponent_lower == pytest.approx(0.99)
        assert report.entropy_density_lower == pytest.approx(0.99 / 204800)
        assert report.k0 == hoeffding_k0(2 ** -13, 0.01, 0.01)
        assert report.samples is None and report.stderr is None

    def test_hoeffding(self):
        assert hoeffding_k0(0.5, 0.1, 0.5) == 139
        assert hoeffding_k0(0.0, 0.1, 0.5) is None
        assert hoeffding_k0(0.25, 0.1, 0.5) > hoeffding_k0(0.5, 0.1, 0.5)

    def test_exponent_grows_with_lattice(self):
        spec = get_spec("triangular")
        exponents = [bound_report(spec, lattice_size=n).exponent_lower for n in (21, 210, 2100, 21000)]
        assert exponents == sorted(exponents)
        assert exponents[0] < exponents[-1]

    def test_exponent_shrinks_with_epsilon(self):
        spec = get_spec("hexagonal")
        exponents = [bound_report(spec, 54000, epsilon=e).exponent_lower for e in (0.01, 0.1, 0.5, 0.9)]
        assert exponents == sorted(exponents, reverse=True)

    def test_density_independent_of_size_for_whole_blocks(self):
        spec = get_spec("square")
        small = bound_report(spec, lattice_size=25 * 40)
        large = bound_report(spec, lattice_size=25 * 40_000)
        assert small.entropy_density_lower == pytest.approx(large.entropy_density_lower)

    def test_lattice_smaller_than_block(self):
        report = bound_report(get_spec("hexagonal"), lattice_size=10)
        assert report.k == 0
        assert report.exponent_lower == 0.0

    def test_dilution(self):
        spec = get_spec("square")
        report = bound_report(spec, lattice_size=25_000, p_s=0.9, p_b=0.95)
        assert report.q == pytest.approx(2 ** -13 * 0.9 ** 25 * 0.95 ** 40)
        assert report.q_exact is None
        assert report.density_limit is None

    def test_monte_carlo(self):
        spec = get_spec("square")
        report = bound_report(spec, lattice_size=25_000, p=0.3, n_samples=100_000, seed=4)
        assert report.method == "monte_carlo"
        assert report.samples == 100_000
        assert report.stderr is not None
        assert report.f_p == pytest.approx(report.q / 2)
        assert report.density_limit is None

    def test_zero_probability_has_no_threshold(self):
        report = bound_report(get_spec("square"), lattice_size=2500, p=0.0, n_samples=1000)
        assert report.q == 0.0
        assert report.k0 is None

    @pytest.mark.parametrize("kwargs", [
        {"epsilon": 0.0},
        {"epsilon": 1.0},
        {"delta": 1.5},
        {"p": -0.1},
        {"p_b": 2.0},
        {"lattice_size": 0},
    ])
    def test_invalid_parameters(self, kwargs):
        arguments = {"lattice_size": 2500}
        arguments.update(kwargs)
        with pytest.raises(BoundParameterError):
            bound_report(get_spec("square"), **arguments)

    def test_csv_layout(self, tmp_path):
        reports = [bound_report(spec, spec.n_sites * 100) for spec in map(get_spec, ("square", "triangular"))]
        header = reports_to_csv(reports).splitlines()[0]
        assert header.split(",") == CSV_COLUMNS

        frame = pd.read_csv(write_reports(reports, tmp_path / "bounds.csv"))
        assert list(frame["spec"]) == ["square", "triangular"]
        assert frame["density"].iloc[0] == pytest.approx(reports[0].entropy_density_lower)

    def test_json_output(self, tmp_path):
        report = bound_report(get_spec("square"), 2500)
        path = write_reports([report], tmp_path / "bounds.json")
        text = path.read_text()
        assert '"density_limit": "1/204800"' in text
        assert '"spec_id": "square"' in text


class TestEntropyDensity:
    """log2 of an exact degeneracy per site."""

    def test_two_states_on_25_sites(self, square_5x5):
        assert entropy_density(square_5x5, CouplingConfig.uniform(square_5x5), 2) == pytest.approx(0.04)

    def test_huge_counts(self):
        lattice = build_lattice(LatticeKind.SQUARE, 20, 25, FREE)
        assert entropy_density(lattice, CouplingConfig.uniform(lattice), 2 ** 1000) == pytest.approx(2.0)

    def test_ferromagnet(self):
        lattice = build_lattice(LatticeKind.TRIANGULAR, 4, 9, FREE)
        couplings = CouplingConfig.uniform(lattice)
        degeneracy = transfer_matrix_count(lattice, couplings).degeneracy
        assert entropy_density(lattice, couplings, degeneracy) == pytest.approx(1 / lattice.n_sites)

    def test_invalid_degeneracy(self, square_2x2):
        with pytest.raises(ValueError):
            entropy_density(square_2x2, CouplingConfig.uniform(square_2x2), 0)


class TestDegeneracyLowerBound:
    """Certificates from matching block placements."""

    def test_ferromagnet_has_no_modules(self):
        lattice = build_lattice(LatticeKind.SQUARE, 10, 10, FREE)
        certificate = degeneracy_lower_bound(get_spec("square"), lattice, CouplingConfig.uniform(lattice))
        assert certificate.blocks == 4
        assert certificate.n_found == 0
        assert certificate.log2_bound == 0

    def test_planted_module_found(self):
        spec = get_spec("square")
        lattice = build_lattice(LatticeKind.SQUARE, 10, 10, FREE)
        couplings = embed_block(spec, lattice, realize_coupling(spec, seed=2), (5, 0), CouplingConfig.uniform(lattice))
        certificate = degeneracy_lower_bound(spec, lattice, couplings)
        assert certificate.n_found == 1
        assert certificate.anchors == [[5, 0]]

    def test_bound_holds_against_exact_count(self):
        spec = get_spec("square")
        lattice = build_lattice(LatticeKind.SQUARE, 5, 10, FREE)
        couplings = CouplingConfig.random(lattice, 0.5, np.random.default_rng(8))
        for origin in ((0, 0), (0, 5)):
            couplings = embed_block(spec, lattice, realize_coupling(spec, seed=origin[1]), origin, couplings)
        certificate = degeneracy_lower_bound(spec, lattice, couplings)
        assert certificate.n_found == 2
        assert transfer_matrix_count(lattice, couplings).degeneracy >= 2 ** certificate.n_found

    def test_untileable_lattice(self):
        lattice = build_lattice(LatticeKind.SQUARE, 7, 10, FREE)
        with pytest.raises(PlacementError):
            degeneracy_lower_bound(get_spec("square"), lattice, CouplingConfig.uniform(lattice))

    @pytest.mark.slow
    def test_soundness_acceptance(self, rng):
        spec = get_spec("square")
        lattice = build_lattice(LatticeKind.SQUARE, 10, 10, FREE)
        for trial in range(50):
            couplings = CouplingConfig.random(lattice, 0.5, rng)
            for origin in ((0, 0), (0, 5), (5, 0), (5, 5)):
                if rng.random() < 0.5:
                    block = realize_coupling(spec, seed=int(rng.integers(1 << 30)))
                    couplings = embed_block(spec, lattice, block, origin, couplings)
            certificate = degeneracy_lower_bound(spec, lattice, couplings)
            assert transfer_matrix_count(lattice, couplings).degeneracy >= 2 ** certificate.n_found
