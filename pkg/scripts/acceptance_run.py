"""
Long-running acceptance checks.

This script checks:
1. Energy identity and curve parity on random instances
2. Parity split of curve completions
3. Backend agreement on 1000 random instances
4. Density constants and the Monte Carlo estimate of f(1/2) for the square module
5. Exact module verification (square, triangular; hexagonal with --hexagonal)

Usage:
    python scripts/acceptance_run.py [--hexagonal] [--threads N]
"""

import argparse
import logging
import math
import sys
import time
from pathlib import Path

# Add parent directory to path
sys.path.insert(0, str(Path(__file__).parent.parent))

import numpy as np

from bounds import density_constant, empirical_module_density, lemma_counts
from bounds.estimators import block_patterns
from core.config import get_settings
from core.ising import CouplingConfig, Curve, SpinState, curve_parity_check, energy_by_sum, energy_by_unhappy
from core.lattice import BoundaryCondition, LatticeKind, build_lattice
from core.logging_setup import setup_logging
from registry import get_spec, verify_module
from solvers.branch_and_bound import BranchAndBoundSolver
from solvers.exhaustive import ExhaustiveSolver
from solvers.transfer_matrix import TransferMatrixSolver

logger = logging.getLogger(__name__)

KINDS = [LatticeKind.SQUARE, LatticeKind.TRIANGULAR, LatticeKind.HEXAGONAL]
BOUNDARIES = [BoundaryCondition.FREE, BoundaryCondition.CYLINDRICAL, BoundaryCondition.TOROIDAL]


def random_instance(rng, max_sites):
    while True:
        kind = KINDS[rng.integers(len(KINDS))]
        boundary = BOUNDARIES[rng.integers(len(BOUNDARIES))]
        rows = int(rng.integers(2, 7))
        cols = int(rng.integers(2, max(3, max_sites // rows + 1)))
        if rows * cols > max_sites:
            continue
        try:
            lattice = build_lattice(kind, rows, cols, boundary)
        except ValueError:
            continue
        return lattice, CouplingConfig.random(lattice, float(rng.random()), rng)


def banner(title):
    print("\n" + "=" * 80)
    print(title)
    print("=" * 80)


def check_identities():
    """Energy identity and parity on 10^4 random (J, sigma, curve) triples."""
    banner("TEST 1: Energy identity and curve parity")
    rng = np.random.default_rng(1)
    for _ in range(10_000):
        lattice, couplings = random_instance(rng, 64)
        sigma = SpinState.random(lattice, rng)
        if energy_by_sum(lattice, couplings, sigma) != energy_by_unhappy(lattice, couplings, sigma):
            print(f"✗ Energy identity violated on {lattice.describe()}")
            return False
        if lattice.plaquettes:
            p = lattice.plaquettes[rng.integers(len(lattice.plaquettes))]
            if not curve_parity_check(lattice, couplings, sigma, Curve.around(p.sites)):
                print(f"✗ Curve parity violated on {lattice.describe()}")
                return False
    print("✓ 10000 instances, zero failures")
    return True


def check_lemma():
    banner("TEST 2: Parity split of curve completions")
    cases = 0
    for n in range(1, 21):
        for q in range(n):
            for negatives in {0, min(1, q)}:
                odd, even = lemma_counts(n, q, negatives)
                if odd != even or odd != 2 ** (n - q - 1):
                    print(f"✗ n={n}, q={q}: {odd} vs {even}")
                    return False
                cases += 1
    print(f"✓ {cases} cases, zero failures")
    return True


def check_backends():
    banner("TEST 3: Backend agreement on 1000 random instances")
    rng = np.random.default_rng(2)
    exhaustive = ExhaustiveSolver(workers=1)
    transfer = TransferMatrixSolver()
    search = BranchAndBoundSolver(workers=1)
    start = time.perf_counter()
    for i in range(1000):
        lattice, couplings = random_instance(rng, 24)
        reference = exhaustive.solve(lattice, couplings)
        for solver in (transfer, search):
            other = solver.solve(lattice, couplings)
            if (other.energy, other.degeneracy) != (reference.energy, reference.degeneracy):
                print(f"✗ Instance {i}: {solver.name} disagrees on {lattice.describe()}")
                return False
    print(f"✓ 1000 instances agree ({time.perf_counter() - start:.1f}s)")
    return True


def check_density(threads):
    banner("TEST 4: Density constants and f(1/2) by sampling")
    for name in ("square", "triangular", "hexagonal"):
        constant = density_constant(get_spec(name))
        print(f"  - {name}: c = {constant} ≈ {float(constant):.4g}")

    spec = get_spec("square")
    n = 100_000_000
    estimate = empirical_module_density(spec, 0.5, n, seed=2024, threads=threads)
    patterns = block_patterns(spec)
    merged = {}
    consistent = True
    for pattern in patterns:
        for bonds, parity in zip(pattern.plaquette_bonds, pattern.parities):
            consistent = consistent and merged.setdefault(tuple(sorted(bonds)), parity) == parity
    # identity or rot90, by inclusion-exclusion
    exact = 2 * 2.0 ** -spec.m - (2.0 ** -len(merged) if consistent else 0.0)
    sigma = math.sqrt(exact * (1 - exact) / n)
    print(f"  - square at p=1/2: {estimate.estimate:.6e} (exact {exact:.6e}, {abs(estimate.estimate - exact) / sigma:.2f} sigma)")
    if abs(estimate.estimate - exact) > 3 * sigma:
        print("✗ Estimate outside 3 sigma")
        return False
    print("✓ Estimate within 3 sigma")
    return True


def check_modules(names, threads):
    banner("TEST 5: Exact module verification")
    ok = True
    for name, collar, samples in names:
        start = time.perf_counter()
        report = verify_module(get_spec(name), collar=collar, n_samples=samples, seed=7, threads=threads)
        status = "✓" if report.passed else "✗"
        print(
            f"{status} {name}: {samples - len(report.failures)}/{samples} samples passed on {report.host} "
            f"({report.backend}, {time.perf_counter() - start:.1f}s)"
        )
        ok = ok and report.passed
    return ok


def main():
    parser = argparse.ArgumentParser(description="Long-running acceptance checks")
    parser.add_argument("--hexagonal", action="store_true", help="Also verify the hexagonal module (hours)")
    parser.add_argument("--threads", type=int, default=None)
    args = parser.parse_args()

    settings = get_settings()
    threads = args.threads or settings.threads
    setup_logging("WARNING")

    modules = [("square", 4, 100), ("triangular", 4, 100)]
    if args.hexagonal:
        modules.append(("hexagonal", 1, 10))

    results = {
        "identities": check_identities(),
        "lemma": check_lemma(),
        "backends": check_backends(),
        "density": check_density(threads),
        "modules": check_modules(modules, threads),
    }

    banner("SUMMARY")
    for name, passed in results.items():
        print(f"  {'✓' if passed else '✗'} {name}")
    if all(results.values()):
        print("\nALL ACCEPTANCE CHECKS PASSED! ✓")
        return 0
    return 1


if __name__ == "__main__":
    sys.exit(main())
