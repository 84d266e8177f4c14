"""
Quick smoke check of the solvers, module registry and bound report.
"""

import sys
from pathlib import Path

# Add parent directory to path
sys.path.insert(0, str(Path(__file__).parent.parent))

print("=" * 80)
print("FRUSTRATION-LAB QUICK CHECK")
print("=" * 80)

# Test 1: Import all modules
print("\n[1/5] Testing imports...")
try:
    import numpy as np

    from bounds import density_constant, bound_report
    from core.ising import CouplingConfig
    from core.lattice import BoundaryCondition, LatticeKind, build_lattice
    from registry import builtin_specs
    from solvers.solver_manager import SolverManager, get_solver_manager
    print("✓ All imports successful")
except Exception as e:
    print(f"✗ Import failed: {e}")
    sys.exit(1)

# Test 2: Worked examples
print("\n[2/5] Testing worked examples...")
try:
    lattice = build_lattice(LatticeKind.SQUARE, 2, 2, BoundaryCondition.FREE)
    manager = get_solver_manager()
    ferro = manager.solve(lattice, CouplingConfig.uniform(lattice))
    frustrated = manager.solve(lattice, CouplingConfig.from_signs(lattice, [1, 1, -1, 1]))
    print(f"  - 2x2 ferromagnet: E0={ferro.energy}, D0={ferro.degeneracy}")
    print(f"  - 2x2 one negative bond: E0={frustrated.energy}, D0={frustrated.degeneracy}")
    assert (ferro.energy, ferro.degeneracy) == (-4, 2)
    assert (frustrated.energy, frustrated.degeneracy) == (-2, 8)
    print("✓ Worked examples match")
except Exception as e:
    print(f"✗ Worked examples failed: {e}")
    import traceback
    traceback.print_exc()
    sys.exit(1)

# Test 3: Backend agreement
print("\n[3/5] Testing backend agreement on random strips...")
try:
    rng = np.random.default_rng(0)
    checker = SolverManager(self_check=True)
    for kind in (LatticeKind.SQUARE, LatticeKind.TRIANGULAR, LatticeKind.HEXAGONAL):
        lattice = build_lattice(kind, 4, 4, BoundaryCondition.FREE)
        result = checker.solve(lattice, CouplingConfig.random(lattice, 0.5, rng))
        print(f"    • {lattice.describe()}: E0={result.energy}, D0={result.degeneracy}")
    print(f"✓ {checker.self_checks} self-checks passed")
except Exception as e:
    print(f"✗ Backend agreement failed: {e}")
    import traceback
    traceback.print_exc()
    sys.exit(1)

# Test 4: Module registry
print("\n[4/5] Testing module registry...")
try:
    for spec in builtin_specs():
        print(
            f"    • {spec.id}: {spec.n_sites} sites, {spec.block_lattice.n_bonds} bonds, "
            f"{spec.m} specified plaquettes, orientations={len(spec.orientations)}"
        )
    print("✓ Built-in specs loaded and checked")
except Exception as e:
    print(f"✗ Registry failed: {e}")
    import traceback
    traceback.print_exc()
    sys.exit(1)

# Test 5: Density constants
print("\n[5/5] Testing density constants...")
try:
    for spec in builtin_specs():
        constant = density_constant(spec)
        report = bound_report(spec, lattice_size=spec.n_sites * 1000)
        print(f"  - {spec.id}: c = {constant} ≈ {float(constant):.4g} (k0 = {report.k0})")
    print("✓ Constants computed")
except Exception as e:
    print(f"✗ Constants failed: {e}")
    import traceback
    traceback.print_exc()
    sys.exit(1)

print("\n" + "=" * 80)
print("ALL CHECKS PASSED! ✓")
print("=" * 80)
