"""
Module specifications and their checks.

Built-in square, triangular and hexagonal modules, coupling realization,
pattern matching on host lattices and exact verification of the module
property.
"""

from registry.matching import (
    CompiledPattern,
    PlacementError,
    compile_placement,
    embed_block,
    match_counts,
    matches,
    orientation_patterns,
    tiling_origins,
)
from registry.realize import (
    DegreeOfFreedomError,
    InfeasibleConstraintsError,
    degree_of_freedom_order,
    realize_coupling,
    realize_pattern,
)
from registry.specs import ModuleSpec, ModuleSpecError, builtin_specs, get_spec, load_spec
from registry.verification import build_host, verify_module

__all__ = [
    "CompiledPattern",
    "PlacementError",
    "compile_placement",
    "embed_block",
    "match_counts",
    "matches",
    "orientation_patterns",
    "tiling_origins",
    "DegreeOfFreedomError",
    "InfeasibleConstraintsError",
    "degree_of_freedom_order",
    "realize_coupling",
    "realize_pattern",
    "ModuleSpec",
    "ModuleSpecError",
    "builtin_specs",
    "get_spec",
    "load_spec",
    "build_host",
    "verify_module",
]
