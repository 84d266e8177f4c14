"""Random instance generators and stand-ins shared by the test modules."""

from concurrent.futures import Future

import numpy as np

from core.ising import CouplingConfig
from core.lattice import BoundaryCondition, LatticeError, LatticeKind, build_lattice

KINDS = [LatticeKind.SQUARE, LatticeKind.TRIANGULAR, LatticeKind.HEXAGONAL]
BOUNDARIES = [BoundaryCondition.FREE, BoundaryCondition.CYLINDRICAL, BoundaryCondition.TOROIDAL]


def random_lattice(rng: np.random.Generator, max_sites: int = 16, max_rows: int = 6):
    """A random buildable lattice of any kind and boundary with at most ``max_sites`` sites."""
    while True:
        kind = KINDS[rng.integers(len(KINDS))]
        boundary = BOUNDARIES[rng.integers(len(BOUNDARIES))]
        rows = int(rng.integers(2, max_rows + 1))
        cols = int(rng.integers(2, max(3, max_sites // rows + 1)))
        if rows * cols > max_sites:
            continue
        try:
            return build_lattice(kind, rows, cols, boundary)
        except LatticeError:
            continue


def random_instance(rng: np.random.Generator, max_sites: int = 16, p: float = 0.5):
    lattice = random_lattice(rng, max_sites)
    return lattice, CouplingConfig.random(lattice, p, rng)


def tiny_document(constraint: str = "U") -> dict:
    """A 3x3 square block with all four plaquettes labelled ``constraint``."""
    return {
        "id": "tiny",
        "kind": "square",
        "sites": [[r, c] for r in range(3) for c in range(3)],
        "bonds": 12,
        "plaquettes": {
            "p1": ["square", 0, 0],
            "p2": ["square", 0, 1],
            "p3": ["square", 1, 0],
            "p4": ["square", 1, 1],
        },
        "constraints": {label: constraint for label in ("p1", "p2", "p3", "p4")},
        "tiling": {"period": [3, 3], "placements": [{"offset": [0, 0], "transform": "identity"}]},
    }


def recording_pool(pools: list):
    """Executor class that runs work in-process and appends each ``max_workers`` to ``pools``."""

    class RecordingPool:
        def __init__(self, max_workers=None):
            pools.append(max_workers)

        def __enter__(self):
            return self

        def __exit__(self, *exc):
            return False

        def submit(self, fn, *args, **kwargs):
            future = Future()
            future.set_result(fn(*args, **kwargs))
            return future

    return RecordingPool
