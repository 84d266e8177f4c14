"""Helpers over collected ground states."""

from typing import Dict, Iterable, List, Sequence, Tuple

from core.ising import SpinState


def exterior_key(state: SpinState, block: Iterable[int]) -> Tuple[int, ...]:
    """Spin bits of ``state`` on every present site outside ``block``."""
    inside = set(block)
    return tuple(int(state.bits[s]) for s in state.sites if s not in inside)


def group_by_exterior(states: Sequence[SpinState], block: Iterable[int]) -> List[List[SpinState]]:
    """
    Partition states by their restriction to the sites outside ``block``.

    Two states share a group iff they agree on every site outside the block.
    Groups come out in order of first appearance; duplicates are kept.

    Raises:
        ValueError: If the states are not defined on the same sites
    """
    block = frozenset(block)
    groups: Dict[Tuple[int, ...], List[SpinState]] = {}
    sites = None
    for state in states:
        if sites is None:
            sites = state.sites
        elif state.sites != sites:
            raise ValueError("All states must be defined on the same lattice")
        groups.setdefault(exterior_key(state, block), []).append(state)
    return list(groups.values())
