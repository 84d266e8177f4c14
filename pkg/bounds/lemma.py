"""Parity counting for curves with some bonds fixed."""

from math import comb
from typing import Tuple


class BoundParameterError(ValueError):
    """Raised for bound parameters outside their valid range."""
    pass


def lemma_counts(n: int, q: int, specified_negatives: int) -> Tuple[int, int]:
    """
    Count completions of a curve's free bonds by the parity of negative bonds.

    A curve has ``n`` bonds, ``q`` of them fixed with ``specified_negatives``
    negative. Each of the remaining n - q bonds is set to +1 or -1.

    Returns:
        (odd_ways, even_ways): completions giving an odd / even total number
        of negative bonds. Both equal 2^(n - q - 1).

    Raises:
        BoundParameterError: If q >= n (no free bond) or the counts are out of range
    """
    if n < 1:
        raise BoundParameterError(f"n must be >= 1 (got {n})")
    if not 0 <= q < n:
        raise BoundParameterError(f"Need 0 <= q < n, at least one free bond (got n={n}, q={q})")
    if not 0 <= specified_negatives <= q:
        raise BoundParameterError(f"specified_negatives must lie in [0, {q}] (got {specified_negatives})")

    free = n - q
    odd = sum(comb(free, k) for k in range(free + 1) if (k + specified_negatives) % 2 == 1)
    even = (1 << free) - odd
    if odd != even:
        raise ArithmeticError(f"Parity split failed for n={n}, q={q}: {odd} vs {even}")
    return odd, even
