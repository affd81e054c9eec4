"""Integer partitions: exact counts, proper-partition enumeration, the
leading-order growth estimate, and the window weight factors they generate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .constants import HR_K
from .errors import DomainError

__all__ = [
    "ProperPartition",
    "WeightSet",
    "enumerate_proper",
    "hr_estimate",
    "partition_count",
    "weights",
]

_COUNT_LIMIT = 10_000
_ENUM_LIMIT = 40

# p(0), p(1), ... computed by Euler's pentagonal-number recurrence
_pcache = [1]


def partition_count(n):
    """Exact number of partitions p(n) (arbitrary precision), n <= 10^4."""
    if not (0 <= n <= _COUNT_LIMIT):
        raise DomainError(f"partition_count supports 0 <= n <= {_COUNT_LIMIT}")
    while len(_pcache) <= n:
        m = len(_pcache)
        acc = 0
        k = 1
        while True:
            g1 = k * (3 * k - 1) // 2
            g2 = k * (3 * k + 1) // 2
            if g1 > m:
                break
            sign = 1 if k % 2 == 1 else -1
            acc += sign * _pcache[m - g1]
            if g2 <= m:
                acc += sign * _pcache[m - g2]
            k += 1
        _pcache.append(acc)
    return _pcache[n]


@dataclass(frozen=True)
class ProperPartition:
    """A partition of n+1 with all parts in [1, n] (the single-part
    partition is excluded), stored in canonical non-increasing order."""

    n_plus_1: int
    parts: tuple

    def __post_init__(self):
        if sum(self.parts) != self.n_plus_1:
            raise ValueError("parts must sum to n_plus_1")
        if any(p < 1 or p >= self.n_plus_1 for p in self.parts):
            raise ValueError("parts must lie in [1, n]")
        if any(a < b for a, b in zip(self.parts, self.parts[1:])):
            raise ValueError("parts must be non-increasing")

    @property
    def n(self):
        return self.n_plus_1 - 1


def _descending_partitions(n, max_part):
    if n == 0:
        yield ()
        return
    for first in range(min(n, max_part), 0, -1):
        for rest in _descending_partitions(n - first, first):
            yield (first,) + rest


def enumerate_proper(n_plus_1):
    """All proper partitions of n+1, lexicographically sorted.

    Exactly p(n+1) - 1 entries; each in canonical non-increasing part order.
    Enumeration is limited to n+1 <= 40.
    """
    if not (2 <= n_plus_1 <= _ENUM_LIMIT):
        raise DomainError(f"enumerate_proper supports 2 <= n+1 <= {_ENUM_LIMIT}")
    parts = sorted(_descending_partitions(n_plus_1, n_plus_1 - 1))
    return [ProperPartition(n_plus_1=n_plus_1, parts=p) for p in parts]


def hr_estimate(n):
    """Leading-order growth estimate of p(n): exp(K sqrt(n)) / (4 n sqrt(3))
    with K = pi sqrt(2/3).

    Overestimates p(n) by ~4.7% at n = 100, improving as n grows.
    """
    if n < 1:
        raise DomainError("hr_estimate requires n >= 1")
    return math.exp(HR_K * math.sqrt(n)) / (4.0 * n * math.sqrt(3.0))


@dataclass(frozen=True)
class WeightSet:
    """Window weight factors: one per distinct part size, plus the top one.

    g[a] = U / (phi1^a(T+U) - phi1^a(T)); g_top uses the (n+1)-th iterate.
    All weights are positive because every iterate is increasing.
    """

    g: dict
    g_top: float

    def __post_init__(self):
        if self.g_top <= 0.0 or any(v <= 0.0 for v in self.g.values()):
            raise ValueError("weights must be positive")

    def for_partition(self, p):
        """Weights in part order, e.g. factors of the factorized side."""
        return [self.g[a] for a in p.parts]


def weights(p, T, U, table):
    """Weight factors of one proper partition over the window [T, T+U]."""
    U = float(U)
    if U <= 0.0:
        raise DomainError("weights need U > 0")
    need = sorted(set(p.parts)) + [p.n_plus_1]
    g = {}
    for a in need:
        lo = table.iterate(T, a)
        hi = table.iterate(T + U, a)
        g[a] = U / (hi - lo)
    g_top = g.pop(p.n_plus_1)
    return WeightSet(g=g, g_top=g_top)
