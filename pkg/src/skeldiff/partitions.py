"""Set partitions as restricted growth strings, plus Stirling numbers."""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Iterator

from .errors import EmptyEnumeration


@dataclass(frozen=True)
class PartitionRGS:
    """A set partition of {0..k-1} encoded as a restricted growth string:
    codes[0] == 0 and codes[i] <= max(codes[:i]) + 1."""

    codes: tuple[int, ...]

    @property
    def block_count(self) -> int:
        return max(self.codes) + 1 if self.codes else 0

    def blocks(self) -> list[list[int]]:
        out: list[list[int]] = [[] for _ in range(self.block_count)]
        for item, code in enumerate(self.codes):
            out[code].append(item)
        return out


@lru_cache(maxsize=None)
def stirling2(k: int, n: int) -> int:
    """Number of partitions of k items into n non-empty blocks."""
    if k < 0 or n < 0:
        raise ValueError("arguments must be non-negative")
    if k == 0:
        return 1 if n == 0 else 0
    if n == 0 or n > k:
        return 0
    return n * stirling2(k - 1, n) + stirling2(k - 1, n - 1)


def enumerate_partitions(k: int, n: int, mode: str = "exact_blocks") -> Iterator[PartitionRGS]:
    """Yield partitions of k items in lexicographic RGS order.

    exact_blocks: exactly n blocks (stirling2(k, n) of them).
    at_most_blocks: 1..n blocks (sum of stirling2(k, i) for i <= n).
    """
    if mode not in ("exact_blocks", "at_most_blocks"):
        raise ValueError(f"unknown partition mode {mode!r}")
    if n < 1:
        raise EmptyEnumeration("need at least one block")
    if mode == "exact_blocks" and k < n:
        raise EmptyEnumeration(f"cannot split {k} items into {n} non-empty blocks")
    if k == 0:
        return

    codes = [0] * k

    def rec(i: int, used: int) -> Iterator[PartitionRGS]:
        if i == k:
            if mode == "at_most_blocks" or used == n:
                yield PartitionRGS(tuple(codes))
            return
        limit = min(used + 1, n)
        for c in range(limit):
            # exact mode: remaining items must still be able to open the
            # blocks that are missing
            opened = used + (1 if c == used else 0)
            if mode == "exact_blocks" and opened + (k - i - 1) < n:
                continue
            codes[i] = c
            yield from rec(i + 1, opened)

    yield from rec(1, 1) if k > 0 else iter(())


def count_partitions(k: int, n: int, mode: str = "exact_blocks") -> int:
    if mode == "exact_blocks":
        return stirling2(k, n)
    return sum(stirling2(k, i) for i in range(1, n + 1))
