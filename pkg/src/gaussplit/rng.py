"""Deterministic, splittable random streams for Monte Carlo batches.

Every sampling routine in this package takes an RngStream rather than a bare
seed, so concurrent batches can draw from provably disjoint substreams while
the whole run stays reproducible from a single 64-bit seed.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

_MASK64 = (1 << 64) - 1


@dataclass(frozen=True)
class RngStream:
    """A (seed, stream_id) pair addressing one independent random substream.

    Identical pairs always produce identical sample sequences; distinct
    stream_ids are statistically independent (numpy SeedSequence keyed on
    the pair, driving a counter-based Philox generator).
    """

    seed: int
    stream_id: int = 0

    def generator(self) -> np.random.Generator:
        seq = np.random.SeedSequence(
            entropy=self.seed & _MASK64, spawn_key=(self.stream_id & _MASK64,)
        )
        return np.random.Generator(np.random.Philox(seq))

    def split(self, offset: int) -> "RngStream":
        """Derive a disjoint substream; (stream_id, offset) pairs never collide."""
        return RngStream(self.seed, _mix64(self.stream_id, offset))


def _mix64(a: int, b: int) -> int:
    # splitmix64 finalizer over the packed pair; collision odds are 2^-64-scale
    x = ((a & _MASK64) * 0x9E3779B97F4A7C15 + (b & _MASK64) + 1) & _MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _MASK64
    return x ^ (x >> 31)
