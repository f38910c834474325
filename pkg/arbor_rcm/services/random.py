"""Seeded random streams for reproducible Monte Carlo.

Every Monte Carlo replication belongs to a fixed-size block; block ``b`` of a
run with seed ``s`` draws from ``SeedSequence([s, b])``. Results therefore do
not depend on how blocks are distributed over workers.
"""

import numpy as np

BLOCK_SIZE = 1024


def block_generator(seed: int, block: int) -> np.random.Generator:
    """Generator for one block of replications."""
    return np.random.default_rng(np.random.SeedSequence([seed, block]))


def stream_generator(seed: int, *key: int) -> np.random.Generator:
    """Generator for an arbitrary integer key path (chain index, sweep batch...)."""
    return np.random.default_rng(np.random.SeedSequence([seed, *key]))


def blocks(samples: int, block_size: int = BLOCK_SIZE) -> list[tuple[int, int, int]]:
    """Split ``samples`` into (block index, start, count) triples."""
    out = []
    start = 0
    index = 0
    while start < samples:
        count = min(block_size, samples - start)
        out.append((index, start, count))
        start += count
        index += 1
    return out


class UniformStream:
    """Scalar uniforms served from a buffered numpy generator."""

    __slots__ = ("_rng", "_buffer", "_pos", "_chunk")

    def __init__(self, rng: np.random.Generator, chunk: int = 4096):
        self._rng = rng
        self._chunk = chunk
        self._buffer = rng.random(chunk).tolist()
        self._pos = 0

    def next(self) -> float:
        if self._pos == self._chunk:
            self._buffer = self._rng.random(self._chunk).tolist()
            self._pos = 0
        value = self._buffer[self._pos]
        self._pos += 1
        return value
