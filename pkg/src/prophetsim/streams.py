"""Counter-based per-trial uniform streams.

Trial t draws its uniforms from row t % BLOCK of the block t // BLOCK, and
each block is generated independently from a Philox generator keyed by
(seed, block index). Trials therefore never depend on each other or on the
order they are executed in, so any partition of the trial range across
workers reproduces the same numbers.

Row layout (width 4n for n buyers): n value-profile uniforms in buyer index
order, n arrival-time uniforms in buyer index order, then 2n auxiliary
uniforms consumed lazily in arrival order (set/candidate draws first, then a
tie-breaking coin when needed).
"""

from __future__ import annotations

import numpy as np

BLOCK = 1024


def block_uniforms(seed: int, block: int, width: int) -> np.ndarray:
    """The (BLOCK, width) uniform array for one block of trials."""
    gen = np.random.Generator(np.random.Philox(key=[seed, block]))
    return gen.random((BLOCK, width))


class TrialStream:
    """Random-access per-trial uniform rows with one cached block.

    Sequential access (the common case) regenerates each block exactly once.
    """

    def __init__(self, seed: int, width: int):
        self.seed = int(seed)
        self.width = int(width)
        self._block = -1
        self._cache: np.ndarray | None = None

    def row(self, trial: int) -> np.ndarray:
        block, offset = divmod(trial, BLOCK)
        if block != self._block:
            self._cache = block_uniforms(self.seed, block, self.width)
            self._block = block
        return self._cache[offset]


def derived_rng(seed: int, tag: int) -> np.random.Generator:
    """A generator for one-off needs (price estimation, instance generation)
    that never collides with the trial blocks: tags are large constants far
    outside any realistic block index."""
    return np.random.Generator(np.random.Philox(key=[seed, tag]))


PRICE_TAG = 0x7072696365  # "price"
OPT_TAG = 0x6F7074  # "opt"
GEN_TAG = 0x67656E  # "gen"
