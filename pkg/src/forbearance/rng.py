"""Counter-addressed uniform streams on top of numpy's Philox generator.

A stream is keyed by a 64-bit seed and cut into fixed-size blocks, one per
unit of work (a firm, a replication). Block ``i`` can be produced on its own by
advancing the Philox counter. The result equals the matching slice of one bulk
draw, so parallel and sequential generation agree bit for bit.
"""

from __future__ import annotations

import numpy as np

from .errors import DomainError

# Philox emits 4 x 64-bit words per counter step; one double consumes one word.
_WORDS_PER_STEP = 4
_HALF_ULP = 2.0 ** -54


def check_seed(seed: int) -> int:
    seed = int(seed)
    if not 0 <= seed < 2 ** 64:
        raise DomainError(f"seed must be an unsigned 64-bit integer, got {seed}")
    return seed


class BlockStream:
    def __init__(self, seed: int, block_size: int):
        self.seed = check_seed(seed)
        # round up so every block starts on a counter boundary
        self.block_size = -(-block_size // _WORDS_PER_STEP) * _WORDS_PER_STEP

    def _generator(self, first_block: int) -> np.random.Generator:
        bg = np.random.Philox(key=self.seed)
        if first_block:
            bg.advance(first_block * self.block_size // _WORDS_PER_STEP)
        return np.random.Generator(bg)

    def blocks(self, start: int, count: int) -> np.ndarray:
        """Uniforms on the open interval (0, 1), shape ``(count, block_size)``."""
        u = self._generator(start).random(count * self.block_size)
        # shift the 2**-53 lattice by half a step so inverse CDFs never see 0
        return (u + _HALF_ULP).reshape(count, self.block_size)

    def block(self, index: int) -> np.ndarray:
        return self.blocks(index, 1)[0]
