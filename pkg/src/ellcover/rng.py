"""Counter-addressed random streams on top of numpy's Philox4x64.

A draw is identified by ``(seed, stream, block)``: the seed is the Philox key,
and the stream and block numbers occupy the two high words of the 256-bit
counter.  Any block can be regenerated independently, so results do not depend
on how blocks are spread over threads.
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor

import numpy as np

BLOCK = 1 << 18
MASK64 = (1 << 64) - 1

# stream ids
POSITIONS = 0
FADING = 1
REJECTION = 2


def generator(seed: int, stream: int = 0, block: int = 0) -> np.random.Generator:
    bg = np.random.Philox(key=int(seed) & MASK64, counter=[0, 0, int(block), int(stream)])
    return np.random.Generator(bg)


def blocks(n: int, block: int = BLOCK):
    """``(index, size)`` of each block covering ``n`` draws."""
    full, rest = divmod(n, block)
    out = [(i, block) for i in range(full)]
    if rest:
        out.append((full, rest))
    return out


def map_blocks(fn, n: int, workers: int = 1, block: int = BLOCK):
    """Apply ``fn(index, size)`` to every block; results come back in block order."""
    parts = blocks(n, block)
    if workers > 1 and len(parts) > 1:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            return list(ex.map(lambda p: fn(*p), parts))
    return [fn(*p) for p in parts]
