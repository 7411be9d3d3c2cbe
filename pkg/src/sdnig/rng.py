"""Deterministic random substreams.

A master seed expands into independent streams addressed by an integer key
tuple ``(purpose, block, component)`` through :class:`numpy.random.SeedSequence`
spawn keys.  Paths are generated in fixed-size blocks, each block owning its
own streams, so a batch is bit-identical whatever the number of workers.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor

import numpy as np

BLOCK_SIZE = 1 << 16

# purpose codes (first spawn-key entry)
SIMULATE = 1
PRICE = 2
SAMPLER = 3
CALIBRATE = 4

# component codes (last spawn-key entry)
COMPONENTS = {
    "I1": 0,
    "I2": 1,
    "H1": 2,
    "Z": 3,
    "W1": 4,
    "W2": 5,
    "WC": 6,
    "WT": 7,
    "G1": 8,
    "G2": 9,
}


def substream(seed: int, *key: int) -> np.random.Generator:
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=tuple(int(k) for k in key))
    return np.random.Generator(np.random.PCG64(ss))


def block_slices(n: int, block_size: int = BLOCK_SIZE):
    return [(i, min(i + block_size, n)) for i in range(0, n, block_size)]


def map_blocks(fn, n: int, workers: int = 1, block_size: int = BLOCK_SIZE):
    """Apply ``fn(block_index, start, stop)`` over fixed blocks; results in block order."""
    blocks = block_slices(n, block_size)
    if workers <= 1 or len(blocks) == 1:
        return [fn(b, s, e) for b, (s, e) in enumerate(blocks)]
    with ThreadPoolExecutor(max_workers=workers) as ex:
        futs = [ex.submit(fn, b, s, e) for b, (s, e) in enumerate(blocks)]
        return [f.result() for f in futs]
