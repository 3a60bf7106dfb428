"""Deterministic chunked maps.

Work is split into fixed index blocks and merged in block order, and all
randomness is derived from (seed, stream, sample index), so results are
byte-identical for any worker count.  Workers are threads; numpy kernels
release the GIL, pure-Python sections serialize.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor

import numpy as np

BLOCK = 512


def rng_for(seed: int, stream: int, index: int) -> np.random.Generator:
    """Independent generator for one (stream, sample) slot under a run seed."""
    return np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(stream, index)))


def stream_rng(seed: int, stream: int) -> np.random.Generator:
    """Independent generator for a whole stream (base points, per-trial draws)."""
    return np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(stream,)))


def uniform_block(seed: int, stream: int, lo: int, hi: int, draws: int) -> np.ndarray:
    """(hi-lo, draws) uniforms; row i reproduces rng_for(seed, stream, lo+i).random(draws)."""
    return np.array([rng_for(seed, stream, i).random(draws) for i in range(lo, hi)])


def chunked_map(block_fn, n: int, threads: int = 1, block: int = BLOCK) -> np.ndarray:
    """Concatenate block_fn(lo, hi) over [0,n) in fixed blocks, in index order."""
    spans = [(lo, min(lo + block, n)) for lo in range(0, n, block)]
    if threads > 1 and len(spans) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(lambda s: block_fn(*s), spans))
    else:
        parts = [block_fn(*s) for s in spans]
    return np.concatenate(parts) if parts else np.empty(0)
