import zlib

import numpy as np

BLOCK_ROWS = 65536


def seed_sequence(seed):
    if isinstance(seed, np.random.SeedSequence):
        return seed
    if seed is None:
        raise ValueError("a seed is required")
    seed = int(seed)
    if not 0 <= seed < 2 ** 64:
        raise ValueError("seed must be a 64-bit unsigned integer")
    return np.random.SeedSequence(seed)


def substream(seed, name):
    """Named child stream of a root seed; stable across runs and versions."""
    root = seed_sequence(seed)
    key = tuple(root.spawn_key) + (zlib.crc32(name.encode()),)
    return np.random.SeedSequence(root.entropy, spawn_key=key)


def block_uniforms(seed, n, q):
    """``(n, q)`` uniforms in the open interval (0, 1).

    Rows are drawn in fixed-size blocks, each from its own child stream, so
    the result does not depend on how blocks are scheduled.
    """
    ss = seed_sequence(seed)
    nblocks = -(-n // BLOCK_ROWS)
    out = np.empty((n, q))
    for b in range(nblocks):
        child = np.random.SeedSequence(ss.entropy, spawn_key=tuple(ss.spawn_key) + (b,))
        lo = b * BLOCK_ROWS
        hi = min(lo + BLOCK_ROWS, n)
        out[lo:hi] = np.random.default_rng(child).random((hi - lo, q))
    tiny = np.finfo(float).tiny
    np.clip(out, tiny, 1.0 - np.finfo(float).epsneg, out=out)
    return out
