# =============================================================================
# SEED HASHING
# Deterministic 64-bit mixing for symbol streams and derived seeds
# =============================================================================
#
# Rules:
# - symbol(seed, i) depends on (seed, i) only
# - scalar and vectorized paths agree bit for bit
# - negative indices wrap as two's complement 64-bit integers
# =============================================================================

import numpy as np

MASK64 = (1 << 64) - 1
GOLDEN_GAMMA = 0x9E3779B97F4A7C15
MIX_1 = 0xBF58476D1CE4E5B9
MIX_2 = 0x94D049BB133111EB


def splitmix64(z: int) -> int:
    """SplitMix64 finalizer on a Python int."""
    z = (z + GOLDEN_GAMMA) & MASK64
    z = ((z ^ (z >> 30)) * MIX_1) & MASK64
    z = ((z ^ (z >> 27)) * MIX_2) & MASK64
    return z ^ (z >> 31)


def splitmix64_array(z: np.ndarray) -> np.ndarray:
    """SplitMix64 finalizer on a uint64 array (wrapping arithmetic)."""
    z = z.astype(np.uint64, copy=True)
    z += np.uint64(GOLDEN_GAMMA)
    z = (z ^ (z >> np.uint64(30))) * np.uint64(MIX_1)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(MIX_2)
    return z ^ (z >> np.uint64(31))


def _stream_key(seed: int) -> int:
    return (seed * GOLDEN_GAMMA) & MASK64


def bernoulli_symbol(seed: int, index: int) -> int:
    """Fair bit at integer index of the stream named by seed."""
    z = (_stream_key(seed) + (index & MASK64)) & MASK64
    return splitmix64(z) >> 63


def bernoulli_symbols(seed: int, indices: np.ndarray) -> np.ndarray:
    """Vectorized bernoulli_symbol over an integer index array."""
    keys = np.asarray(indices, dtype=np.int64).astype(np.uint64)
    keys = keys + np.uint64(_stream_key(seed))
    return (splitmix64_array(keys) >> np.uint64(63)).astype(np.int8)


def derive_seed(seed: int, stream: int) -> int:
    """Independent child seed for a numbered stream (e.g. a start index)."""
    return splitmix64((splitmix64(seed & MASK64) + stream) & MASK64)
