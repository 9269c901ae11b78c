"""Counter-based seeding.

Session ``i`` of a scenario draws from a Philox4x64-10 stream keyed by
``split(master_seed, i)``. ``split`` is the i-th output of SplitMix64 started
at ``master_seed``: state = master + (i + 1) * 0x9E3779B97F4A7C15, then the
standard SplitMix64 finalizer (shifts 30/27/31, multipliers
0xBF58476D1CE4E5B9 and 0x94D049BB133111EB). Both algorithms are fully
specified by these constants, so any language can reproduce the streams.
"""
import numpy as np

RNG_ALGORITHM = "splitmix64-split+philox4x64-10"

_MASK = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15


def splitmix64(x: int) -> int:
    z = x & _MASK
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
    return z ^ (z >> 31)


def split(master_seed: int, index: int) -> int:
    """Derive the 64-bit seed of stream ``index`` from ``master_seed``."""
    if index < 0:
        raise ValueError("stream index must be non-negative")
    return splitmix64((master_seed & _MASK) + (index + 1) * _GOLDEN)


def generator(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=seed & _MASK))
