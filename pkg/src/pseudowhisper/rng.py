"""Counter-based splitmix64 noise source and FNV-1a seeding.

Everything here is pure numpy on uint64 so a given seed produces the same
stream on every platform.
"""
import numpy as np

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)
_MASK64 = (1 << 64) - 1

FNV_OFFSET = 0xCBF29CE484222325
FNV_PRIME = 0x100000001B3


def fnv1a64(data) -> int:
    if isinstance(data, str):
        data = data.encode("utf-8")
    h = FNV_OFFSET
    for byte in data:
        h ^= byte
        h = (h * FNV_PRIME) & _MASK64
    return h


def utterance_seed(global_seed: int, name: str) -> int:
    return (int(global_seed) & _MASK64) ^ fnv1a64(name)


def splitmix64(seed: int, count: int, offset: int = 0) -> np.ndarray:
    """Return `count` consecutive splitmix64 outputs starting at `offset`."""
    with np.errstate(over="ignore"):
        idx = np.arange(offset + 1, offset + count + 1, dtype=np.uint64)
        z = np.uint64(int(seed) & _MASK64) + idx * _GOLDEN
        z = (z ^ (z >> np.uint64(30))) * _MIX1
        z = (z ^ (z >> np.uint64(27))) * _MIX2
        return z ^ (z >> np.uint64(31))


def uniform(seed: int, count: int, offset: int = 0) -> np.ndarray:
    # top 53 bits -> [0, 1)
    bits = splitmix64(seed, count, offset) >> np.uint64(11)
    return bits.astype(np.float64) * (1.0 / (1 << 53))


def gaussian(seed: int, count: int) -> np.ndarray:
    """Unit-variance Gaussian samples via Box-Muller."""
    pairs = (count + 1) // 2
    u = uniform(seed, 2 * pairs)
    u1 = 1.0 - u[0::2]  # (0, 1], keeps log finite
    u2 = u[1::2]
    radius = np.sqrt(-2.0 * np.log(u1))
    theta = 2.0 * np.pi * u2
    out = np.empty(2 * pairs)
    out[0::2] = radius * np.cos(theta)
    out[1::2] = radius * np.sin(theta)
    return out[:count]
