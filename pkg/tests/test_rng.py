import numpy as np
from hypothesis import given, strategies as st

from pseudowhisper import rng


def _splitmix_reference(seed, count):
    # straight transcription of the published 64-bit splitmix step
    mask = (1 << 64) - 1
    state, out = seed & mask, []
    for _ in range(count):
        state = (state + 0x9E3779B97F4A7C15) & mask
        z = state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & mask
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & mask
        out.append(z ^ (z >> 31))
    return out


def test_fnv1a64_known_vectors():
    assert rng.fnv1a64(b"") == 0xCBF29CE484222325
    assert rng.fnv1a64(b"a") == 0xAF63DC4C8601EC8C
    assert rng.fnv1a64("foobar") == 0x85944171F73967E8


def test_utterance_seed_is_xor():
    assert rng.utterance_seed(0, "x.wav") == rng.fnv1a64("x.wav")
    assert rng.utterance_seed(7, "x.wav") == 7 ^ rng.fnv1a64("x.wav")


@given(st.integers(0, 2 ** 64 - 1), st.integers(1, 20))
def test_splitmix_matches_scalar_reference(seed, count):
    got = [int(v) for v in rng.splitmix64(seed, count)]
    assert got == _splitmix_reference(seed, count)


def test_splitmix_offset_continues_stream():
    full = rng.splitmix64(42, 10)
    assert np.array_equal(rng.splitmix64(42, 4, offset=6), full[6:])


def test_gaussian_moments_and_determinism():
    g = rng.gaussian(3, 200_000)
    assert abs(g.mean()) < 0.01
    assert abs(g.std() - 1.0) < 0.01
    assert np.array_equal(g, rng.gaussian(3, 200_000))
    assert not np.array_equal(g[:100], rng.gaussian(4, 100))
