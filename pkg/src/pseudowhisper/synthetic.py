"""Synthetic test signals with known source-filter parameters.

Built directly on scipy.signal so they can serve as independent ground
truth for the analysis code in this package.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.signal import lfilter

from .audio_io import AudioClip

DEFAULT_FORMANTS = (700.0, 1220.0, 2600.0)
DEFAULT_BANDWIDTHS = (80.0, 90.0, 120.0)
# fixed F4/F5 as in cascade formant synthesizers; keeps the spectrum within
# a speech-like dynamic range above F3
UPPER_FORMANTS_HZ = (3500.0, 4500.0)
UPPER_BANDWIDTHS_HZ = (250.0, 200.0)


def resonator_poly(freqs_hz, bandwidths_hz, fs: int) -> np.ndarray:
    """Monic all-pole polynomial with one conjugate pole pair per resonance."""
    a = np.array([1.0])
    for f, b in zip(freqs_hz, bandwidths_hz):
        r = np.exp(-np.pi * b / fs)
        a = np.convolve(a, [1.0, -2.0 * r * np.cos(2 * np.pi * f / fs), r * r])
    return a


def glottal_poly(pair_radius=0.98, pair_freq_hz=60.0, real_pole=0.92, fs: int = 16000):
    """(1 - a z^-1)(1 - a* z^-1)(1 - b z^-1) for a = radius * e^{j 2 pi f / fs}."""
    theta = 2 * np.pi * pair_freq_hz / fs
    pair = [1.0, -2.0 * pair_radius * np.cos(theta), pair_radius ** 2]
    return np.convolve(pair, [1.0, -real_pole])


def harmonic_pulse_train(f0_hz: float, duration_s: float, fs: int = 16000,
                         max_freq_hz: float | None = None, phase: float = 0.0) -> np.ndarray:
    """Band-limited unit-power pulse train (sum of equal-amplitude cosines)."""
    n = int(round(duration_s * fs))
    t = np.arange(n) / fs
    top = max_freq_hz if max_freq_hz is not None else 0.475 * fs
    k = np.arange(1, int(top // f0_hz) + 1)
    x = np.cos(2 * np.pi * np.outer(t, k) * f0_hz + phase).sum(axis=1)
    return x * np.sqrt(2.0 / k.size)


@dataclass
class SyntheticVowel:
    clip: AudioClip
    vocal_tract: np.ndarray
    glottis: np.ndarray
    formants_hz: tuple
    bandwidths_hz: tuple
    f0_hz: float
    lip_leak: float


def synthetic_vowel(f0_hz: float = 120.0, formants_hz=DEFAULT_FORMANTS,
                    bandwidths_hz=DEFAULT_BANDWIDTHS, duration_s: float = 0.5,
                    fs: int = 16000, glottis=None, lip_leak: float = 0.99,
                    peak: float | None = 0.5) -> SyntheticVowel:
    """Pulse train -> glottal all-pole -> vocal tract all-pole -> lip differentiator.

    ``glottis=[1]`` and ``lip_leak=0`` give a bare all-pole vowel. With
    ``peak=None`` the source keeps unit power, so the output power spectral
    density is exactly the cascade's squared magnitude.
    """
    if glottis is None:
        glottis = glottal_poly(fs=fs)
    vt = resonator_poly(formants_hz, bandwidths_hz, fs)
    src = harmonic_pulse_train(f0_hz, duration_s + 0.2, fs)
    y = lfilter([1.0], glottis, src)
    y = lfilter([1.0], vt, y)
    y = lfilter([1.0, -lip_leak], [1.0], y)
    y = y[int(0.2 * fs):]  # drop the filter onset
    if peak is not None:
        y *= peak / np.max(np.abs(y))
    return SyntheticVowel(AudioClip(y, fs), vt, np.asarray(glottis), tuple(formants_hz),
                          tuple(bandwidths_hz), f0_hz, lip_leak)


def random_vowel(rng: np.random.Generator, duration_s: float = 0.5, fs: int = 16000,
                 upper_formants: bool = False):
    """Random 3-formant vowel with a random order-3 glottis.

    ``upper_formants`` appends fixed F4/F5 after drawing the random values,
    so the same ``rng`` state yields the same F1-F3, F0 and glottis.
    """
    f1 = rng.uniform(300, 850)
    f2 = rng.uniform(max(f1 + 400, 900), 2300)
    f3 = rng.uniform(max(f2 + 500, 2300), 3400)
    bws = tuple(rng.uniform(50, 120, size=3))
    f0 = rng.uniform(90, 250)
    glottis = glottal_poly(pair_radius=rng.uniform(0.95, 0.99),
                           pair_freq_hz=rng.uniform(30, 120),
                           real_pole=rng.uniform(0.5, 0.95), fs=fs)
    freqs, bws = (f1, f2, f3), bws
    if upper_formants:
        freqs, bws = freqs + UPPER_FORMANTS_HZ, bws + UPPER_BANDWIDTHS_HZ
    return synthetic_vowel(f0, freqs, bws, duration_s, fs, glottis=glottis)


def white_noise(duration_s: float, fs: int = 16000, seed: int = 0, rms: float = 0.1):
    x = np.random.default_rng(seed).standard_normal(int(round(duration_s * fs)))
    return AudioClip(rms * x, fs)


def tone(freq_hz: float, duration_s: float, fs: int = 16000, amplitude: float = 1.0):
    t = np.arange(int(round(duration_s * fs))) / fs
    return AudioClip(amplitude * np.sin(2 * np.pi * freq_hz * t), fs)
