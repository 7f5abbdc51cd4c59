"""Numerical kernels: framing, LP analysis, filtering, STFT and minimum phase.

Conventions used throughout the package:

* frames are centered: frame ``k`` is centered on sample ``k * hop`` of the
  original signal, which is reflect-padded by ``frame_length // 2`` on both
  sides, so ``num_frames = ceil(n / hop)``;
* the analysis window is a periodic Hann window;
* spectra are one-sided (``fft_size // 2 + 1`` bins).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.signal import lfilter, lfiltic

from .audio_io import AudioClip
from .errors import (
    DegenerateGrid,
    GridMismatch,
    NonPositiveEnvelope,
    SingularAutocorrelation,
    UnstableModel,
)

FRAME_LENGTH = 512
HOP = 128
FFT_SIZE = 1024

BANDWIDTH_EXPANSION = 0.994
STABILITY_MARGIN = 1e-6


@dataclass(frozen=True)
class FrameGrid:
    frame_length_samples: int = FRAME_LENGTH
    hop_samples: int = HOP
    num_frames: int = 0
    sample_rate_hz: int = 16000
    window_kind: str = "hann"

    def __post_init__(self):
        if self.hop_samples <= 0 or self.frame_length_samples <= 1:
            raise DegenerateGrid(
                f"hop={self.hop_samples}, frame_length={self.frame_length_samples}"
            )
        if self.window_kind != "hann":
            raise DegenerateGrid(f"unsupported window {self.window_kind!r}")

    @classmethod
    def for_length(cls, n_samples: int, frame_length: int = FRAME_LENGTH,
                   hop: int = HOP, sample_rate_hz: int = 16000) -> "FrameGrid":
        if hop <= 0 or frame_length <= 1:
            raise DegenerateGrid(f"hop={hop}, frame_length={frame_length}")
        return cls(frame_length, hop, math.ceil(n_samples / hop), sample_rate_hz)

    @property
    def window(self) -> np.ndarray:
        return hann(self.frame_length_samples)

    @property
    def pad(self) -> int:
        return self.frame_length_samples // 2

    @property
    def num_samples(self) -> int:
        return self.num_frames * self.hop_samples

    def frame_times_s(self) -> np.ndarray:
        return np.arange(self.num_frames) * self.hop_samples / self.sample_rate_hz


@dataclass(frozen=True)
class LpcModel:
    coefficients: np.ndarray
    gain: float = 1.0

    def __post_init__(self):
        a = np.asarray(self.coefficients, dtype=np.float64)
        if a.ndim != 1 or a.size == 0 or a[0] != 1.0:
            raise ValueError("LP polynomial must be monic: a[0] == 1")
        object.__setattr__(self, "coefficients", a)
        object.__setattr__(self, "gain", float(self.gain))

    @property
    def order(self) -> int:
        return self.coefficients.size - 1

    def poles(self) -> np.ndarray:
        if self.order == 0:
            return np.zeros(0, dtype=complex)
        return np.roots(self.coefficients)

    def is_stable(self, margin: float = STABILITY_MARGIN) -> bool:
        return bool(np.all(np.abs(self.poles()) < 1.0 - margin))

    def response(self, n_bins: int) -> np.ndarray:
        """gain / A(e^jw) on ``n_bins`` equally spaced points of [0, pi]."""
        w = np.linspace(0.0, np.pi, n_bins)
        z = np.exp(-1j * np.outer(w, np.arange(self.order + 1)))
        return self.gain / (z @ self.coefficients)


@dataclass(frozen=True)
class FrameSpectrum:
    magnitudes: np.ndarray
    fft_size: int
    sample_rate_hz: int = 16000

    def __post_init__(self):
        m = np.asarray(self.magnitudes, dtype=np.float64)
        if m.shape != (self.fft_size // 2 + 1,):
            raise GridMismatch(f"expected {self.fft_size // 2 + 1} bins, got {m.shape}")
        if not np.all(np.isfinite(m)) or np.any(m < 0):
            raise ValueError("magnitudes must be finite and nonnegative")
        object.__setattr__(self, "magnitudes", m)

    @property
    def bin_width_hz(self) -> float:
        return self.sample_rate_hz / self.fft_size

    def frequencies(self) -> np.ndarray:
        return np.arange(self.magnitudes.size) * self.bin_width_hz


@lru_cache(maxsize=8)
def _hann(n: int) -> np.ndarray:
    w = 0.5 - 0.5 * np.cos(2.0 * np.pi * np.arange(n) / n)
    w.flags.writeable = False
    return w


def hann(n: int) -> np.ndarray:
    """Periodic Hann window (COLA at hop n/2 and, squared, at hop n/4)."""
    return _hann(int(n))


def _samples(x) -> np.ndarray:
    return x.samples if isinstance(x, AudioClip) else np.asarray(x, dtype=np.float64)


def _pad_signal(x: np.ndarray, grid: FrameGrid) -> np.ndarray:
    pad = grid.pad
    tail = grid.num_frames * grid.hop_samples + grid.frame_length_samples - pad - x.size
    tail = max(tail, pad)
    if x.size > max(pad, tail):
        return np.pad(x, (pad, tail), mode="reflect")
    # too short to reflect; pad with zeros
    return np.pad(x, (pad, tail))


def frame_signal(clip, grid: FrameGrid, window: bool = True) -> np.ndarray:
    """Return a ``(num_frames, frame_length)`` array of (windowed) frames."""
    x = _samples(clip)
    if grid.hop_samples <= 0 or grid.frame_length_samples <= 1:
        raise DegenerateGrid("degenerate frame grid")
    padded = _pad_signal(x, grid)
    idx = (np.arange(grid.num_frames)[:, None] * grid.hop_samples
           + np.arange(grid.frame_length_samples)[None, :])
    frames = padded[idx]
    if window:
        frames = frames * grid.window
    return frames


def autocorrelation(frame, max_lag: int) -> np.ndarray:
    """r[k] = sum_n x[n] x[n+k] for k = 0..max_lag."""
    x = np.asarray(frame, dtype=np.float64)
    if x.size == 0:
        return np.zeros(max_lag + 1)
    if max_lag >= x.size:
        raise ValueError(f"max_lag {max_lag} must be < frame length {x.size}")
    if max_lag <= 64:
        return np.array([np.dot(x[: x.size - k], x[k:]) for k in range(max_lag + 1)])
    n = 1 << int(np.ceil(np.log2(2 * x.size)))
    spec = np.fft.rfft(x, n)
    return np.fft.irfft(spec.real ** 2 + spec.imag ** 2, n)[: max_lag + 1]


def bandwidth_expand(a: np.ndarray, gamma: float = BANDWIDTH_EXPANSION) -> np.ndarray:
    return a * gamma ** np.arange(a.size)


def levinson_durbin(r, order: int) -> LpcModel:
    """Solve the autocorrelation normal equations for a monic LP polynomial.

    Unstable or marginal solutions are pulled inside the unit circle by
    repeated bandwidth expansion.
    """
    r = np.asarray(r, dtype=np.float64)
    if order > r.size - 1:
        raise ValueError(f"order {order} needs {order + 1} lags, got {r.size}")
    if not np.isfinite(r[0]) or r[0] <= 0:
        raise SingularAutocorrelation(f"r[0] = {r[0]}")
    a = np.zeros(order + 1)
    a[0] = 1.0
    err = r[0]
    for i in range(1, order + 1):
        acc = r[i] + np.dot(a[1:i], r[i - 1:0:-1])
        k = -acc / err
        if not np.isfinite(k):
            raise SingularAutocorrelation(f"reflection coefficient {i} is {k}")
        a[1:i + 1] = a[1:i + 1] + k * a[i - 1::-1][:i]
        err *= 1.0 - k * k
        if err <= 0:
            # perfectly predictable input; higher orders add nothing
            err = max(err, 0.0)
            break
    model = LpcModel(a, math.sqrt(max(err, 0.0)))
    for _ in range(200):
        if model.is_stable():
            break
        model = LpcModel(bandwidth_expand(model.coefficients), model.gain)
    return model


def lpc(frame, order: int) -> LpcModel:
    return levinson_durbin(autocorrelation(frame, order), order)


def fir_filter(signal, coeffs, initial_state=None) -> np.ndarray:
    """y[n] = sum_k a[k] x[n-k]; ``initial_state`` holds x[-1], x[-2], ...

    Missing history is taken as zeros.
    """
    a = np.asarray(coeffs, dtype=np.float64)
    x = np.asarray(signal, dtype=np.float64)
    if a.size == 0 or a[0] != 1.0:
        raise ValueError("FIR polynomial must be monic")
    history = np.zeros(a.size - 1)
    if initial_state is not None:
        s = np.asarray(initial_state, dtype=np.float64)[: a.size - 1]
        history[: s.size] = s
    ext = np.concatenate([history[::-1], x])
    return np.convolve(ext, a, mode="full")[a.size - 1: a.size - 1 + x.size]


def allpole_filter(signal, model, initial_state=None) -> np.ndarray:
    """y[n] = x[n] - sum_{k>=1} a[k] y[n-k]; ``initial_state`` holds y[-1], y[-2], ...

    ``model`` may be an LpcModel or a bare monic coefficient vector. The
    gain of an LpcModel is not applied here.
    """
    a = model.coefficients if isinstance(model, LpcModel) else np.asarray(model, float)
    if a.size == 0 or a[0] != 1.0:
        raise ValueError("all-pole polynomial must be monic")
    if a.size > 1 and np.any(np.abs(np.roots(a)) >= 1.0):
        raise UnstableModel("all-pole model has poles on or outside the unit circle")
    x = np.asarray(signal, dtype=np.float64)
    if initial_state is None or a.size == 1:
        return lfilter([1.0], a, x)
    zi = lfiltic([1.0], a, np.asarray(initial_state, dtype=np.float64)[: a.size - 1])
    return lfilter([1.0], a, x, zi=zi)[0]


def leaky_integrate(signal, leak: float = 0.99) -> np.ndarray:
    """y[n] = x[n] + leak * y[n-1]: the inverse of the lip-radiation FIR [1, -leak]."""
    if not 0.0 < leak < 1.0:
        raise ValueError(f"leak must be in (0, 1), got {leak}")
    return lfilter([1.0], [1.0, -leak], np.asarray(signal, dtype=np.float64))


def stft(clip, grid: FrameGrid, fft_size: int = FFT_SIZE):
    """Windowed, zero-padded FFT of every frame.

    Returns ``(magnitudes, phases)``, each ``(num_frames, fft_size // 2 + 1)``.
    """
    if fft_size < grid.frame_length_samples:
        raise DegenerateGrid(f"fft_size {fft_size} < frame length {grid.frame_length_samples}")
    spec = np.fft.rfft(frame_signal(clip, grid), fft_size, axis=1)
    return np.abs(spec), np.angle(spec)


def ola_normalizer(grid: FrameGrid, power: int) -> np.ndarray:
    """Per-sample sum of ``window ** power`` over all frames, in padded coordinates."""
    w = grid.window ** power
    total = (grid.num_frames - 1) * grid.hop_samples + grid.frame_length_samples
    acc = np.zeros(total)
    for k in range(grid.num_frames):
        start = k * grid.hop_samples
        acc[start:start + w.size] += w
    return acc


def overlap_add(frames: np.ndarray, grid: FrameGrid, length: int | None = None,
                window_power: int = 1) -> np.ndarray:
    """Overlap-add frames laid out on ``grid``; divide by the window sum.

    ``frames`` may be longer than the frame length (filter tails); the
    extra samples are accumulated and then cropped away.
    """
    frames = np.asarray(frames, dtype=np.float64)
    if frames.shape[0] != grid.num_frames:
        raise GridMismatch(f"{frames.shape[0]} frames for a grid of {grid.num_frames}")
    width = frames.shape[1]
    total = (grid.num_frames - 1) * grid.hop_samples + max(width, grid.frame_length_samples)
    acc = np.zeros(total)
    for k in range(grid.num_frames):
        start = k * grid.hop_samples
        acc[start:start + width] += frames[k]
    norm = ola_normalizer(grid, window_power)
    norm = np.pad(norm, (0, total - norm.size))
    out = np.divide(acc, norm, out=np.zeros_like(acc), where=norm > 1e-8)
    if length is None:
        length = grid.num_samples
    out = out[grid.pad: grid.pad + length]
    if out.size < length:
        out = np.pad(out, (0, length - out.size))
    return out


def istft_overlap_add(magnitudes, phases, grid: FrameGrid, fft_size: int = FFT_SIZE,
                      length: int | None = None) -> AudioClip:
    """Inverse of :func:`stft`: synthesis-windowed OLA divided by the window-square sum."""
    magnitudes = np.asarray(magnitudes, dtype=np.float64)
    if magnitudes.shape != (grid.num_frames, fft_size // 2 + 1):
        raise GridMismatch(
            f"spectra {magnitudes.shape} do not match grid "
            f"({grid.num_frames}, {fft_size // 2 + 1})")
    spec = magnitudes * np.exp(1j * np.asarray(phases))
    frames = np.fft.irfft(spec, fft_size, axis=1)[:, : grid.frame_length_samples]
    frames = frames * grid.window
    return AudioClip(overlap_add(frames, grid, length, window_power=2), grid.sample_rate_hz)


def minimum_phase_response(envelope, fft_size: int | None = None,
                           n_out: int | None = None) -> np.ndarray:
    """Minimum-phase complex spectrum whose magnitude equals ``envelope``.

    ``envelope`` holds ``fft_size // 2 + 1`` positive magnitudes (a
    FrameSpectrum or array; 2-D arrays are processed row-wise). The phase
    comes from folding the real cepstrum of the log magnitude onto positive
    quefrencies. ``n_out > fft_size`` evaluates the same response on a
    finer grid, which keeps long impulse responses from wrapping.
    """
    if isinstance(envelope, FrameSpectrum):
        fft_size = envelope.fft_size
        mag = envelope.magnitudes
    else:
        mag = np.asarray(envelope, dtype=np.float64)
    if fft_size is None:
        fft_size = 2 * (mag.shape[-1] - 1)
    if not np.all(mag > 0) or not np.all(np.isfinite(mag)):
        raise NonPositiveEnvelope("envelope must be strictly positive and finite")
    cep = np.fft.irfft(np.log(mag), fft_size, axis=-1)
    half = fft_size // 2
    fold = np.zeros_like(cep)
    fold[..., 0] = cep[..., 0]
    fold[..., 1:half] = 2.0 * cep[..., 1:half]
    fold[..., half] = cep[..., half]
    return np.exp(np.fft.rfft(fold, n_out or fft_size, axis=-1))


LAG_OVERSAMPLING = 4
SUBHARMONIC_TOLERANCE = 0.85


def normalized_autocorrelation_peak(segment: np.ndarray, frame_length: int,
                                    min_lag: int, max_lag: int):
    """Best normalized cross-correlation over lags ``min_lag..max_lag``.

    ``segment`` must hold ``frame_length + max_lag + 1`` samples. The score
    for lag ``t`` correlates ``segment[:frame_length]`` with the same-length
    block starting at ``t``, normalized by both block energies. The
    cross-correlation is evaluated on a quarter-sample lag grid (band-limited
    interpolation), so fractional periods are not penalized, then refined
    by parabolic interpolation. The shortest-lag local maximum within
    ``SUBHARMONIC_TOLERANCE`` of the best one wins, which avoids picking
    period multiples. Returns ``(peak, lag)``; zero-energy input gives
    ``(0.0, 0.0)``.
    """
    x = np.asarray(segment, dtype=np.float64)
    head = x[:frame_length]
    e0 = float(np.dot(head, head))
    if e0 <= 1e-20:
        return 0.0, 0.0
    up = LAG_OVERSAMPLING
    n = 1 << int(np.ceil(np.log2(x.size + frame_length)))
    prod = np.conj(np.fft.rfft(head, n)) * np.fft.rfft(x, n)
    cross = np.fft.irfft(prod, n * up) * up
    steps = np.arange((min_lag - 1) * up, (max_lag + 1) * up + 1)
    lags = steps / up
    csum = np.concatenate([[0.0], np.cumsum(x * x)])
    int_lags = np.arange(min_lag - 1, max_lag + 2)
    block = csum[int_lags + frame_length] - csum[int_lags]
    energy = np.interp(lags, int_lags, block)
    denom = np.sqrt(e0 * np.maximum(energy, 0.0))
    nccf = np.divide(cross[steps], denom, out=np.zeros(steps.size),
                     where=denom > 1e-20 * e0)
    inner = nccf[1:-1]
    in_range = (lags[1:-1] >= min_lag) & (lags[1:-1] <= max_lag)
    is_peak = (inner >= nccf[:-2]) & (inner >= nccf[2:]) & (inner > 0) & in_range
    if not np.any(is_peak):
        return 0.0, 0.0
    cand = np.flatnonzero(is_peak)
    best = inner[cand].max()
    pick = cand[np.flatnonzero(inner[cand] >= SUBHARMONIC_TOLERANCE * best)[0]]
    y0, y1, y2 = nccf[pick], nccf[pick + 1], nccf[pick + 2]
    curv = y0 - 2.0 * y1 + y2
    delta = 0.5 * (y0 - y2) / curv if curv < 0 else 0.0
    delta = float(np.clip(delta, -0.5, 0.5))
    peak = y1 - 0.25 * (y0 - y2) * delta
    return float(np.clip(peak, 0.0, 1.0)), float(lags[pick + 1] + delta / up)


def pitch_segments(clip, grid: FrameGrid, max_lag: int) -> np.ndarray:
    """Unwindowed ``frame_length + max_lag`` segments centered like the grid frames."""
    x = _samples(clip)
    span = grid.frame_length_samples + max_lag
    lead = span // 2
    tail = grid.num_frames * grid.hop_samples + span
    if x.size > max(lead, tail):
        padded = np.pad(x, (lead, tail), mode="reflect")
    else:
        padded = np.pad(x, (lead, tail))
    idx = (np.arange(grid.num_frames)[:, None] * grid.hop_samples
           + np.arange(span)[None, :])
    return padded[idx]
