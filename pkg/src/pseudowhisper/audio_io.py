"""WAV input/output and sample-rate conversion."""
from __future__ import annotations

import struct
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from pathlib import Path

import numpy as np
from scipy.io import wavfile
from scipy.signal import firwin, resample_poly

from .errors import EmptyAudio, InvalidRate, IoFailure, MalformedContainer, UnsupportedEncoding

TARGET_RATE = 16000

_PCM = 1
_IEEE_FLOAT = 3
_EXTENSIBLE = 0xFFFE

# windowed-sinc resampler
KAISER_BETA = 10.0
TAPS_PER_PHASE = 64
CUTOFF_RATIO = 0.45


@dataclass(frozen=True)
class AudioClip:
    samples: np.ndarray
    sample_rate_hz: int

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=np.float64)
        if samples.ndim != 1:
            raise ValueError("AudioClip holds mono samples only")
        if int(self.sample_rate_hz) <= 0:
            raise InvalidRate(f"sample rate must be positive, got {self.sample_rate_hz}")
        object.__setattr__(self, "samples", samples)
        object.__setattr__(self, "sample_rate_hz", int(self.sample_rate_hz))

    def __len__(self):
        return self.samples.size

    @property
    def duration_s(self) -> float:
        return self.samples.size / self.sample_rate_hz


def _read_format_tag(path: Path) -> tuple[int, int, int]:
    """Walk the RIFF chunks far enough to classify the encoding."""
    with open(path, "rb") as fh:
        head = fh.read(12)
        if len(head) < 12 or head[:4] != b"RIFF" or head[8:12] != b"WAVE":
            raise MalformedContainer(f"{path}: not a RIFF/WAVE file")
        while True:
            chunk = fh.read(8)
            if len(chunk) < 8:
                raise MalformedContainer(f"{path}: missing fmt chunk")
            cid, size = struct.unpack("<4sI", chunk)
            if cid != b"fmt ":
                fh.seek(size + (size & 1), 1)
                continue
            body = fh.read(size)
            if len(body) < 16:
                raise MalformedContainer(f"{path}: truncated fmt chunk")
            tag, channels, _, _, _, bits = struct.unpack("<HHIIHH", body[:16])
            if tag == _EXTENSIBLE and len(body) >= 26:
                tag = struct.unpack("<H", body[24:26])[0]
            return tag, channels, bits


def read_wav(path) -> AudioClip:
    """Read a 16-bit PCM or 32-bit float WAV as a mono clip in [-1, 1]."""
    path = Path(path)
    try:
        tag, channels, bits = _read_format_tag(path)
    except OSError as exc:
        raise IoFailure(str(exc)) from exc
    if not ((tag == _PCM and bits == 16) or (tag == _IEEE_FLOAT and bits == 32)):
        raise UnsupportedEncoding(f"{path}: format tag {tag:#x}, {bits} bits")
    if channels not in (1, 2):
        raise UnsupportedEncoding(f"{path}: {channels} channels")
    try:
        rate, data = wavfile.read(path)
    except ValueError as exc:
        raise MalformedContainer(f"{path}: {exc}") from exc
    if data.shape[0] == 0:
        raise EmptyAudio(f"{path}: no frames")
    if data.dtype == np.int16:
        data = data.astype(np.float64) / 32768.0
    else:
        data = data.astype(np.float64)
    if data.ndim == 2:
        data = data.mean(axis=1)
    return AudioClip(data, rate)


def write_wav(clip: AudioClip, path) -> float:
    """Write 16-bit PCM mono. Returns the peak-rescale factor (1.0 if none).

    Clips peaking above full scale are scaled as a whole to 0.99 rather
    than hard-clipped.
    """
    x = clip.samples
    if x.size == 0:
        raise EmptyAudio("refusing to write an empty clip")
    peak = float(np.max(np.abs(x)))
    scale = 1.0
    if peak > 1.0:
        scale = 0.99 / peak
        x = x * scale
    q = np.clip(np.round(x * 32768.0), -32768, 32767).astype("<i2")
    try:
        wavfile.write(path, clip.sample_rate_hz, q)
    except OSError as exc:
        raise IoFailure(str(exc)) from exc
    return scale


@lru_cache(maxsize=16)
def _resampling_filter(up: int, down: int) -> np.ndarray:
    # cutoff 0.45 * min(rate) relative to the upsampled Nyquist
    factor = max(up, down)
    cutoff = 2.0 * CUTOFF_RATIO / factor
    half = TAPS_PER_PHASE * factor // 2
    return firwin(2 * half + 1, cutoff, window=("kaiser", KAISER_BETA))


def resample(clip: AudioClip, target_rate_hz: int) -> AudioClip:
    """Polyphase windowed-sinc rate conversion.

    Output length is ``round(n * target / source)``.
    """
    target_rate_hz = int(target_rate_hz)
    if target_rate_hz <= 0:
        raise InvalidRate(f"target rate must be positive, got {target_rate_hz}")
    if clip.samples.size == 0:
        raise EmptyAudio("cannot resample an empty clip")
    source = clip.sample_rate_hz
    if source == target_rate_hz:
        return AudioClip(clip.samples.copy(), source)
    return AudioClip(resample_ratio(clip.samples, Fraction(target_rate_hz, source)),
                     target_rate_hz)


def resample_ratio(x: np.ndarray, ratio: Fraction) -> np.ndarray:
    """Resample by the rational factor ``ratio`` (output/input rate)."""
    up, down = ratio.numerator, ratio.denominator
    y = resample_poly(x, up, down, window=_resampling_filter(up, down))
    n_out = int(round(x.size * up / down))
    if y.size >= n_out:
        return y[:n_out]
    return np.concatenate([y, np.zeros(n_out - y.size)])


def to_target_rate(clip: AudioClip, rate: int = TARGET_RATE) -> AudioClip:
    return clip if clip.sample_rate_hz == rate else resample(clip, rate)
