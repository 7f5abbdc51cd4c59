"""Pulse/noise vocoder: F0, spectral envelope and aperiodicity analysis,
and minimum-phase overlap-add synthesis.

Envelope convention: ``sp`` holds the power spectrum envelope on the STFT
scale, i.e. for a stationary signal with per-sample power spectral density
``P(f)``, ``sp ~= P(f) * sum(window ** 2)``. Synthesis divides that factor
back out, so ``synthesize(analyze(x))`` preserves level.
"""
from __future__ import annotations

import struct
from dataclasses import dataclass, field, replace

import numpy as np

from . import dsp_core as dsp
from . import rng
from .audio_io import AudioClip
from .errors import GridMismatch, MalformedContainer, SingularAutocorrelation

ABSOLUTE_FLOOR = 1e-20


@dataclass(frozen=True)
class VocoderConfig:
    sample_rate_hz: int = 16000
    frame_length: int = dsp.FRAME_LENGTH
    hop: int = dsp.HOP
    fft_size: int = dsp.FFT_SIZE
    f0_min: float = 60.0
    f0_max: float = 400.0
    voicing_threshold: float = 0.35
    whitening_order: int = 12
    # white-noise correction on the whitening LP (r[0] *= 1 + this), i.e. a
    # -30 dB floor so quantization noise in empty bands is not amplified
    whitening_floor: float = 1e-3
    lifter_ratio: float = 0.7
    unvoiced_lifter: int = 80
    presmooth_ratio: float = 2.0 / 3.0
    floor_ratio: float = 1e-10
    synthesis_oversampling: int = 4

    def grid(self, n_samples: int) -> dsp.FrameGrid:
        return dsp.FrameGrid.for_length(n_samples, self.frame_length, self.hop,
                                        self.sample_rate_hz)

    @property
    def lag_range(self) -> tuple[int, int]:
        fs = self.sample_rate_hz
        return int(np.floor(fs / self.f0_max)), int(np.ceil(fs / self.f0_min))

    @property
    def n_bins(self) -> int:
        return self.fft_size // 2 + 1

    @property
    def bin_width_hz(self) -> float:
        return self.sample_rate_hz / self.fft_size


@dataclass
class VocoderFeatures:
    f0: np.ndarray
    sp: np.ndarray
    ap: np.ndarray
    grid: dsp.FrameGrid
    fft_size: int = dsp.FFT_SIZE

    def __post_init__(self):
        self.f0 = np.asarray(self.f0, dtype=np.float64)
        self.sp = np.asarray(self.sp, dtype=np.float64)
        self.ap = np.asarray(self.ap, dtype=np.float64)
        n = self.grid.num_frames
        bins = self.fft_size // 2 + 1
        if self.f0.shape != (n,) or self.sp.shape != (n, bins) or self.ap.shape != (n, bins):
            raise GridMismatch(
                f"tracks f0{self.f0.shape} sp{self.sp.shape} ap{self.ap.shape} "
                f"do not match {n} frames x {bins} bins")

    @property
    def bin_width_hz(self) -> float:
        return self.grid.sample_rate_hz / self.fft_size

    def replace(self, **changes) -> "VocoderFeatures":
        return replace(self, **changes)


@dataclass
class ExcitationSignal:
    pulses: np.ndarray
    noise: np.ndarray
    voiced: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=bool))


def whiten(segment: np.ndarray, order: int, floor: float = 1e-3) -> np.ndarray:
    """LP residual of ``segment``; the first ``order`` samples serve as history."""
    if order <= 0:
        return segment
    r = dsp.autocorrelation(segment * dsp.hann(segment.size), order).copy()
    r[0] *= 1.0 + floor
    try:
        model = dsp.levinson_durbin(r, order)
    except SingularAutocorrelation:
        return np.zeros(segment.size - order)
    return dsp.fir_filter(segment, model.coefficients)[order:]


def periodicity_track(clip, cfg: VocoderConfig = VocoderConfig(),
                      grid: dsp.FrameGrid | None = None):
    """Per-frame normalized autocorrelation peak and its (fractional) lag.

    The correlation runs on the LP residual of each segment, so formant
    ringing in noise-excited speech is not mistaken for periodicity.
    """
    x = clip.samples if isinstance(clip, AudioClip) else np.asarray(clip, float)
    if grid is None:
        grid = cfg.grid(x.size)
    lo, hi = cfg.lag_range
    order = cfg.whitening_order
    segs = dsp.pitch_segments(x, grid, hi + 1 + order)
    peaks = np.zeros(grid.num_frames)
    lags = np.zeros(grid.num_frames)
    for k, seg in enumerate(segs):
        peaks[k], lags[k] = dsp.normalized_autocorrelation_peak(
            whiten(seg, order, cfg.whitening_floor), grid.frame_length_samples, lo, hi)
    return peaks, lags


def _f0_from_track(peaks, lags, cfg: VocoderConfig) -> np.ndarray:
    with np.errstate(divide="ignore"):
        f0 = np.where(lags > 0, cfg.sample_rate_hz / np.where(lags > 0, lags, 1.0), 0.0)
    voiced = (peaks >= cfg.voicing_threshold) & (f0 >= cfg.f0_min) & (f0 <= cfg.f0_max)
    return np.where(voiced, f0, 0.0)


def estimate_f0(clip: AudioClip, cfg: VocoderConfig = VocoderConfig()) -> np.ndarray:
    """F0 per frame in Hz (0 = unvoiced) from the normalized autocorrelation peak."""
    peaks, lags = periodicity_track(clip, cfg)
    return _f0_from_track(peaks, lags, cfg)


def envelope_floor(sp: np.ndarray, cfg: VocoderConfig = VocoderConfig()) -> float:
    peak = float(np.max(sp)) if sp.size else 0.0
    return max(peak * cfg.floor_ratio, ABSOLUTE_FLOOR)


def lifter_cutoffs(f0: np.ndarray, cfg: VocoderConfig = VocoderConfig()) -> np.ndarray:
    cut = np.full(f0.shape, cfg.unvoiced_lifter, dtype=int)
    voiced = f0 > 0
    cut[voiced] = np.round(cfg.lifter_ratio * cfg.sample_rate_hz / f0[voiced]).astype(int)
    return np.clip(cut, 1, cfg.fft_size // 2 - 1)


def smoothing_widths_hz(f0: np.ndarray, cfg: VocoderConfig = VocoderConfig()) -> np.ndarray:
    """Linear pre-smoothing width per frame: a fraction of F0, or of the
    nominal F0 implied by the unvoiced lifter."""
    nominal = cfg.lifter_ratio * cfg.sample_rate_hz / cfg.unvoiced_lifter
    return cfg.presmooth_ratio * np.where(f0 > 0, f0, nominal)


def box_smooth(power: np.ndarray, widths_bins: np.ndarray) -> np.ndarray:
    """Average each frame over a centered box of (fractional) width, mirrored at the edges."""
    n_frames, n_bins = power.shape
    ext = np.concatenate([power[:, :0:-1], power, power[:, -2::-1]], axis=1)
    cum = np.concatenate([np.zeros((n_frames, 1)), np.cumsum(ext, axis=1)], axis=1)
    grid = np.arange(cum.shape[1]) - 0.5  # cum[:, i] integrates ext up to bin edge i - 0.5
    centers = np.arange(n_bins) + (n_bins - 1)
    out = np.empty_like(power)
    for k in range(n_frames):
        w = max(float(widths_bins[k]), 1.0)
        hi = np.interp(centers + w / 2, grid, cum[k])
        lo = np.interp(centers - w / 2, grid, cum[k])
        out[k] = (hi - lo) / w
    return out


def cepstral_smooth(power: np.ndarray, cutoffs: np.ndarray, fft_size: int) -> np.ndarray:
    """Keep quefrencies ``|q| <= cutoff`` of each frame's log power spectrum."""
    cep = np.fft.irfft(np.log(power), fft_size, axis=1)
    q = np.arange(fft_size)
    q = np.minimum(q, fft_size - q)
    lifter = q[None, :] <= cutoffs[:, None]
    return np.exp(np.fft.rfft(cep * lifter, fft_size, axis=1).real)


def estimate_envelope(clip: AudioClip, f0: np.ndarray,
                      cfg: VocoderConfig = VocoderConfig()) -> np.ndarray:
    """Pitch-adaptive power envelope per frame.

    The power spectrum is first averaged linearly over a box of 2/3 F0 (so
    the level between harmonics is not lost to log averaging), then
    cepstrally liftered at ``0.7 * fs / F0`` quefrency samples.
    """
    grid = cfg.grid(clip.samples.size)
    f0 = np.asarray(f0, dtype=np.float64)
    if f0.shape != (grid.num_frames,):
        raise GridMismatch(f"{f0.size} F0 values for {grid.num_frames} frames")
    mag, _ = dsp.stft(clip, grid, cfg.fft_size)
    power = mag ** 2
    floor = envelope_floor(power, cfg)
    power = box_smooth(power, smoothing_widths_hz(f0, cfg) / cfg.bin_width_hz)
    smooth = cepstral_smooth(np.maximum(power, floor), lifter_cutoffs(f0, cfg), cfg.fft_size)
    return np.maximum(smooth, floor)


def estimate_aperiodicity(clip: AudioClip, f0: np.ndarray,
                          cfg: VocoderConfig = VocoderConfig(),
                          peaks: np.ndarray | None = None) -> np.ndarray:
    """Frame-constant aperiodicity ``1 - periodicity``; unvoiced frames are 1."""
    if peaks is None:
        peaks, _ = periodicity_track(clip, cfg)
    f0 = np.asarray(f0, dtype=np.float64)
    alpha = np.where(f0 > 0, np.clip(1.0 - peaks, 0.0, 1.0), 1.0)
    return np.repeat(alpha[:, None], cfg.n_bins, axis=1)


def analyze(clip: AudioClip, cfg: VocoderConfig = VocoderConfig()) -> VocoderFeatures:
    if clip.sample_rate_hz != cfg.sample_rate_hz:
        cfg = replace(cfg, sample_rate_hz=clip.sample_rate_hz)
    grid = cfg.grid(clip.samples.size)
    peaks, lags = periodicity_track(clip, cfg, grid)
    f0 = _f0_from_track(peaks, lags, cfg)
    sp = estimate_envelope(clip, f0, cfg)
    ap = estimate_aperiodicity(clip, f0, cfg, peaks)
    return VocoderFeatures(f0, sp, ap, grid, cfg.fft_size)


def build_excitation(f0: np.ndarray, grid: dsp.FrameGrid, seed: int,
                     length: int, offset: int = 0) -> ExcitationSignal:
    """Unit-power pulse train following ``f0`` plus unit-variance noise.

    Each pulse is scaled by ``sqrt(fs / f0)`` so the pulse train carries
    unit power per sample at any F0. Sample ``i`` of the result sits at
    time ``i - offset`` on the original signal, whose frame ``k`` is
    centered on ``k * hop``.
    """
    fs = grid.sample_rate_hz
    f0 = np.asarray(f0, dtype=np.float64)
    t = np.arange(length) - offset
    frame_of = np.clip(np.round(t / grid.hop_samples).astype(int), 0, grid.num_frames - 1)
    f0_n = f0[frame_of]
    cycles = np.cumsum(f0_n / fs)
    count = np.floor(cycles)
    fired = np.diff(np.concatenate([[0.0], count])) > 0
    pulses = np.zeros(length)
    voiced = f0_n > 0
    hit = fired & voiced
    pulses[hit] = np.sqrt(fs / f0_n[hit])
    noise = rng.gaussian(seed, length)
    return ExcitationSignal(pulses, noise, voiced)


def synthesis_filters(sp: np.ndarray, grid: dsp.FrameGrid, fft_size: int,
                      n_out: int | None = None) -> np.ndarray:
    """Minimum-phase filter spectra matching ``sp`` per unit-variance input sample."""
    window_energy = float(np.sum(grid.window ** 2))
    magnitude = np.sqrt(np.maximum(sp, ABSOLUTE_FLOOR) / window_energy)
    return dsp.minimum_phase_response(magnitude, fft_size, n_out)


def synthesize(features: VocoderFeatures, cfg: VocoderConfig = VocoderConfig(),
               seed: int = 0, length: int | None = None) -> AudioClip:
    """Render features with pulse/noise excitation and minimum-phase OLA.

    Deterministic in ``(features, cfg, seed)``. Output has ``length``
    samples (default ``num_frames * hop``).
    """
    grid = features.grid
    fft_size = features.fft_size
    if fft_size < grid.frame_length_samples:
        raise GridMismatch("fft_size shorter than the frame")
    if length is None:
        length = grid.num_samples
    span = grid.num_frames * grid.hop_samples + grid.frame_length_samples
    exc = build_excitation(features.f0, grid, seed, span, offset=grid.pad)
    w = grid.window
    idx = (np.arange(grid.num_frames)[:, None] * grid.hop_samples
           + np.arange(grid.frame_length_samples)[None, :])
    n_syn = fft_size * cfg.synthesis_oversampling
    pulse_spec = np.fft.rfft(exc.pulses[idx] * w, n_syn, axis=1)
    noise_spec = np.fft.rfft(exc.noise[idx] * w, n_syn, axis=1)
    ap = np.clip(features.ap, 0.0, 1.0)
    unvoiced = features.f0 <= 0
    ap = np.where(unvoiced[:, None], 1.0, ap)
    if n_syn != fft_size:
        # aperiodicity is defined on the analysis bins; stretch it to the synthesis grid
        src = np.linspace(0.0, 1.0, ap.shape[1])
        dst = np.linspace(0.0, 1.0, n_syn // 2 + 1)
        ap = np.stack([np.interp(dst, src, row) for row in ap])
    mix = np.sqrt(1.0 - ap) * pulse_spec + np.sqrt(ap) * noise_spec
    filters = synthesis_filters(features.sp, grid, fft_size, n_syn)
    filtered = np.fft.irfft(mix * filters, n_syn, axis=1)
    y = dsp.overlap_add(filtered, grid, length, window_power=1)
    return AudioClip(y, grid.sample_rate_hz)


# PWF1 feature dump: 16-byte little-endian header, then float32 tracks
FEATURE_MAGIC = b"PWF1"
FEATURE_VERSION = 1
_HEADER = struct.Struct("<4sHIHHH")


def write_features(path, features: VocoderFeatures) -> None:
    grid = features.grid
    header = _HEADER.pack(FEATURE_MAGIC, FEATURE_VERSION, grid.num_frames,
                          features.fft_size, grid.sample_rate_hz, grid.hop_samples)
    with open(path, "wb") as fh:
        fh.write(header)
        for track in (features.f0, features.sp, features.ap):
            fh.write(np.ascontiguousarray(track, dtype="<f4").tobytes())


def read_features(path, frame_length: int = dsp.FRAME_LENGTH) -> VocoderFeatures:
    with open(path, "rb") as fh:
        raw = fh.read()
    if len(raw) < _HEADER.size or raw[:4] != FEATURE_MAGIC:
        raise MalformedContainer(f"{path}: not a PWF1 feature file")
    _, version, frames, fft_size, rate, hop = _HEADER.unpack_from(raw)
    if version != FEATURE_VERSION:
        raise MalformedContainer(f"{path}: unsupported version {version}")
    bins = fft_size // 2 + 1
    body = np.frombuffer(raw, dtype="<f4", offset=_HEADER.size).astype(np.float64)
    if body.size != frames * (1 + 2 * bins):
        raise MalformedContainer(f"{path}: payload size does not match header")
    f0 = body[:frames]
    sp = body[frames: frames + frames * bins].reshape(frames, bins)
    ap = body[frames + frames * bins:].reshape(frames, bins)
    grid = dsp.FrameGrid(frame_length, hop, frames, rate)
    return VocoderFeatures(f0, sp, ap, grid, fft_size)
