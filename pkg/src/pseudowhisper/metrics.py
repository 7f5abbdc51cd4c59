"""Acoustic measurements for checking what a conversion did to a signal."""
from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from . import dsp_core as dsp
from .audio_io import AudioClip
from .errors import GridMismatch, NoPeakFound, SilentClip, TooShort
from .vocoder import VocoderConfig, VocoderFeatures, analyze, periodicity_track

LOW_BAND = (0.0, 1000.0)
HIGH_BAND = (2000.0, 6000.0)
LSD_BAND = (1000.0, 6000.0)
FORMANT_SEARCH = (200.0, 1500.0)
TILT_RANGE = (100.0, 7000.0)


@dataclass
class MetricReport:
    periodicity: float
    band_energy_ratio_db: float
    spectral_tilt_db_per_octave: float
    formant_width_hz: float | None = None
    lsd_db: float | None = None

    def to_dict(self) -> dict:
        return asdict(self)


def periodicity(clip: AudioClip, cfg: VocoderConfig = VocoderConfig()) -> float:
    """Median over frames of the best normalized autocorrelation at 60-400 Hz lags.

    Zero-energy frames score 0.
    """
    grid = cfg.grid(clip.samples.size)
    if grid.num_frames < 3:
        raise TooShort(f"{clip.samples.size} samples give fewer than 3 frames")
    peaks, _ = periodicity_track(clip, cfg, grid)
    return float(np.median(peaks))


def average_power_spectrum(clip: AudioClip, cfg: VocoderConfig = VocoderConfig()):
    grid = cfg.grid(clip.samples.size)
    mag, _ = dsp.stft(clip, grid, cfg.fft_size)
    freqs = np.arange(cfg.n_bins) * clip.sample_rate_hz / cfg.fft_size
    return freqs, np.mean(mag ** 2, axis=0)


def _band_sum(freqs, power, band):
    lo, hi = band
    return float(power[(freqs >= lo) & (freqs < hi)].sum())


def band_energy_ratio(clip: AudioClip, low=LOW_BAND, high=HIGH_BAND,
                      cfg: VocoderConfig = VocoderConfig()) -> float:
    """10 log10(E_high / E_low) from the time-averaged power spectrum, in dB."""
    freqs, power = average_power_spectrum(clip, cfg)
    e_low, e_high = _band_sum(freqs, power, low), _band_sum(freqs, power, high)
    if e_low <= 0 or e_high <= 0:
        raise SilentClip("no energy in one of the comparison bands")
    return 10.0 * np.log10(e_high / e_low)


def spectral_tilt(clip: AudioClip, cfg: VocoderConfig = VocoderConfig(),
                  freq_range=TILT_RANGE) -> float:
    """Least-squares slope of the average log power spectrum, dB per octave."""
    freqs, power = average_power_spectrum(clip, cfg)
    sel = (freqs >= freq_range[0]) & (freqs <= freq_range[1]) & (power > 0)
    if sel.sum() < 2:
        raise SilentClip("no energy in the tilt range")
    slope, _ = np.polyfit(np.log2(freqs[sel]), 10.0 * np.log10(power[sel]), 1)
    return float(slope)


def _envelope_of(x, cfg: VocoderConfig):
    if isinstance(x, AudioClip):
        feats = analyze(x, cfg)
        return feats.sp, feats.bin_width_hz
    if isinstance(x, VocoderFeatures):
        return x.sp, x.bin_width_hz
    return np.atleast_2d(np.asarray(x, dtype=np.float64)), None


def log_spectral_distance(a, b, band=LSD_BAND, bin_width_hz: float | None = None,
                          cfg: VocoderConfig = VocoderConfig()) -> float:
    """Mean over frames of the RMS dB difference between two power envelopes.

    ``a`` and ``b`` may be clips (analyzed first), VocoderFeatures, or
    ``(frames, bins)`` arrays (then ``bin_width_hz`` is required).
    """
    sa, wa = _envelope_of(a, cfg)
    sb, wb = _envelope_of(b, cfg)
    width = bin_width_hz or wa or wb
    if width is None:
        raise ValueError("bin_width_hz is required for bare envelope arrays")
    if sa.shape != sb.shape:
        raise GridMismatch(f"envelope shapes differ: {sa.shape} vs {sb.shape}")
    freqs = np.arange(sa.shape[1]) * width
    sel = (freqs >= band[0]) & (freqs <= band[1])
    diff = 10.0 * np.log10(sa[:, sel] / sb[:, sel])
    return float(np.mean(np.sqrt(np.mean(diff ** 2, axis=1))))


def formant_width(envelope, bin_width_hz: float | None = None, search=FORMANT_SEARCH) -> float:
    """Half-power (-3 dB) width in Hz of the largest peak inside ``search``.

    ``envelope`` is one power-envelope frame (array) or a FrameSpectrum of
    magnitudes. Crossings are located by linear interpolation between bins.
    """
    if isinstance(envelope, dsp.FrameSpectrum):
        power = envelope.magnitudes ** 2
        bin_width_hz = envelope.bin_width_hz
    else:
        power = np.asarray(envelope, dtype=np.float64)
        if bin_width_hz is None:
            raise ValueError("bin_width_hz is required for bare arrays")
    freqs = np.arange(power.size) * bin_width_hz
    inner = np.arange(1, power.size - 1)
    is_peak = (power[inner] > power[inner - 1]) & (power[inner] >= power[inner + 1])
    in_band = (freqs[inner] >= search[0]) & (freqs[inner] <= search[1])
    cand = inner[is_peak & in_band]
    if cand.size == 0:
        raise NoPeakFound(f"no local maximum in {search} Hz")
    k = int(cand[np.argmax(power[cand])])
    half = power[k] / 2.0
    left = k
    while left > 0 and power[left] > half:
        left -= 1
    right = k
    while right < power.size - 1 and power[right] > half:
        right += 1
    if power[left] > half or power[right] > half:
        raise NoPeakFound("peak does not fall to half power inside the spectrum")
    # fractional crossing positions
    lf = left + (half - power[left]) / (power[left + 1] - power[left])
    rf = right - (half - power[right]) / (power[right - 1] - power[right])
    return float((rf - lf) * bin_width_hz)


def measure(clip: AudioClip, cfg: VocoderConfig = VocoderConfig(),
            reference: AudioClip | None = None) -> MetricReport:
    feats = analyze(clip, cfg)
    try:
        width = formant_width(np.mean(feats.sp, axis=0), feats.bin_width_hz)
    except NoPeakFound:
        width = None
    lsd = None
    if reference is not None:
        lsd = log_spectral_distance(feats, analyze(reference, cfg))
    return MetricReport(
        periodicity=periodicity(clip, cfg),
        band_energy_ratio_db=band_energy_ratio(clip, cfg=cfg),
        spectral_tilt_db_per_octave=spectral_tilt(clip, cfg),
        formant_width_hz=width,
        lsd_db=lsd,
    )
