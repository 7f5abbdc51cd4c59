"""Feature-domain edits: formant smoothing (MAF), F0 zeroing, unit
aperiodicity, and speed perturbation."""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy.ndimage import convolve1d

from .audio_io import AudioClip, resample_ratio
from .errors import InvalidFactor, WindowTooNarrow
from .vocoder import VocoderFeatures

MIN_FACTOR, MAX_FACTOR = 0.5, 2.0

@dataclass(frozen=True)
class MafConfig:
    window_width_hz: float = 400.0
    shape: str = "triangular"

    def __post_init__(self):
        if self.window_width_hz <= 0:
            raise ValueError("window_width_hz must be positive")
        if self.shape != "triangular":
            raise ValueError(f"unsupported kernel shape {self.shape!r}")

    def half_width_bins(self, bin_width_hz: float) -> int:
        """Half-width W such that the 2W+1 bin span is the odd count nearest the width."""
        if self.window_width_hz < 2 * bin_width_hz:
            raise WindowTooNarrow(
                f"{self.window_width_hz} Hz is under two bins of {bin_width_hz} Hz")
        return max(1, int(np.floor((self.window_width_hz / bin_width_hz - 1) / 2 + 0.5)))


def triangular_kernel(half_width: int) -> np.ndarray:
    j = np.arange(-half_width, half_width + 1)
    k = (half_width + 1 - np.abs(j)).astype(np.float64)
    return k / k.sum()


def smooth_envelope_maf(sp: np.ndarray, bin_width_hz: float,
                        cfg: MafConfig = MafConfig()) -> np.ndarray:
    """Triangular moving average of each power-envelope frame along frequency.

    Near the band edges the kernel is truncated to the available bins and
    renormalized, so no energy is invented outside the spectrum.
    """
    sp = np.asarray(sp, dtype=np.float64)
    kernel = triangular_kernel(cfg.half_width_bins(bin_width_hz))
    num = convolve1d(sp, kernel, axis=-1, mode="constant", cval=0.0)
    den = convolve1d(np.ones(sp.shape[-1]), kernel, mode="constant", cval=0.0)
    return num / den


def maf_features(features: VocoderFeatures, cfg: MafConfig = MafConfig()) -> VocoderFeatures:
    return features.replace(sp=smooth_envelope_maf(features.sp, features.bin_width_hz, cfg))


def zero_f0(features: VocoderFeatures) -> VocoderFeatures:
    return features.replace(f0=np.zeros_like(features.f0))


def unit_aperiodicity(features: VocoderFeatures) -> VocoderFeatures:
    return features.replace(ap=np.ones_like(features.ap))


def speed_perturb(clip: AudioClip, factor: float) -> AudioClip:
    """Play ``clip`` ``factor`` times faster: duration scales by 1/factor,
    pitch and formants by factor. The sample rate label is unchanged."""
    if not MIN_FACTOR <= factor <= MAX_FACTOR:
        raise InvalidFactor(f"speed factor {factor} outside [{MIN_FACTOR}, {MAX_FACTOR}]")
    if factor == 1.0:
        return AudioClip(clip.samples.copy(), clip.sample_rate_hz)
    ratio = Fraction(1.0 / factor).limit_denominator(10000)
    return AudioClip(resample_ratio(clip.samples, ratio), clip.sample_rate_hz)
