"""Glottal inverse filtering (GFM-IAIF) and glottal cancellation."""
from __future__ import annotations

import logging
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.signal import firwin

from . import dsp_core as dsp
from .audio_io import AudioClip
from .errors import EmptyClip, FrameTooShort, SingularAutocorrelation

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class GlottalConfig:
    vocal_tract_order: int = 18
    glottal_order: int = 3
    highpass_cutoff_hz: float = 70.0
    lip_leak: float = 0.99
    preframe_ms: float = 10.0
    highpass_taps: int = 1025

    def __post_init__(self):
        if self.vocal_tract_order < 8:
            raise ValueError("vocal_tract_order must be >= 8")
        if self.glottal_order != 3:
            raise ValueError("the glottal flow model is fixed at order 3")
        if not 0.0 < self.lip_leak < 1.0:
            raise ValueError("lip_leak must be in (0, 1)")

    def preframe_samples(self, sample_rate_hz: int) -> int:
        return int(round(self.preframe_ms * sample_rate_hz / 1000.0))


@dataclass(frozen=True)
class GlottalDecomposition:
    glottal_model: dsp.LpcModel
    vocal_tract_model: dsp.LpcModel
    lip_leak: float
    glottal_flow: np.ndarray


IDENTITY_GLOTTIS = dsp.LpcModel(np.array([1.0, 0.0, 0.0, 0.0]))


@lru_cache(maxsize=8)
def _highpass_kernel(taps: int, cutoff_hz: float, fs: int) -> np.ndarray:
    return firwin(taps, cutoff_hz, pass_zero=False, fs=fs)


def highpass(x, cfg: GlottalConfig, sample_rate_hz: int) -> np.ndarray:
    """Zero-delay linear-phase FIR high-pass (odd length, centered)."""
    h = _highpass_kernel(cfg.highpass_taps, cfg.highpass_cutoff_hz, sample_rate_hz)
    x = np.asarray(x, dtype=np.float64)
    full = np.convolve(x, h)
    delay = (h.size - 1) // 2
    return full[delay: delay + x.size]


def gfm_iaif(frame, cfg: GlottalConfig = GlottalConfig(),
             sample_rate_hz: int = 16000) -> GlottalDecomposition:
    """Decompose one frame into glottal (order 3) and vocal-tract LP models.

    The first ``cfg.preframe_samples(sample_rate_hz)`` samples of ``frame``
    are preceding context, used only to warm up the inverse filters; the LP
    fits see the remainder under a Hann window. Input should already be
    high-passed (see :func:`highpass`).
    """
    x = np.asarray(frame, dtype=np.float64)
    pre = cfg.preframe_samples(sample_rate_hz)
    n = x.size - pre
    nv = cfg.vocal_tract_order
    if n < 4 * nv:
        raise FrameTooShort(f"{n} analysis samples, need at least {4 * nv}")
    win = dsp.hann(n)

    def fit(sig, order):
        return dsp.lpc(sig[pre:] * win, order)

    # all filters are LTI, so cancel lip radiation once up front
    gv = dsp.leaky_integrate(x, cfg.lip_leak)

    # gross glottis: cascade of first-order fits
    gross = np.array([1.0])
    for _ in range(cfg.glottal_order):
        stage = fit(dsp.fir_filter(gv, gross), 1)
        gross = np.convolve(gross, stage.coefficients)

    vt_gross = fit(dsp.fir_filter(gv, gross), nv)
    g1 = dsp.fir_filter(gv, vt_gross.coefficients)
    glottis = fit(g1, cfg.glottal_order)
    vocal_tract = fit(dsp.fir_filter(gv, glottis.coefficients), nv)
    flow = dsp.fir_filter(gv, vocal_tract.coefficients)[pre:]
    return GlottalDecomposition(glottis, vocal_tract, cfg.lip_leak, flow)


def _context_frames(x: np.ndarray, grid: dsp.FrameGrid, pre: int) -> np.ndarray:
    """Unwindowed grid frames, each extended by ``pre`` samples of history."""
    n_len = grid.frame_length_samples
    lead = grid.pad + pre
    tail = grid.num_frames * grid.hop_samples + n_len
    mode = "reflect" if x.size > max(lead, tail) else "constant"
    padded = np.pad(x, (lead, tail), mode=mode)
    idx = (np.arange(grid.num_frames)[:, None] * grid.hop_samples
           + np.arange(pre + n_len)[None, :])
    return padded[idx]


def cancel_glottis_frames(clip: AudioClip, cfg: GlottalConfig = GlottalConfig(),
                          grid: dsp.FrameGrid | None = None):
    """Per-frame glottal cancellation before windowing and overlap-add.

    Returns ``(frames, glottal_models, input_frames)``: the inverse-filtered
    frames rescaled to the input frame RMS, the glottal model used for each
    frame, and the matching high-passed input frames.
    """
    if clip.samples.size == 0:
        raise EmptyClip("cannot cancel the glottis of an empty clip")
    fs = clip.sample_rate_hz
    if grid is None:
        grid = dsp.FrameGrid.for_length(clip.samples.size, sample_rate_hz=fs)
    pre = cfg.preframe_samples(fs)
    x = highpass(clip.samples, cfg, fs)
    segments = _context_frames(x, grid, pre)
    out = np.zeros((grid.num_frames, grid.frame_length_samples))
    models = []
    previous = IDENTITY_GLOTTIS
    for k, seg in enumerate(segments):
        try:
            model = gfm_iaif(seg, cfg, fs).glottal_model
        except SingularAutocorrelation:
            # degenerate (e.g. silent) frame: reuse the last good glottis
            model = previous
        previous = model
        models.append(model)
        filtered = dsp.fir_filter(seg, model.coefficients)[pre:]
        ref_rms = np.sqrt(np.mean(seg[pre:] ** 2))
        out_rms = np.sqrt(np.mean(filtered ** 2))
        if out_rms > 0:
            filtered *= ref_rms / out_rms
        out[k] = filtered
    return out, models, segments[:, pre:]


def cancel_glottis(clip: AudioClip, cfg: GlottalConfig = GlottalConfig(),
                   grid: dsp.FrameGrid | None = None) -> AudioClip:
    """Remove the glottal contribution by frame-wise inverse filtering.

    Output has the input's length and sample rate.
    """
    if grid is None:
        grid = dsp.FrameGrid.for_length(clip.samples.size, sample_rate_hz=clip.sample_rate_hz)
    frames, _, _ = cancel_glottis_frames(clip, cfg, grid)
    y = dsp.overlap_add(frames * grid.window, grid, length=clip.samples.size)
    return AudioClip(y, clip.sample_rate_hz)
