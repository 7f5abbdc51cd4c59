"""End-to-end conversions: pseudo-whisper (PW), glottal-cancellation only
(NG), formant widening only (WB), and a plain vocoder round trip."""
from __future__ import annotations

from dataclasses import dataclass, field

from .audio_io import AudioClip, to_target_rate
from .glottal import GlottalConfig, cancel_glottis
from .transform import MafConfig, maf_features, unit_aperiodicity, zero_f0
from .vocoder import VocoderConfig, VocoderFeatures, analyze, synthesize

MODES = ("pw", "ng", "wb", "roundtrip")


@dataclass(frozen=True)
class PipelineConfig:
    glottal: GlottalConfig = field(default_factory=GlottalConfig)
    maf: MafConfig = field(default_factory=MafConfig)
    vocoder: VocoderConfig = field(default_factory=VocoderConfig)
    seed: int = 0
    mode: str = "pw"
    # NG drops pitch by default; False keeps the original F0/Ap instead
    ng_zero_f0: bool = True

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}, got {self.mode!r}")
        if not 0 <= self.seed < 2 ** 64:
            raise ValueError("seed must be an unsigned 64-bit integer")


def _prepare(clip: AudioClip, cfg: PipelineConfig) -> AudioClip:
    return to_target_rate(clip, cfg.vocoder.sample_rate_hz)


def conversion_features(clip: AudioClip, cfg: PipelineConfig,
                        mode: str | None = None) -> VocoderFeatures:
    """Features handed to the synthesizer for ``mode`` (input at the working rate)."""
    mode = mode or cfg.mode
    if mode not in MODES:
        raise ValueError(f"unknown mode {mode!r}")
    if mode in ("pw", "ng"):
        feats = analyze(cancel_glottis(clip, cfg.glottal), cfg.vocoder)
        if mode == "pw" or cfg.ng_zero_f0:
            feats = unit_aperiodicity(zero_f0(feats))
        if mode == "pw":
            feats = maf_features(feats, cfg.maf)
        return feats
    feats = analyze(clip, cfg.vocoder)
    if mode == "wb":
        feats = maf_features(feats, cfg.maf)
    return feats


def convert(clip: AudioClip, cfg: PipelineConfig = PipelineConfig(),
            mode: str | None = None, seed: int | None = None) -> AudioClip:
    """Run one conversion; output is at the working rate with the input's duration."""
    clip = _prepare(clip, cfg)
    feats = conversion_features(clip, cfg, mode)
    return synthesize(feats, cfg.vocoder, cfg.seed if seed is None else seed,
                      length=clip.samples.size)


def convert_pw(clip: AudioClip, cfg: PipelineConfig = PipelineConfig()) -> AudioClip:
    return convert(clip, cfg, "pw")


def convert_ng(clip: AudioClip, cfg: PipelineConfig = PipelineConfig()) -> AudioClip:
    return convert(clip, cfg, "ng")


def convert_wb(clip: AudioClip, cfg: PipelineConfig = PipelineConfig()) -> AudioClip:
    return convert(clip, cfg, "wb")


def roundtrip(clip: AudioClip, cfg: PipelineConfig = PipelineConfig()) -> AudioClip:
    return convert(clip, cfg, "roundtrip")
