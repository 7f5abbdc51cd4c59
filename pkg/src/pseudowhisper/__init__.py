"""Pseudo-whisper conversion: glottal cancellation plus formant widening on
a pulse/noise vocoder, with NG, WB and round-trip variants."""
from .audio_io import AudioClip, read_wav, resample, write_wav
from .glottal import GlottalConfig, cancel_glottis, gfm_iaif
from .metrics import MetricReport, measure
from .pipeline import (MODES, PipelineConfig, convert, convert_ng, convert_pw,
                       convert_wb, roundtrip)
from .transform import MafConfig, speed_perturb
from .vocoder import VocoderConfig, VocoderFeatures, analyze, synthesize

__all__ = [
    "AudioClip", "read_wav", "write_wav", "resample",
    "GlottalConfig", "gfm_iaif", "cancel_glottis",
    "VocoderConfig", "VocoderFeatures", "analyze", "synthesize",
    "MafConfig", "speed_perturb",
    "PipelineConfig", "MODES", "convert", "convert_pw", "convert_ng",
    "convert_wb", "roundtrip",
    "MetricReport", "measure",
]
