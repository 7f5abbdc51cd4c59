import numpy as np
import pytest
from scipy.signal import find_peaks, freqz

from pseudowhisper import dsp_core as dsp
from pseudowhisper import glottal, metrics
from pseudowhisper.audio_io import AudioClip
from pseudowhisper.errors import EmptyClip, FrameTooShort

FS = 16000
CFG = glottal.GlottalConfig()
PRE = CFG.preframe_samples(FS)
DENSE = np.linspace(0, FS / 2, 4097)


def peak_freqs(a):
    _, h = freqz([1.0], a, worN=DENSE, fs=FS)
    return DENSE[find_peaks(np.abs(h))[0]]


def frames_of(clip, starts):
    x = glottal.highpass(clip.samples, CFG, FS)
    return [x[s - PRE: s + 512] for s in starts]


@pytest.fixture(scope="module")
def decompositions(vowel):
    return [glottal.gfm_iaif(seg, CFG, FS) for seg in frames_of(vowel.clip, range(2000, 14000, 1500))]


def test_config_defaults():
    assert CFG.vocal_tract_order == 18 and CFG.glottal_order == 3
    assert CFG.highpass_cutoff_hz == 70 and CFG.lip_leak == 0.99
    assert PRE == 160
    with pytest.raises(ValueError):
        glottal.GlottalConfig(glottal_order=4)
    with pytest.raises(ValueError):
        glottal.GlottalConfig(vocal_tract_order=6)
    with pytest.raises(ValueError):
        glottal.GlottalConfig(lip_leak=1.0)


def test_highpass_removes_dc_and_keeps_voice_band():
    n = np.arange(FS)
    x = 1.0 + np.sin(2 * np.pi * 500 * n / FS)
    y = glottal.highpass(x, CFG, FS)
    mid = y[2000:-2000]
    assert abs(mid.mean()) < 1e-3
    # zero-delay linear phase: the 500 Hz component comes through in place
    assert np.max(np.abs(mid - np.sin(2 * np.pi * 500 * n[2000:-2000] / FS))) < 1e-2


def test_vocal_tract_peaks_near_true_formants(vowel, decompositions):
    true = peak_freqs(vowel.vocal_tract)
    assert true.size == 3
    for d in decompositions:
        est = peak_freqs(d.vocal_tract_model.coefficients)
        for f in true:
            assert np.min(np.abs(est - f)) / f <= 0.05


def test_glottal_model_order_and_tilt(decompositions):
    for d in decompositions:
        assert d.glottal_model.order == 3
        _, h = freqz([1.0], d.glottal_model.coefficients, worN=[100.0, 2000.0], fs=FS)
        assert abs(h[1]) < abs(h[0])


def test_models_are_stable_and_structured(decompositions):
    for d in decompositions:
        assert d.glottal_model.is_stable() and d.vocal_tract_model.is_stable()
        poles = d.glottal_model.poles()
        assert np.sum(np.abs(poles.imag) > 1e-12) in (0, 2)


def test_decomposition_consistency_is_flat(vowel, decompositions):
    # E = S * A_g * A_v / (1 - d e^{-jw}): the integrator undoes lip radiation
    segs = frames_of(vowel.clip, range(2000, 14000, 1500))
    harm = np.arange(1, 60) * vowel.f0_hz
    harm = harm[(harm >= 300) & (harm <= 5000)]
    w = 2 * np.pi * harm / FS
    for seg, d in zip(segs, decompositions):
        frame = seg[PRE:] * dsp.hann(512)
        spec = np.abs(np.exp(-1j * np.outer(w, np.arange(512))) @ frame)
        _, ag = freqz(d.glottal_model.coefficients, [1.0], worN=w)
        _, av = freqz(d.vocal_tract_model.coefficients, [1.0], worN=w)
        _, lip = freqz([1.0, -CFG.lip_leak], [1.0], worN=w)
        e_db = 20 * np.log10(spec * np.abs(ag) * np.abs(av) / np.abs(lip))
        assert np.all(np.abs(e_db - e_db.mean()) <= 6.0)


def test_glottal_flow_shape(decompositions):
    for d in decompositions:
        assert d.glottal_flow.shape == (512,)
        assert np.all(np.isfinite(d.glottal_flow))


def test_frame_too_short():
    with pytest.raises(FrameTooShort):
        glottal.gfm_iaif(np.random.default_rng(0).standard_normal(PRE + 71), CFG, FS)


def _noise_glottis(seed):
    x = np.random.default_rng(seed).standard_normal(PRE + 512)
    return glottal.gfm_iaif(glottal.highpass(x, CFG, FS), CFG, FS).glottal_model


@pytest.mark.xfail(strict=True, reason="the leaky integrator leaves one real pole near 0.93 on noise")
def test_white_noise_glottis_all_poles_small():
    for seed in range(5):
        assert np.all(np.abs(_noise_glottis(seed).poles()) < 0.7)


def test_white_noise_glottis_has_no_resonance():
    for seed in range(5):
        mags = np.sort(np.abs(_noise_glottis(seed).poles()))
        # the two poles not explained by the integrator stay small
        assert np.all(mags[:2] < 0.7)


def test_cancel_glottis_flattens_tilt(vowel):
    out = glottal.cancel_glottis(vowel.clip, CFG)
    assert out.samples.size == vowel.clip.samples.size
    gain = metrics.band_energy_ratio(out) - metrics.band_energy_ratio(vowel.clip)
    assert gain >= 6.0


def test_cancel_glottis_of_silence_is_silence():
    out = glottal.cancel_glottis(AudioClip(np.zeros(4000), FS), CFG)
    assert np.all(out.samples == 0.0)


def test_cancel_glottis_empty():
    with pytest.raises(EmptyClip):
        glottal.cancel_glottis(AudioClip(np.zeros(0), FS), CFG)


def test_cancelled_frames_keep_input_rms(vowel):
    frames, models, inputs = glottal.cancel_glottis_frames(vowel.clip, CFG)
    rms_out = np.sqrt(np.mean(frames ** 2, axis=1))
    rms_in = np.sqrt(np.mean(inputs ** 2, axis=1))
    voiced = rms_in > 1e-3 * rms_in.max()
    assert np.allclose(rms_out[voiced], rms_in[voiced], rtol=1e-3)
    assert all(m.order == 3 for m in models)


def test_fallback_reuses_previous_model():
    x = np.zeros(6000)
    x[3000:] = np.random.default_rng(0).standard_normal(3000)
    _, models, _ = glottal.cancel_glottis_frames(AudioClip(x, FS), CFG)
    # leading silent frames get the identity glottis
    assert np.array_equal(models[0].coefficients, [1.0, 0.0, 0.0, 0.0])
    assert all(m.order == 3 for m in models)


@pytest.mark.xfail(strict=True, reason="second pass fits F1 with the order-3 model and keeps tilting")
def test_cancel_glottis_idempotent_in_tilt(vowel):
    once = glottal.cancel_glottis(vowel.clip, CFG)
    twice = glottal.cancel_glottis(once, CFG)
    assert abs(metrics.band_energy_ratio(twice) - metrics.band_energy_ratio(once)) < 2.0
