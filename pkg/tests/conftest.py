import numpy as np
import pytest
from hypothesis import settings

from pseudowhisper import synthetic
from pseudowhisper.audio_io import AudioClip

settings.register_profile("default", deadline=None, max_examples=40)
settings.load_profile("default")

FS = 16000


@pytest.fixture(scope="session")
def vowel():
    # impulse-like source at 120 Hz, glottis 0.98 @ 60 Hz + 0.92, formants 700/1220/2600
    return synthetic.synthetic_vowel(120.0, duration_s=1.0)


@pytest.fixture(scope="session")
def noise_clip():
    return synthetic.white_noise(1.0, FS, seed=11)


@pytest.fixture
def silence():
    return AudioClip(np.zeros(FS), FS)
