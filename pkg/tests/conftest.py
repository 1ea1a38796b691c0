import numpy as np
import pytest

from lacodec.vocab import build_default_vocabulary


@pytest.fixture(scope="session")
def vocab():
    return build_default_vocabulary()


@pytest.fixture(scope="session")
def sr():
    return 44100


@pytest.fixture(scope="session")
def pluck(sr):
    t = np.arange(int(0.6 * sr)) / sr
    x = (
        0.5 * np.sin(2 * np.pi * 330 * t)
        + 0.25 * np.sin(2 * np.pi * 660 * t)
        + 0.12 * np.sin(2 * np.pi * 990 * t)
    )
    return x * np.exp(-t * 5) * np.minimum(t / 0.008, 1.0)


@pytest.fixture(scope="session")
def noise_burst(sr):
    from scipy.signal import butter, sosfilt

    rng = np.random.default_rng(3)
    t = np.arange(int(0.3 * sr)) / sr
    sos = butter(2, [800, 3000], "bandpass", fs=sr, output="sos")
    x = sosfilt(sos, rng.standard_normal(t.size) * np.exp(-t * 12))
    x = x * np.minimum(t / 0.002, 1.0)
    return x / np.max(np.abs(x)) * 0.6
