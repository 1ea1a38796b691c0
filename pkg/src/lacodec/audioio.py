"""WAV reading/writing and canonicalization to the reference format.

Analysis runs at a fixed 44100 Hz mono; other rates are resampled with a
polyphase windowed-sinc filter and stereo is mixed down by channel
averaging before any feature is computed.
"""

from __future__ import annotations

from fractions import Fraction

import numpy as np
from scipy.io import wavfile
from scipy.signal import resample_poly

CANONICAL_SR = 44100
MAX_DURATION_S = 5.0


class AudioFormatError(ValueError):
    pass


def to_mono(samples: np.ndarray) -> np.ndarray:
    if samples.ndim == 1:
        return samples
    if samples.ndim == 2:
        return samples.mean(axis=1)
    raise AudioFormatError(f"unsupported channel layout with shape {samples.shape}")


def _to_float(samples: np.ndarray) -> np.ndarray:
    if samples.dtype == np.int16:
        return samples.astype(np.float64) / 32768.0
    if samples.dtype == np.int32:
        return samples.astype(np.float64) / 2147483648.0
    if samples.dtype == np.uint8:
        return (samples.astype(np.float64) - 128.0) / 128.0
    if samples.dtype.kind == "f":
        return samples.astype(np.float64)
    raise AudioFormatError(f"unsupported WAV sample format {samples.dtype}")


def resample(samples: np.ndarray, sr_in: int, sr_out: int) -> np.ndarray:
    if sr_in == sr_out:
        return np.asarray(samples, dtype=np.float64)
    ratio = Fraction(sr_out, sr_in)
    return resample_poly(np.asarray(samples, dtype=np.float64), ratio.numerator, ratio.denominator)


def canonicalize(samples: np.ndarray, sr: int) -> tuple[np.ndarray, int, bool]:
    """Mono float64 at the canonical rate; returns (samples, sr, was_stereo)."""
    arr = np.asarray(samples)
    was_stereo = arr.ndim == 2 and arr.shape[1] > 1
    mono = to_mono(_to_float(arr))
    if mono.size == 0:
        raise AudioFormatError("empty audio")
    out = resample(mono, sr, CANONICAL_SR)
    max_len = int(MAX_DURATION_S * CANONICAL_SR)
    if out.size > max_len:
        raise AudioFormatError(
            f"duration {out.size / CANONICAL_SR:.2f}s exceeds the {MAX_DURATION_S}s limit"
        )
    return out, CANONICAL_SR, was_stereo


def read_wav(path) -> tuple[np.ndarray, int, bool]:
    """Read a RIFF WAV (PCM16/32, uint8, float32/64) and canonicalize it."""
    sr, samples = wavfile.read(path)
    return canonicalize(samples, sr)


def write_wav(path, samples: np.ndarray, sr: int = CANONICAL_SR, fmt: str = "float32") -> None:
    """Write mono WAV; PCM16 uses plain scaling with clipping, no dither."""
    x = np.asarray(samples, dtype=np.float64)
    if not np.all(np.isfinite(x)):
        raise AudioFormatError("non-finite samples")
    if fmt == "float32":
        wavfile.write(path, sr, x.astype(np.float32))
    elif fmt == "pcm16":
        scaled = np.clip(np.round(x * 32767.0), -32768, 32767).astype(np.int16)
        wavfile.write(path, sr, scaled)
    else:
        raise AudioFormatError(f"unknown output format {fmt!r}")
