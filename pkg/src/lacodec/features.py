"""Waveform analysis into the 47-coordinate descriptor vector.

Everything is classical DSP on a 2048/512 Hann STFT at 44100 Hz: temporal
envelope statistics, frame-averaged spectral shape, YIN-gated harmonic
structure, 24 critical-band energies, and two psychoacoustic summaries.
``extract`` is a pure function of the samples; the decoder re-analyzes its
own renders with the exact same code path.

Undefined coordinates (no detected onset, no pitch, no decay) are ``None``,
never NaN; downstream code treats definedness explicitly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import pitch as _pitch
from ._tables import BARK_EDGES_HZ
from .audioio import CANONICAL_SR, MAX_DURATION_S, resample
from .textcodec import FEATURE_NAMES, HARMONIC_FEATURES

FRAME = 2048
HOP = 512
ENV_FRAME_S = 0.005

FAMILY_OF = dict(
    [(n, "temporal") for n in FEATURE_NAMES[:7]]
    + [(n, "spectral") for n in FEATURE_NAMES[7:14]]
    + [(n, "harmonic") for n in FEATURE_NAMES[14:21]]
    + [(n, "bark") for n in FEATURE_NAMES[21:45]]
    + [(n, "psychoacoustic") for n in FEATURE_NAMES[45:]]
)


@dataclass
class Waveform:
    """Mono audio buffer; samples are float64, nominally within [-1, 1]."""

    samples: np.ndarray
    sample_rate: int = CANONICAL_SR

    def __post_init__(self):
        self.samples = np.asarray(self.samples, dtype=np.float64)
        if self.samples.ndim != 1:
            raise ValueError("waveform must be mono (1-D)")
        if self.samples.size == 0:
            raise ValueError("waveform must be non-empty")
        if self.sample_rate <= 0:
            raise ValueError("sample rate must be positive")

    @property
    def duration(self) -> float:
        return self.samples.size / self.sample_rate


@dataclass
class FeatureVector:
    """All 47 coordinates keyed by feature name, canonical order."""

    values: dict[str, float | None] = field(default_factory=dict)

    def __post_init__(self):
        missing = [n for n in FEATURE_NAMES if n not in self.values]
        if missing:
            raise ValueError(f"missing coordinates: {missing[:3]}...")
        self.values = {
            n: None if self.values[n] is None else float(self.values[n]) for n in FEATURE_NAMES
        }

    def __getitem__(self, name: str) -> float | None:
        return self.values[name]

    def family(self, family: str) -> dict[str, float | None]:
        return {n: v for n, v in self.values.items() if FAMILY_OF[n] == family}


def _canonical(w: Waveform) -> np.ndarray:
    x = w.samples
    if w.sample_rate != CANONICAL_SR:
        x = resample(x, w.sample_rate, CANONICAL_SR)
    if x.size == 0:
        raise ValueError("waveform empty after resampling")
    if x.size / CANONICAL_SR > MAX_DURATION_S + 1e-9:
        raise ValueError(f"duration {x.size / CANONICAL_SR:.2f}s exceeds {MAX_DURATION_S}s")
    return x


# -- temporal envelope -------------------------------------------------------


def _envelope(x: np.ndarray, sr: int) -> tuple[np.ndarray, np.ndarray]:
    """RMS over 5 ms frames, 3-frame moving average; returns (env, center times)."""
    frame = max(1, round(ENV_FRAME_S * sr))
    nf = int(np.ceil(x.size / frame))
    padded = np.zeros(nf * frame)
    padded[: x.size] = x
    env = np.sqrt(np.mean(padded.reshape(nf, frame) ** 2, axis=1))
    kernel = np.ones(3)
    smooth = np.convolve(env, kernel, mode="same") / np.convolve(
        np.ones(nf), kernel, mode="same"
    )
    times = (np.arange(nf) + 0.5) * frame / sr
    return smooth, times


def _threshold_crossing(env, times, upto, level) -> float:
    """Time at which env first reaches `level`, linear interpolation."""
    for i in range(upto + 1):
        if env[i] >= level:
            if i == 0:
                return times[0] * level / env[0] if env[0] > 0 else 0.0
            t0, t1 = times[i - 1], times[i]
            e0, e1 = env[i - 1], env[i]
            if e1 <= e0:
                return t1
            return t0 + (level - e0) / (e1 - e0) * (t1 - t0)
    return times[upto]


def _attack_stats(env, times) -> tuple[float | None, float | None]:
    peak_idx = int(np.argmax(env))
    peak = env[peak_idx]
    # onset faster than the envelope resolution (or no onset at all)
    if peak <= 0 or peak_idx == 0 or env[0] >= 0.93 * peak:
        return None, None
    t10 = _threshold_crossing(env, times, peak_idx, 0.1 * peak)
    t20 = _threshold_crossing(env, times, peak_idx, 0.2 * peak)
    t90 = _threshold_crossing(env, times, peak_idx, 0.9 * peak)
    rise_20_90 = t90 - t20
    rise_10_90 = t90 - t10
    lat = math.log10(rise_20_90) if rise_20_90 > 0 else None
    slope = 20.0 * math.log10(9.0) / rise_10_90 if rise_10_90 > 0 else None
    return lat, slope


# Regression slopes shallower than this (time constants beyond ~50 s) are
# indistinguishable from a sustained envelope and count as non-decaying.
_DECAY_SLOPE_MIN = -0.02


def _decay_time(env, times) -> float | None:
    """Exponential time constant from log-envelope regression after the peak."""
    peak_idx = int(np.argmax(env))
    peak = env[peak_idx]
    if peak <= 0:
        return None
    tail = env[peak_idx:]
    t = times[peak_idx:]
    keep = tail > peak * 1e-5
    if np.count_nonzero(keep) < 4:
        return None
    slope = np.polyfit(t[keep], np.log(tail[keep]), 1)[0]
    if slope >= _DECAY_SLOPE_MIN:
        return None
    return float(-1.0 / slope)


# -- spectral frames ----------------------------------------------------------


_STFT_WINDOW = (0.5 - 0.5 * np.cos(2.0 * np.pi * np.arange(FRAME) / FRAME)).astype(np.float32)


def _stft_mag(x: np.ndarray, hop: int = HOP) -> np.ndarray:
    """Hann magnitude spectrogram, (frames, 1025); float32 throughout."""
    import scipy.fft as sfft

    x = np.asarray(x, dtype=np.float32)
    if x.size < FRAME:
        frames = np.zeros((1, FRAME), dtype=np.float32)
        frames[0, : x.size] = x
    else:
        count = 1 + (x.size - FRAME) // hop
        idx = (np.arange(count) * hop)[:, None] + np.arange(FRAME)[None, :]
        frames = x[idx]
    return np.abs(sfft.rfft(frames * _STFT_WINDOW, axis=1))


def bark_band_powers(mean_power: np.ndarray, sr: int = CANONICAL_SR) -> np.ndarray:
    """Sum of the frame-averaged power spectrum inside each critical band."""
    freqs = np.fft.rfftfreq(FRAME, 1.0 / sr)
    out = np.empty(24)
    for b, (lo, hi) in enumerate(BARK_EDGES_HZ):
        mask = (freqs >= lo) & (freqs < hi)
        out[b] = float(np.sum(mean_power[mask]))
    return out


def _sharpness(band_powers: np.ndarray) -> float:
    loud = band_powers**0.23
    total = float(np.sum(loud))
    if total <= 0:
        return 0.0
    z = np.arange(1, 25, dtype=np.float64)
    g = np.where(z < 15.8, 1.0, 0.85 * np.exp(0.42 * (z - 15.8)) + 0.15)
    return float(0.11 * np.sum(loud * g * z) / total)


def _roughness(mean_mag: np.ndarray, sr: int) -> float:
    """Pairwise Plomp-Levelt interaction over the top spectral peaks."""
    m = mean_mag
    interior = (m[1:-1] > m[:-2]) & (m[1:-1] >= m[2:])
    peaks = np.nonzero(interior)[0] + 1
    if peaks.size == 0:
        return 0.0
    order = np.argsort(m[peaks])[::-1][:40]
    peaks = peaks[order]
    freqs = peaks * sr / FRAME
    amps = m[peaks] / m[peaks].max()
    if peaks.size < 2:
        return 0.0
    fi, fj = np.meshgrid(freqs, freqs, indexing="ij")
    ai, aj = np.meshgrid(amps, amps, indexing="ij")
    iu = np.triu_indices(peaks.size, k=1)
    fmin = np.minimum(fi, fj)[iu]
    fdiff = np.abs(fi - fj)[iu]
    amin = np.minimum(ai, aj)[iu]
    asum = (ai + aj)[iu]
    aprod = (ai * aj)[iu]
    s = 0.24 / (0.0207 * fmin + 18.96)
    z = np.exp(-3.5 * s * fdiff) - np.exp(-5.75 * s * fdiff)
    r = (aprod**0.1) * 0.5 * ((2.0 * amin / asum) ** 3.11) * z
    return float(np.sum(np.maximum(r, 0.0)))


# -- main entry points ---------------------------------------------------------


def extract(w: Waveform) -> FeatureVector:
    """All 47 descriptors of a waveform; deterministic for identical samples."""
    x = _canonical(w)
    sr = CANONICAL_SR
    n = x.size
    duration = n / sr
    values: dict[str, float | None] = {}

    rms = float(np.sqrt(np.mean(x * x)))
    peak = float(np.max(np.abs(x))) if n else 0.0
    silent = rms <= 0.0
    values["rms_energy"] = rms
    values["crest_factor_db"] = 0.0 if silent else 20.0 * math.log10(peak / rms)
    signbits = np.signbit(x)
    values["zero_crossing_rate"] = float(np.count_nonzero(signbits[1:] != signbits[:-1]) / duration)

    env, env_times = _envelope(x, sr)
    lat, slope = _attack_stats(env, env_times)
    values["log_attack_time"] = lat
    values["attack_slope_db_s"] = slope
    env_sum = float(np.sum(env))
    if env_sum > 0:
        values["temporal_centroid"] = float(np.sum(env * env_times) / env_sum / duration)
    else:
        values["temporal_centroid"] = 0.5
    values["decay_time_s"] = _decay_time(env, env_times)

    mags = _stft_mag(x)
    power = mags * mags
    freqs = np.fft.rfftfreq(FRAME, 1.0 / sr)
    frame_sums = mags.sum(axis=1)
    live = frame_sums > 0

    if np.any(live):
        centroids = (mags[live] * freqs).sum(axis=1) / frame_sums[live]
        values["spectral_centroid_hz"] = float(np.mean(centroids))
        pn = power[live] / power[live].max(axis=1, keepdims=True)
        gm = np.exp(np.mean(np.log(np.maximum(pn, 1e-12)), axis=1))
        am = np.mean(pn, axis=1)
        values["spectral_flatness"] = float(np.mean(gm / am))
        csum = np.cumsum(power[live], axis=1)
        thresholds = 0.85 * csum[:, -1:]
        roll_idx = np.argmax(csum >= thresholds, axis=1)
        values["spectral_rolloff_hz"] = float(np.mean(freqs[roll_idx]))
    else:
        values["spectral_centroid_hz"] = 0.0
        values["spectral_flatness"] = 0.0
        values["spectral_rolloff_hz"] = 0.0

    if mags.shape[0] >= 2:
        peaks_per_frame = mags.max(axis=1, keepdims=True)
        unit = np.divide(mags, peaks_per_frame, out=np.zeros_like(mags), where=peaks_per_frame > 0)
        diffs = np.maximum(unit[1:] - unit[:-1], 0.0)
        values["spectral_flux"] = float(np.mean(np.sum(diffs * diffs, axis=1)))
    else:
        values["spectral_flux"] = 0.0

    mean_mag = mags.mean(axis=0)
    mean_power = power.mean(axis=0)
    mag_total = float(mean_mag.sum())
    if mag_total > 0:
        wgt = mean_mag / mag_total
        mu = float(np.sum(wgt * freqs))
        var = float(np.sum(wgt * (freqs - mu) ** 2))
        values["spectral_kurtosis"] = (
            float(np.sum(wgt * (freqs - mu) ** 4) / var**2) if var > 0 else 0.0
        )
        p = mean_power / mean_power.sum() if mean_power.sum() > 0 else None
        if p is not None:
            nz = p[p > 0]
            values["spectral_entropy"] = float(-np.sum(nz * np.log(nz)) / math.log(p.size))
        else:
            values["spectral_entropy"] = 0.0
        sq_total = float(np.sum(mean_mag**2))
        values["spectral_irregularity"] = float(np.sum(np.diff(mean_mag) ** 2) / sq_total)
    else:
        values["spectral_kurtosis"] = 0.0
        values["spectral_entropy"] = 0.0
        values["spectral_irregularity"] = 0.0

    track = _pitch.yin_track(x, sr) if not silent else _pitch.PitchTrack(False, None, None, 0.0)
    if track.pitched:
        values["f0_hz"] = track.f0_hz
        values["harmonic_noise_ratio_db"] = track.hnr_db
        partials = _pitch.track_partials(x, sr, track.f0_hz)
        values.update(_pitch.harmonic_descriptors(partials, track.f0_hz))
    else:
        for name in HARMONIC_FEATURES:
            values[name] = None

    band_powers = bark_band_powers(mean_power, sr)
    for b in range(24):
        values[f"bark_band_{b + 1}"] = float(np.log1p(band_powers[b]))
    values["sharpness_acum"] = _sharpness(band_powers)
    values["roughness"] = _roughness(mean_mag, sr)

    return FeatureVector(values)


def extract_family(w: Waveform, family: str) -> dict[str, float | None]:
    """One family's coordinates; the union over families equals extract()."""
    if family not in ("temporal", "spectral", "harmonic", "bark", "psychoacoustic"):
        raise ValueError(f"unknown family {family!r}")
    return extract(w).family(family)
