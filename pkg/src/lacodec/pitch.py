"""Fundamental-frequency tracking (YIN), harmonicity and partial analysis.

YIN runs on 2048-sample frames with a 512 hop over a 20-5120 Hz search
range; a frame is voiced when the cumulative-mean-normalized difference
dips below the aperiodicity threshold. A sound counts as pitched when at
least a quarter of its frames are voiced; all harmonic descriptors are
gated together on that decision.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.fft as sfft

FRAME = 2048
HOP = 512
F_MIN = 20.0
F_MAX = 5120.0
APERIODICITY_THRESHOLD = 0.2
VOICED_FRACTION = 0.25
MAX_PARTIALS = 24
PARTIAL_WINDOW = 0.03  # relative half-width of the search window around k*f0


@dataclass
class PitchTrack:
    pitched: bool
    f0_hz: float | None
    hnr_db: float | None
    voiced_fraction: float


def _frame_starts(n: int) -> np.ndarray:
    if n <= FRAME:
        return np.array([0])
    return np.arange(0, n - FRAME + 1, HOP)


def yin_track(x: np.ndarray, sr: int) -> PitchTrack:
    """Per-frame YIN with parabolic refinement; median f0 over voiced frames."""
    x = np.asarray(x, dtype=np.float32)
    n = x.size
    tau_min = max(2, int(np.ceil(sr / F_MAX)))
    tau_max = int(np.floor(sr / F_MIN))
    starts = _frame_starts(n)
    span = FRAME + tau_max
    padded = np.zeros(int(starts[-1]) + span, dtype=np.float32)
    padded[:n] = x

    idx = starts[:, None] + np.arange(span)[None, :]
    frames = padded[idx]  # (nf, FRAME + tau_max)
    w = frames[:, :FRAME]

    nfft = sfft.next_fast_len(span, real=True)
    spec_e = sfft.rfft(frames, nfft, axis=1)
    spec_w = sfft.rfft(w, nfft, axis=1)
    # r(tau) = sum_j w[j] * e[j + tau]
    corr = sfft.irfft(np.conj(spec_w) * spec_e, nfft, axis=1)[:, : tau_max + 1]

    sq = np.cumsum(frames * frames, axis=1)  # float32: plenty for the CMNDF
    sq = np.concatenate([np.zeros((len(starts), 1), dtype=np.float32), sq], axis=1)
    taus = np.arange(tau_max + 1)
    p_tau = sq[:, taus + FRAME] - sq[:, taus]  # energy of the shifted window
    p0 = p_tau[:, :1]

    d = p0 + p_tau - 2.0 * corr
    d = np.maximum(d, 0.0)
    cum = np.cumsum(d[:, 1:], axis=1)
    with np.errstate(divide="ignore", invalid="ignore"):
        cmndf = d[:, 1:] * taus[1:] / cum
    cmndf = np.where(cum > 0, cmndf, 1.0)
    cmndf = np.concatenate([np.ones((len(starts), 1)), cmndf], axis=1)

    f0s: list[float] = []
    hnrs: list[float] = []
    voiced = 0
    for fi in range(len(starts)):
        row = cmndf[fi]
        tau = _pick_period(row, tau_min, tau_max)
        if tau is None:
            continue
        voiced += 1
        tau_hat = _parabolic(row, tau)
        f0s.append(sr / tau_hat)
        denom = np.sqrt(max(p0[fi, 0] * p_tau[fi, tau], 1e-30))
        rho = float(np.clip(corr[fi, tau] / denom, 1e-6, 1.0 - 1e-6))
        hnrs.append(10.0 * np.log10(rho / (1.0 - rho)))
    fraction = voiced / len(starts)
    if voiced == 0 or fraction < VOICED_FRACTION:
        return PitchTrack(False, None, None, fraction)
    return PitchTrack(True, float(np.median(f0s)), float(np.mean(hnrs)), fraction)


def _pick_period(cmndf: np.ndarray, tau_min: int, tau_max: int) -> int | None:
    below = np.nonzero(cmndf[tau_min : tau_max + 1] < APERIODICITY_THRESHOLD)[0]
    if below.size == 0:
        return None
    tau = tau_min + int(below[0])
    while tau + 1 <= tau_max and cmndf[tau + 1] < cmndf[tau]:
        tau += 1
    return tau


def _parabolic(row: np.ndarray, tau: int) -> float:
    if tau <= 0 or tau + 1 >= row.size:
        return float(tau)
    a, b, c = row[tau - 1], row[tau], row[tau + 1]
    denom = a - 2.0 * b + c
    if denom <= 0:
        return float(tau)
    delta = 0.5 * (a - c) / denom
    return tau + float(np.clip(delta, -1.0, 1.0))


@dataclass
class Partial:
    k: int
    frequency: float
    amplitude: float


from functools import lru_cache


@lru_cache(maxsize=8)
def _hann(n: int) -> np.ndarray:
    return np.hanning(n).astype(np.float32)


def track_partials(x: np.ndarray, sr: int, f0: float, kmax: int = MAX_PARTIALS) -> list[Partial]:
    """Quadratic-interpolated spectral peaks within +-3% of each k*f0."""
    x = np.asarray(x, dtype=np.float32)
    n = x.size
    # pad to 2n for interpolation accuracy on short inputs, but never truncate
    target = 2 * n if 2 * n <= (1 << 17) else n
    nfft = sfft.next_fast_len(max(target, 8192), real=True)
    mag = np.abs(sfft.rfft(x * _hann(n), nfft))
    res = sr / nfft
    floor = mag.max() * 1e-5
    out: list[Partial] = []
    for k in range(1, kmax + 1):
        target = k * f0
        if target >= 0.45 * sr:
            break
        lo = int(np.floor(target * (1.0 - PARTIAL_WINDOW) / res))
        hi = int(np.ceil(target * (1.0 + PARTIAL_WINDOW) / res)) + 1
        lo = max(lo, 1)
        hi = min(hi, mag.size - 1)
        if hi <= lo:
            continue
        window = mag[lo:hi]
        j = lo + int(np.argmax(window))
        if k > 1 and (mag[j] < floor or mag[j] < mag[j - 1] or mag[j] < mag[j + 1]):
            continue
        freq, amp = _interp_peak(mag, j, res)
        out.append(Partial(k, freq, amp))
    return out


def _interp_peak(mag: np.ndarray, j: int, res: float) -> tuple[float, float]:
    if j <= 0 or j + 1 >= mag.size:
        return j * res, float(mag[j])
    eps = 1e-30
    la, lb, lc = np.log(mag[j - 1] + eps), np.log(mag[j] + eps), np.log(mag[j + 1] + eps)
    denom = la - 2.0 * lb + lc
    if denom >= 0:
        return j * res, float(mag[j])
    delta = 0.5 * (la - lc) / denom
    delta = float(np.clip(delta, -0.5, 0.5))
    amp = float(np.exp(lb - 0.25 * (la - lc) * delta))
    return (j + delta) * res, amp


def harmonic_descriptors(partials: list[Partial], f0: float) -> dict[str, float]:
    """Inharmonicity, tristimulus split, odd/even energy ratio from partials."""
    if not partials:
        return {
            "inharmonicity": 0.0,
            "tristimulus_1": 1.0,
            "tristimulus_2": 0.0,
            "tristimulus_3": 0.0,
            "odd_even_harmonic_ratio": 1e6,
        }
    amps = np.array([p.amplitude for p in partials])
    freqs = np.array([p.frequency for p in partials])
    ks = np.array([p.k for p in partials])
    dev = np.abs(freqs - ks * f0) / (ks * f0)
    inharm = float(np.sum(amps * dev) / np.sum(amps))
    energy = amps * amps
    total = float(np.sum(energy))
    t1 = float(np.sum(energy[ks == 1]) / total)
    t2 = float(np.sum(energy[(ks >= 2) & (ks <= 4)]) / total)
    t3 = float(np.sum(energy[ks >= 5]) / total)
    odd = float(np.sum(energy[ks % 2 == 1]))
    even = float(np.sum(energy[ks % 2 == 0]))
    ratio = odd / even if even > odd * 1e-6 else 1e6
    return {
        "inharmonicity": inharm,
        "tristimulus_1": t1,
        "tristimulus_2": t2,
        "tristimulus_3": t3,
        "odd_even_harmonic_ratio": min(ratio, 1e6),
    }
