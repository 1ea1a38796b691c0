"""Hybrid waveform renderer: label inversion, controls, and synthesis.

Decoded labels invert to representative targets plus the intervals they
came from. The renderer mixes four layers (harmonic sine bank, damped
modal resonances, body noise, transient noise), each shaped toward the
Bark-band targets, envelops them with linear-attack/exponential-decay,
applies broad post-mix spectral sculpting from six shaping controls, and
finally normalizes output RMS to the energy target exactly.

All stochastic material is drawn from counter-based generators keyed by
(seed, layer), so a render is a pure function of (targets, controls, seed).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, fields

import numpy as np

from ._tables import BARK_EDGES_HZ
from .audioio import CANONICAL_SR
from .features import FRAME, Waveform, _stft_mag, bark_band_powers
from .textcodec import FEATURE_NAMES, LexicalCode
from .vocab import Interval, Vocabulary

ATTACK_FALLBACK_S = 0.001
DECAY_FALLBACK_S = 0.5
DURATION_MIN_S = 0.05
DURATION_MAX_S = 5.0
MAX_RENDER_PARTIALS = 24

# The attack uses a smoothstep ramp (a hard linear ramp's derivative kink
# splashes measurable broadband energy into quiet Bark bands). The analysis
# envelope (5 ms RMS frames, 3-frame smoothing) smears short rises, so the
# ramp length is chosen from an empirical map of measured 20-90% rise time
# (milliseconds) back to ramp length.
_RISE_TO_RAMP_MS = (
    (2.71, 3.0), (6.73, 4.0), (8.02, 5.0), (8.83, 6.0), (9.90, 8.0),
    (10.70, 10.0), (13.19, 14.0), (16.07, 20.0), (18.27, 30.0),
    (24.80, 45.0), (37.22, 70.0), (52.46, 100.0), (78.18, 150.0),
)


def _ramp_for_attack(attack_s: float) -> float:
    rise_ms = attack_s * 1000.0
    xs = [r for r, _ in _RISE_TO_RAMP_MS]
    ys = [r for _, r in _RISE_TO_RAMP_MS]
    if rise_ms <= xs[0]:
        return ys[0] / 1000.0
    if rise_ms >= xs[-1]:
        return rise_ms / 0.521 / 1000.0
    return float(np.interp(rise_ms, xs, ys)) / 1000.0

_HANN_POWER_GAIN = 0.375 * FRAME  # sum of squared periodic-Hann window


@dataclass(frozen=True)
class Targets:
    """Per-feature representative values and intervals, plus resolved times."""

    representatives: dict[str, float | None]
    intervals: dict[str, Interval]
    attack_s: float
    decay_s: float

    @property
    def pitched(self) -> bool:
        return self.representatives["f0_hz"] is not None

    @property
    def bark(self) -> np.ndarray:
        return np.array(
            [self.representatives[f"bark_band_{b}"] for b in range(1, 25)], dtype=np.float64
        )

    def rep(self, name: str, default: float | None = None) -> float | None:
        value = self.representatives[name]
        return default if value is None else value


@dataclass(frozen=True)
class ControlVector:
    """The 15 renderer steering variables; bounded, see CONTROL_BOUNDS."""

    harmonic_gain: float = 1.0
    modal_gain: float = 1.0
    noise_gain: float = 1.0
    transient_gain: float = 1.0
    transient_decay_scale: float = 1.0
    noise_decay_scale: float = 1.0
    body_decay_scale: float = 1.0
    modal_density: float = 12.0
    roughness_ctl: float = 0.0
    body_pivot: float = 1000.0
    transient_brightness: float = 0.0
    spectral_tilt: float = 0.0
    low_emphasis: float = 0.0
    high_emphasis: float = 0.0
    spectral_spread_shape: float = 0.0

    def as_array(self) -> np.ndarray:
        return np.array([getattr(self, f.name) for f in fields(self)], dtype=np.float64)

    @classmethod
    def from_array(cls, values) -> "ControlVector":
        names = [f.name for f in fields(cls)]
        return cls(**{n: float(v) for n, v in zip(names, values)})


# (lower, upper, log-scaled) per control, in field order.
CONTROL_BOUNDS: dict[str, tuple[float, float, bool]] = {
    "harmonic_gain": (0.0, 4.0, False),
    "modal_gain": (0.0, 4.0, False),
    "noise_gain": (0.0, 4.0, False),
    "transient_gain": (0.0, 4.0, False),
    "transient_decay_scale": (0.25, 4.0, True),
    "noise_decay_scale": (0.25, 4.0, True),
    "body_decay_scale": (0.25, 4.0, True),
    "modal_density": (1.0, 24.0, False),
    "roughness_ctl": (0.0, 1.0, False),
    "body_pivot": (100.0, 12000.0, True),
    "transient_brightness": (-1.0, 1.0, False),
    "spectral_tilt": (-1.0, 1.0, False),
    "low_emphasis": (-1.0, 1.0, False),
    "high_emphasis": (-1.0, 1.0, False),
    "spectral_spread_shape": (-1.0, 1.0, False),
}

CONTROL_NAMES = tuple(CONTROL_BOUNDS)


def clamp_controls(c: ControlVector) -> ControlVector:
    out = {}
    for name, (lo, hi, _) in CONTROL_BOUNDS.items():
        v = getattr(c, name)
        if math.isnan(v):
            raise ValueError(f"control {name} is NaN")
        out[name] = min(max(v, lo), hi)
    return ControlVector(**out)


def controls_to_unit(c: ControlVector) -> np.ndarray:
    """Map controls into the [0,1]^15 search box (log axes where marked)."""
    out = np.empty(len(CONTROL_NAMES))
    for i, name in enumerate(CONTROL_NAMES):
        lo, hi, logscale = CONTROL_BOUNDS[name]
        v = min(max(getattr(c, name), lo), hi)
        if logscale:
            out[i] = math.log(v / lo) / math.log(hi / lo)
        else:
            out[i] = (v - lo) / (hi - lo)
    return out


def controls_from_unit(u) -> ControlVector:
    vals = {}
    for i, name in enumerate(CONTROL_NAMES):
        lo, hi, logscale = CONTROL_BOUNDS[name]
        t = min(max(float(u[i]), 0.0), 1.0)
        vals[name] = lo * (hi / lo) ** t if logscale else lo + t * (hi - lo)
    return ControlVector(**vals)


@dataclass(frozen=True)
class RenderSpec:
    targets: Targets
    controls: ControlVector
    seed: int
    duration_s: float
    target_len: int | None = None


def decode_targets(code: LexicalCode, vocab: Vocabulary) -> Targets:
    """Invert every label to (representative, interval); resolve attack/decay."""
    reps: dict[str, float | None] = {}
    intervals: dict[str, Interval] = {}
    for name, label in zip(FEATURE_NAMES, code.labels):
        entry = vocab.entry_of(name, label)
        reps[name] = entry.representative
        intervals[name] = entry.interval
    lat = reps["log_attack_time"]
    attack = ATTACK_FALLBACK_S if lat is None else 10.0**lat
    decay = reps["decay_time_s"]
    if decay is None:
        decay = DECAY_FALLBACK_S
    return Targets(reps, intervals, attack, decay)


def duration_of(targets: Targets) -> float:
    """attack + 4*decay, clamped to the renderable range."""
    return float(np.clip(targets.attack_s + 4.0 * targets.decay_s, DURATION_MIN_S, DURATION_MAX_S))


def partial_frequency(f0: float, beta: float, k: int) -> float:
    """Stretched-partial law: partial k sits at k*f0*sqrt(1 + beta*k^2)."""
    return k * f0 * math.sqrt(1.0 + beta * k * k)


def _envelope_centroid(r: float) -> float:
    """Normalized centroid of exp(-t/tau) over [0, T] as a function of r = tau/T."""
    if r <= 0:
        return 0.0
    z = 1.0 / r
    if z > 700:
        return r
    ez = math.exp(-z)
    return r * (1.0 - (1.0 + z) * ez) / (1.0 - ez)


def _decay_scale_for_centroid(targets: Targets) -> float:
    """Decay-scale init that lands the envelope centroid on its target while
    keeping the re-extracted decay time inside its own lexical bin."""
    decay_rep = targets.representatives["decay_time_s"]
    tc = targets.rep("temporal_centroid")
    if decay_rep is None or not decay_rep or tc is None:
        return 1.0
    duration = duration_of(targets)
    lo_r, hi_r = 0.02, 3.0
    tc = min(max(tc, _envelope_centroid(lo_r)), _envelope_centroid(hi_r))
    for _ in range(40):
        mid = 0.5 * (lo_r + hi_r)
        if _envelope_centroid(mid) < tc:
            lo_r = mid
        else:
            hi_r = mid
    scale = 0.5 * (lo_r + hi_r) * duration / decay_rep
    iv = targets.intervals["decay_time_s"]
    lo_cap, hi_cap = 0.25, 4.0
    if iv.lower is not None:
        if math.isfinite(iv.upper):
            hi_cap = min(hi_cap, 0.96 * iv.upper / decay_rep)
        if iv.lower > 0:
            lo_cap = max(lo_cap, 1.04 * iv.lower / decay_rep)
    return float(np.clip(scale, lo_cap, max(hi_cap, lo_cap)))


def init_controls(targets: Targets) -> ControlVector:
    """Deterministic monotone mapping from decoded targets to initial controls."""
    flatness = targets.rep("spectral_flatness", 0.0)
    noisy = min(max(flatness / 0.4, 0.0), 1.0)
    hnr = targets.rep("harmonic_noise_ratio_db")
    pitched = targets.pitched

    if pitched:
        tonal = min(max(((hnr if hnr is not None else 0.0) + 10.0) / 25.0, 0.0), 1.0)
        harmonic_gain = 0.05 + 0.95 * tonal
    else:
        harmonic_gain = 0.05

    noise_implied = noisy
    if not pitched:
        noise_implied = 1.0
    elif hnr is not None:
        noise_implied = max(noise_implied, min(max((5.0 - hnr) / 15.0, 0.0), 1.0))
    noise_gain = 0.05 + 0.95 * noise_implied

    tonal_lock = min(max((hnr - 8.0) / 12.0, 0.0), 1.0) if hnr is not None else 0.0
    modal_gain = 0.05 + 0.7 * (1.0 - noisy) * (1.0 - tonal_lock)

    # the transient burst is pre-scaled to the decoded crest factor at gain 1
    transient_gain = 1.0

    bark = targets.bark
    density = int(np.count_nonzero(bark >= 6.5))
    centroid = targets.rep("spectral_centroid_hz", 1000.0)
    roughness = targets.rep("roughness", 0.0)

    return clamp_controls(
        ControlVector(
            harmonic_gain=harmonic_gain,
            modal_gain=modal_gain,
            noise_gain=noise_gain,
            transient_gain=transient_gain,
            transient_decay_scale=1.0,
            noise_decay_scale=1.0,
            body_decay_scale=1.0,
            modal_density=float(max(density, 1)),
            roughness_ctl=min(max(roughness, 0.0), 1.0),
            body_pivot=float(np.clip(centroid, 100.0, 12000.0)),
            transient_brightness=0.0,
            spectral_tilt=0.0,
            low_emphasis=0.0,
            high_emphasis=0.0,
            spectral_spread_shape=0.0,
        )
    )


# -- synthesis ----------------------------------------------------------------


def _layer_rng(seed: int, layer: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=(seed << 8) | layer))


def _sine_bank(components, n: int, sr: int) -> np.ndarray:
    """Sum of sinusoids, synthesized in float32 (several times faster than
    float64 and far below audio precision requirements)."""
    t = np.arange(n, dtype=np.float32) * np.float32(1.0 / sr)
    acc = np.zeros(n, dtype=np.float32)
    two_pi = 2.0 * np.pi
    for f, a, ph in components:
        acc += np.float32(a) * np.sin(np.float32(two_pi * f) * t + np.float32(ph))
    return acc.astype(np.float64)


def _envelope(n: int, sr: int, attack_s: float, tau_s: float | None) -> np.ndarray:
    """Smoothstep attack, then exponential decay; tau None sustains flat."""
    t = np.arange(n, dtype=np.float32) * np.float32(1.0 / sr)
    attack = np.float32(max(attack_s, 1.0 / sr))
    u = np.clip(t / attack, 0.0, 1.0)
    rise = u * u * (np.float32(3.0) - np.float32(2.0) * u)
    if tau_s is None:
        return rise
    tau = np.float32(max(tau_s, 1e-4))
    return np.where(t < attack, rise, np.exp(-(t - attack) / tau))


# Analysis frames smear energy ~40 Hz across band edges; noise synthesis
# leaves a guard gap at interior edges so quiet bands stay quiet next to
# loud ones.
_EDGE_GAP_HZ = 35.0


def _band_gain_curve(freqs: np.ndarray, band_gains: np.ndarray, gap_hz: float = 0.0) -> np.ndarray:
    gains = np.zeros_like(freqs)
    for b, (lo, hi) in enumerate(BARK_EDGES_HZ):
        # never let the guard gap eat a narrow band: a too-narrow noise band
        # turns quasi-periodic and reads as pitched
        gap = min(gap_hz, 0.12 * (hi - lo))
        in_lo = lo + gap if b > 0 else lo
        in_hi = hi - gap if b < 23 else hi
        gains[(freqs >= in_lo) & (freqs < in_hi)] = band_gains[b]
    return gains


def _measured_band_powers(x: np.ndarray) -> np.ndarray:
    # non-overlapping frames: 4x cheaper than the analysis hop and close
    # enough for calibrating synthesis levels
    mags = _stft_mag(x, hop=FRAME)
    return bark_band_powers((mags * mags).mean(axis=0))


def _scale_to_dominant_band(layer: np.ndarray, band_targets: np.ndarray) -> np.ndarray:
    """Scale a layer so its strongest band's power equals that band's target."""
    powers = _measured_band_powers(layer)
    b = int(np.argmax(powers))
    if powers[b] <= 0:
        return layer
    return layer * math.sqrt(max(band_targets[b], 1e-6) / powers[b])


def _partial_energies(ks: np.ndarray, t1: float, t2: float, t3: float, oe_target) -> np.ndarray:
    """Group masses from tristimulus, geometric within group, odd/even adjusted."""
    decay_ratio = 0.75
    groups = ((t1, 1, 1), (t2, 2, 4), (t3, 5, MAX_RENDER_PARTIALS))
    e = np.zeros(ks.size)
    for mass, lo, hi in groups:
        members = np.nonzero((ks >= lo) & (ks <= hi))[0]
        if members.size == 0:
            continue
        w = decay_ratio ** np.arange(members.size, dtype=np.float64)
        e[members] = mass * w / w.sum()
    if oe_target is not None and oe_target > 0:
        for _ in range(3):
            odd = e[ks % 2 == 1].sum()
            even = e[ks % 2 == 0].sum()
            if even <= 1e-12 or odd <= 1e-12:
                break
            e[ks % 2 == 0] *= (odd / even) / oe_target
            for mass, lo, hi in groups:
                members = (ks >= lo) & (ks <= hi)
                group = e[members].sum()
                if group > 1e-12:
                    e[members] *= mass / group
    total = e.sum()
    return e / total if total > 0 else e


def _apply_bark_caps(e: np.ndarray, ks: np.ndarray, freqs: np.ndarray, band_targets: np.ndarray):
    """Cap per-band partial energy at its share relative to the dominant
    band, restoring each tristimulus group's mass into its uncapped
    partials. Near-silent bands are capped well under their nominal share
    because mainlobe pileup makes them read high."""
    e = e.copy()
    bands = np.array([_band_of(f) for f in freqs])
    e[bands < 0] = 0.0
    groups = ((ks == 1), (ks >= 2) & (ks <= 4), (ks >= 5))
    masses = [e[g].sum() for g in groups]
    capped = np.zeros(e.size, dtype=bool)

    def cap_once():
        totals = np.zeros(24)
        for i, b in enumerate(bands):
            if b >= 0:
                totals[b] += e[i]
        bstar = int(np.argmax(totals))
        if totals[bstar] <= 0:
            return
        for b in range(24):
            if b == bstar or totals[b] <= 0:
                continue
            ratio = band_targets[b] / max(band_targets[bstar], 1e-12)
            headroom = 0.25 + 0.75 * min(10.0 * ratio, 1.0)
            allowed = headroom * totals[bstar] * ratio
            if totals[b] > allowed:
                # the fundamental is never capped: losing it flips the octave
                sel = (bands == b) & (ks != 1)
                reducible = e[sel].sum()
                protected = totals[b] - reducible
                want = max(allowed - protected, 0.0)
                if reducible > want:
                    e[sel] *= want / reducible if reducible > 0 else 0.0
                    capped[sel] = True

    for _ in range(2):
        cap_once()
        for mass, g in zip(masses, groups):
            free = g & ~capped
            held = e[g & capped].sum()
            cur = e[free].sum()
            want = max(mass - held, 0.0)
            if cur > 1e-15:
                e[free] *= want / cur
    cap_once()
    total = e.sum()
    return e / total if total > 0 else e


def _calibrated_beta(amps: np.ndarray, ks: np.ndarray, inharm_target: float | None) -> float:
    """Stretch coefficient that makes the measured (amplitude-weighted mean
    relative deviation) inharmonicity land on the decoded target."""
    if not inharm_target or inharm_target <= 0:
        return 0.0
    beta = 2.0 * inharm_target / float(np.sum(amps * ks * ks) / np.sum(amps))
    for _ in range(2):
        dev = np.sqrt(1.0 + beta * ks * ks) - 1.0
        measured = float(np.sum(amps * dev) / np.sum(amps))
        if measured <= 0:
            break
        beta *= inharm_target / measured
    return float(min(beta, 0.05))


def _band_of(freq: float) -> int:
    for b, (lo, hi) in enumerate(BARK_EDGES_HZ):
        if lo <= freq < hi:
            return b
    return -1


def _harmonic_layer(targets: Targets, n: int, sr: int, rng, body_tau, attack: float):
    f0 = targets.rep("f0_hz")
    if f0 is None or f0 <= 0:
        return None
    t1 = targets.rep("tristimulus_1", 0.5)
    t2 = targets.rep("tristimulus_2", 0.35)
    t3 = targets.rep("tristimulus_3", 0.15)
    oe = targets.rep("odd_even_harmonic_ratio")
    kmax = max(int(0.45 * sr / f0), 1)
    ks = np.arange(1, min(kmax, MAX_RENDER_PARTIALS) + 1)
    band_targets = np.expm1(targets.bark)
    energies = _partial_energies(ks, t1, t2, t3, oe)
    energies = _apply_bark_caps(energies, ks, ks * f0, band_targets)
    amps = np.sqrt(energies)
    beta = _calibrated_beta(np.maximum(amps, 1e-6), ks, targets.rep("inharmonicity"))
    # Schroeder phases keep the partial sum's crest factor low
    phases = -np.pi * ks * (ks - 1) / max(ks.size, 1)
    floor = float(amps.max()) * 1e-4  # inaudible partials are not worth a sin()
    components = [
        (partial_frequency(f0, beta, int(k)), a, ph)
        for k, a, ph in zip(ks, amps, phases)
        if a > floor and partial_frequency(f0, beta, int(k)) < 0.45 * sr
    ]
    if not components:
        return None
    layer = _sine_bank(components, n, sr)
    layer *= _envelope(n, sr, attack, body_tau)
    return _scale_to_dominant_band(layer, band_targets)


def _modal_layer(targets, n, sr, rng, body_tau, attack, density, rough):
    bark = targets.bark
    band_targets = np.expm1(bark)
    count = int(np.clip(round(density), 1, 24))
    order = np.argsort(-bark, kind="stable")
    # modes next to a harmonic partial would only beat against it; skip those
    partials: list[float] = []
    f0 = targets.rep("f0_hz")
    if f0:
        partials = [k * f0 for k in range(1, MAX_RENDER_PARTIALS + 1) if k * f0 < 0.45 * sr]
    chosen = []
    for b in order:
        center = math.sqrt(BARK_EDGES_HZ[b][0] * BARK_EDGES_HZ[b][1])
        if any(abs(center - p) < 0.08 * p for p in partials):
            continue
        chosen.append(int(b))
        if len(chosen) >= count:
            break
    # without a pitch, tight modes would read as voiced to the pitch tracker;
    # widen the jitter and always add detuned companions so the layer stays
    # resonant but aperiodic
    pitched = bool(partials)
    jitter_span = 0.02 if pitched else 0.06
    companion = rough if pitched else max(rough, 0.6)
    jitter = rng.uniform(-jitter_span, jitter_span, size=len(chosen))
    phases = rng.uniform(0.0, 2.0 * np.pi, size=2 * max(len(chosen), 1))
    amp_floor = math.sqrt(max(band_targets.max(), 0.0)) * 1e-4
    components = []
    for i, b in enumerate(sorted(chosen)):
        lo, hi = BARK_EDGES_HZ[b]
        f = math.sqrt(lo * hi) * (1.0 + jitter[i])
        if f >= 0.45 * sr:
            continue
        a = math.sqrt(max(band_targets[b], 0.0))
        if a <= amp_floor:
            continue
        components.append((f, a, phases[2 * i]))
        if companion > 1e-3:
            components.append((f * (1.0 + 0.029 * companion), 0.6 * companion * a, phases[2 * i + 1]))
    if not components:
        return None
    layer = _sine_bank(components, n, sr)
    layer *= _envelope(n, sr, attack, body_tau)
    return _scale_to_dominant_band(layer, band_targets)


def _noise_band_gains(band_targets: np.ndarray, env_sq_mean: float) -> np.ndarray:
    gains = np.zeros(24)
    bin_hz = CANONICAL_SR / FRAME
    for b, (lo, hi) in enumerate(BARK_EDGES_HZ):
        nbins = max(int((hi - lo) / bin_hz), 1)
        expected = _HANN_POWER_GAIN * nbins * max(env_sq_mean, 1e-12)
        gains[b] = math.sqrt(max(band_targets[b], 0.0) / expected)
    return gains


def _shaped_noise(rng, n, sr, band_targets, env, crest_ratio=None):
    """White noise equalized so its measured band powers land on the targets.

    Starts from the analytic expectation, then applies two measured
    corrections: frame-window leakage and the envelope make the analytic
    gains land a few dB off, and quiet bands are dominated by spill that
    only a measurement can see. When a crest target is given, the flat
    noise is softly limited so its natural peaks do not overshoot it.
    """
    import scipy.fft as sfft

    raw = rng.standard_normal(n).astype(np.float32)
    spec = sfft.rfft(raw)
    freqs = np.fft.rfftfreq(n, 1.0 / sr)
    gains = _noise_band_gains(band_targets, float(np.mean(env * env)))

    def synthesize():
        curve = _band_gain_curve(freqs, gains, _EDGE_GAP_HZ).astype(np.float32)
        flat = sfft.irfft(spec * curve, n).astype(np.float64)
        if crest_ratio is not None:
            sigma = float(np.sqrt(np.mean(flat * flat)))
            env_rms = float(np.sqrt(np.mean(env * env)))
            env_peak = float(np.max(env))
            if sigma > 0 and env_peak > 0:
                lam = float(np.clip(crest_ratio * env_rms / env_peak, 2.2, 6.0))
                thr = lam * sigma
                flat = thr * np.tanh(flat / thr)
        return flat * env

    shaped = synthesize()
    measured = _measured_band_powers(shaped)
    with np.errstate(divide="ignore", invalid="ignore"):
        factor = np.sqrt(band_targets / measured)
    factor[~np.isfinite(factor)] = 0.0
    gains *= np.clip(factor, 0.0, 100.0)
    return synthesize()


def _tilt_curve(freqs: np.ndarray, amount: float, pivot: float) -> np.ndarray:
    f = np.maximum(freqs, 1.0)
    db = np.clip(12.0 * amount * np.log2(f / pivot), -24.0, 24.0)
    return 10.0 ** (db / 20.0)


def _sculpt(mix: np.ndarray, sr: int, c: ControlVector) -> np.ndarray:
    active = (
        abs(c.spectral_tilt) > 1e-9
        or abs(c.low_emphasis) > 1e-9
        or abs(c.high_emphasis) > 1e-9
        or abs(c.spectral_spread_shape) > 1e-9
    )
    if not active:
        return mix
    n = mix.size
    spec = np.fft.rfft(mix)
    freqs = np.fft.rfftfreq(n, 1.0 / sr)
    f = np.maximum(freqs, 1.0)
    db = np.clip(12.0 * c.spectral_tilt * np.log2(f / c.body_pivot), -24.0, 24.0)
    db += 12.0 * c.low_emphasis / (1.0 + (f / 250.0) ** 2)
    db += 12.0 * c.high_emphasis * (f / 4000.0) ** 2 / (1.0 + (f / 4000.0) ** 2)
    w = np.exp(-0.5 * (np.log2(f / c.body_pivot) / 1.5) ** 2)
    db += 12.0 * c.spectral_spread_shape * (0.5 - w)
    spec *= 10.0 ** (np.clip(db, -42.0, 42.0) / 20.0)
    return np.fft.irfft(spec, n)


def render(spec: RenderSpec) -> Waveform:
    """Deterministic hybrid synthesis; output RMS equals the energy target."""
    sr = CANONICAL_SR
    targets = spec.targets
    c = clamp_controls(spec.controls)
    attack = targets.attack_s
    decay = targets.decay_s
    if spec.target_len is not None:
        if spec.target_len <= 0:
            raise ValueError("target_len must be positive")
        n = int(spec.target_len)
        scale = (n / sr) / (attack + 4.0 * decay)
        attack *= scale
        decay *= scale
    else:
        n = max(int(round(spec.duration_s * sr)), 1)

    ramp = _ramp_for_attack(attack)
    # an undetected-onset code renders a near-instant rise so re-analysis
    # sees the onset inside the first envelope frame again
    if targets.representatives["log_attack_time"] is None:
        ramp = 0.0003
    band_targets = np.expm1(targets.bark)
    # a non-decaying code sustains flat after the attack instead of decaying
    sustain = targets.representatives["decay_time_s"] is None
    body_tau = None if sustain else decay * c.body_decay_scale
    noise_tau = None if sustain else decay * c.noise_decay_scale
    crest_ratio = 10.0 ** (targets.rep("crest_factor_db", 10.0) / 20.0)
    body = np.zeros(n)

    if c.harmonic_gain > 0 and targets.pitched:
        h = _harmonic_layer(targets, n, sr, _layer_rng(spec.seed, 0), body_tau, ramp)
        if h is not None:
            body += c.harmonic_gain * h
    if c.modal_gain > 0:
        m = _modal_layer(
            targets, n, sr, _layer_rng(spec.seed, 1),
            body_tau, ramp, c.modal_density, c.roughness_ctl,
        )
        if m is not None:
            body += c.modal_gain * m
    if c.noise_gain > 0:
        env = _envelope(n, sr, ramp, noise_tau)
        # peak limiting only matters (and only stays clean) when noise carries
        # the mix; on tonal mixes its intermodulation lights quiet bands
        limit = crest_ratio if c.noise_gain > c.harmonic_gain + c.modal_gain else None
        body += c.noise_gain * _shaped_noise(
            _layer_rng(spec.seed, 2), n, sr, band_targets, env, limit
        )

    if c.transient_gain > 0:
        support = float(np.clip(min(attack * 4.0, 0.03) * c.transient_decay_scale, 0.002, n / sr))
        m = min(max(int(round(support * sr)), 8), n)
        rng = _layer_rng(spec.seed, 3)
        burst = rng.standard_normal(m)
        bspec = np.fft.rfft(burst)
        bfreqs = np.fft.rfftfreq(m, 1.0 / sr)
        bspec *= _band_gain_curve(bfreqs, _noise_band_gains(band_targets, 1.0), _EDGE_GAP_HZ)
        bspec *= _tilt_curve(bfreqs, c.transient_brightness, 3000.0)
        burst = np.fft.irfft(bspec, m)
        burst *= np.exp(-(np.arange(m) / sr) / max(support / 3.0, 1e-4))
        # at gain 1 the burst tops the mix up to the decoded crest factor;
        # it sits at the end of the attack ramp so the envelope peak stays put
        burst_peak = float(np.max(np.abs(burst)))
        body_rms = float(np.sqrt(np.mean(body * body)))
        body_peak = float(np.max(np.abs(body)))
        ref = body_rms if body_rms > 0 else targets.rep("rms_energy", 0.1)
        peak_wanted = crest_ratio * ref
        peak_budget = max(peak_wanted - body_peak, 0.05 * peak_wanted)
        if burst_peak > 0:
            lat_rep = targets.representatives["log_attack_time"]
            if lat_rep is None or lat_rep < -2.5:
                # fast onsets: the burst is part of the attack itself
                start = min(int(round(ramp * sr)), n - m)
            else:
                # slower onsets: keep the burst out of the first envelope
                # frame so it cannot masquerade as the attack peak
                start = min(max(int(round(ramp * sr)), int(0.0055 * sr)), n - m)
            start = max(start, 0)
            transient = np.zeros(n)
            transient[start : start + m] = burst * (peak_budget / burst_peak)
            body += c.transient_gain * transient

    mix = _sculpt(body, sr, c)
    current = float(np.sqrt(np.mean(mix * mix)))
    rms_target = targets.rep("rms_energy", 0.0)
    if current <= 0.0 or rms_target <= 0.0:
        return Waveform(np.zeros(n), sr)
    return Waveform(mix * (rms_target / current), sr)
