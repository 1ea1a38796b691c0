"""Raw vocabulary tables: interval bins, Bark levels, pitch word lists, overrides.

This module is pure data. Interval bounds use ``float("inf")`` /
``float("-inf")`` for open ends and ``(None, None)`` for sentinel bins that
stand for a structurally undefined value. All intervals are half-open
``[lower, upper)``.
"""

from __future__ import annotations

INF = float("inf")

# (name, family) in canonical extraction order. Bark bands are appended
# programmatically between the harmonic and psychoacoustic blocks.
SCALAR_FEATURES = [
    ("rms_energy", "temporal"),
    ("crest_factor_db", "temporal"),
    ("zero_crossing_rate", "temporal"),
    ("log_attack_time", "temporal"),
    ("attack_slope_db_s", "temporal"),
    ("temporal_centroid", "temporal"),
    ("decay_time_s", "temporal"),
    ("spectral_centroid_hz", "spectral"),
    ("spectral_flatness", "spectral"),
    ("spectral_rolloff_hz", "spectral"),
    ("spectral_flux", "spectral"),
    ("spectral_kurtosis", "spectral"),
    ("spectral_entropy", "spectral"),
    ("spectral_irregularity", "spectral"),
    ("f0_hz", "harmonic"),
    ("harmonic_noise_ratio_db", "harmonic"),
    ("inharmonicity", "harmonic"),
    ("tristimulus_1", "harmonic"),
    ("tristimulus_2", "harmonic"),
    ("tristimulus_3", "harmonic"),
    ("odd_even_harmonic_ratio", "harmonic"),
    ("sharpness_acum", "psychoacoustic"),
    ("roughness", "psychoacoustic"),
]

# label -> (lower, upper); sentinel bins use (None, None)
SCALAR_BINS = {
    "rms_energy": [
        ("whisper", 0.0, 0.02),
        ("hushed", 0.02, 0.1),
        ("mid-power", 0.1, 0.3),
        ("forceful", 0.3, 0.55),
        ("thunderous", 0.55, INF),
    ],
    "crest_factor_db": [
        ("sustained", 0.0, 5.0),
        ("rounded", 5.0, 10.0),
        ("punchy", 10.0, 14.0),
        ("impulsive", 14.0, 17.0),
        ("spiky", 17.0, INF),
    ],
    "zero_crossing_rate": [
        ("infrasonic", 0.0, 100.0),
        ("low-oscillation", 100.0, 500.0),
        ("mid-oscillation", 500.0, 2000.0),
        ("high-oscillation", 2000.0, 10000.0),
        ("extreme-oscillation", 10000.0, INF),
    ],
    "log_attack_time": [
        ("onset-undetected", None, None),
        ("snap-onset", -INF, -2.8),
        ("swift-onset", -2.8, -2.5),
        ("moderate-onset", -2.5, -2.0),
        ("gradual-onset", -2.0, -1.5),
        ("creeping-onset", -1.5, INF),
    ],
    "attack_slope_db_s": [
        ("slope-undefined", None, None),
        ("feathered", 0.0, 3000.0),
        ("measured", 3000.0, 8000.0),
        ("aggressive", 8000.0, 14000.0),
        ("explosive", 14000.0, INF),
    ],
    "temporal_centroid": [
        ("front-loaded", 0.0, 0.15),
        ("front-weighted", 0.15, 0.25),
        ("centered", 0.25, 0.4),
        ("evenly-distributed", 0.4, 0.55),
        ("back-loaded", 0.55, 1.0),
    ],
    "decay_time_s": [
        ("non-decaying", None, None),
        ("clipped", 0.0, 0.04),
        ("staccato", 0.04, 0.12),
        ("short-decay", 0.12, 0.4),
        ("lingering", 0.4, 2.0),
        ("ringing", 2.0, 10.0),
        ("endless", 10.0, INF),
    ],
    "spectral_centroid_hz": [
        ("subterranean", 0.0, 150.0),
        ("dark", 150.0, 500.0),
        ("warm", 500.0, 2000.0),
        ("bright", 2000.0, 5000.0),
        ("brilliant", 5000.0, 10000.0),
        ("sizzling", 10000.0, INF),
    ],
    "spectral_flatness": [
        ("pure-tone", 0.0, 0.001),
        ("near-tonal", 0.001, 0.01),
        ("semi-tonal", 0.01, 0.1),
        ("noise-heavy", 0.1, 0.4),
        ("white-noise", 0.4, INF),
    ],
    "spectral_rolloff_hz": [
        ("deep-ceiling", 0.0, 200.0),
        ("low-ceiling", 200.0, 1000.0),
        ("mid-ceiling", 1000.0, 5000.0),
        ("high-ceiling", 5000.0, 12000.0),
        ("open-ceiling", 12000.0, INF),
    ],
    "spectral_flux": [
        ("frozen", 0.0, 0.5),
        ("drifting", 0.5, 1.5),
        ("churning", 1.5, 3.0),
        ("surging", 3.0, 6.0),
        ("volatile", 6.0, INF),
    ],
    "spectral_kurtosis": [
        ("flat-topped", 0.0, 3.0),
        ("gentle-peak", 3.0, 30.0),
        ("concentrated", 30.0, 300.0),
        ("towering", 300.0, 3000.0),
        ("needle-point", 3000.0, INF),
    ],
    "spectral_entropy": [
        ("crystalline", 0.0, 0.15),
        ("ordered", 0.15, 0.35),
        ("semi-diffuse", 0.35, 0.6),
        ("diffuse", 0.6, 0.85),
        ("chaotic", 0.85, INF),
    ],
    "spectral_irregularity": [
        ("glass-smooth", 0.0, 0.02),
        ("even-contour", 0.02, 0.1),
        ("rippled", 0.1, 0.3),
        ("serrated", 0.3, 0.55),
        ("comb-like", 0.55, INF),
    ],
    "harmonic_noise_ratio_db": [
        ("unpitched", None, None),
        ("noise-engulfed", -INF, -3.0),
        ("murky", -3.0, 3.0),
        ("hazy", 3.0, 8.0),
        ("limpid", 8.0, 14.0),
        ("pristine", 14.0, INF),
    ],
    "inharmonicity": [
        ("unpitched", None, None),
        ("locked", 0.0, 0.001),
        ("finely-tuned", 0.001, 0.005),
        ("slightly-detuned", 0.005, 0.02),
        ("stretched", 0.02, 0.1),
        ("warped", 0.1, INF),
    ],
    "tristimulus_1": [
        ("unpitched", None, None),
        ("recessed-fundamental", 0.0, 0.3),
        ("balanced-fundamental", 0.3, 0.6),
        ("dominant-fundamental", 0.6, 0.85),
        ("solo-fundamental", 0.85, INF),
    ],
    "tristimulus_2": [
        ("unpitched", None, None),
        ("hollow-body", 0.0, 0.1),
        ("thin-body", 0.1, 0.25),
        ("present-body", 0.25, 0.4),
        ("lush-body", 0.4, INF),
    ],
    "tristimulus_3": [
        ("unpitched", None, None),
        ("bare-upper", 0.0, 0.05),
        ("sparse-overtones", 0.05, 0.15),
        ("moderate-overtones", 0.15, 0.3),
        ("rich-overtones", 0.3, INF),
    ],
    "odd_even_harmonic_ratio": [
        ("unpitched", None, None),
        ("even-biased", 0.0, 0.5),
        ("balanced-parity", 0.5, 1.5),
        ("odd-leaning", 1.5, 5.0),
        ("odd-heavy", 5.0, 50.0),
        ("fundamentals-only", 50.0, INF),
    ],
    "sharpness_acum": [
        ("dull", 0.0, 1.3),
        ("mellow", 1.3, 2.0),
        ("keen", 2.0, 3.0),
        ("cutting", 3.0, 4.5),
        ("piercing", 4.5, INF),
    ],
    "roughness": [
        ("silky", 0.0, 0.01),
        ("sleek", 0.01, 0.15),
        ("textured", 0.15, 0.4),
        ("gritty", 0.4, 0.7),
        ("abrasive", 0.7, INF),
    ],
}

# Shared level scale for all 24 Bark-band features.
BARK_LEVELS = [
    ("silent", 0.0, 0.01),
    ("trace", 0.01, 2.0),
    ("faint", 2.0, 5.0),
    ("present", 5.0, 8.0),
    ("strong", 8.0, 11.0),
    ("dominant", 11.0, 15.0),
    ("overwhelming", 15.0, INF),
]

# Representative for the open-ended "overwhelming" level is pinned rather
# than derived (keeps synthesis targets in a conservative range).
BARK_OVERWHELMING_REPRESENTATIVE = 18.0

BARK_KEYWORDS = [
    "rumble", "thump", "boom", "boxiness", "honk", "quack", "clang", "punch",
    "bite", "twang", "ring", "tang", "edge", "chime", "zing", "crackle",
    "sibilance", "fizz", "sheen", "sparkle", "glint", "air", "vapor", "ether",
]

# Critical-band edges in Hz for bark_band_1 .. bark_band_24.
BARK_EDGES_HZ = [
    (20.0, 100.0), (100.0, 200.0), (200.0, 300.0), (300.0, 400.0),
    (400.0, 510.0), (510.0, 630.0), (630.0, 770.0), (770.0, 920.0),
    (920.0, 1080.0), (1080.0, 1270.0), (1270.0, 1480.0), (1480.0, 1720.0),
    (1720.0, 2000.0), (2000.0, 2320.0), (2320.0, 2700.0), (2700.0, 3150.0),
    (3150.0, 3700.0), (3700.0, 4400.0), (4400.0, 5300.0), (5300.0, 6400.0),
    (6400.0, 7700.0), (7700.0, 9500.0), (9500.0, 12000.0), (12000.0, 15500.0),
]

# Pitch labels are procedural: "{register} {chromatic} {micro}" over
# 36 equal-ratio bins per octave starting at 20 Hz (8 registers).
F0_REGISTERS = ["sub", "cellar", "chest", "middle", "lumen", "aloft", "crystal", "stratos"]
F0_CHROMATIC = ["do", "di", "re", "ri", "mi", "fa", "fi", "sol", "si", "la", "li", "ti"]
F0_MICRO = ["shadow", "heart", "crown"]
F0_BASE_HZ = 20.0
F0_BINS_PER_OCTAVE = 36
F0_FINITE_BINS = 288

# Hand-picked representative overrides (feature, label, value). Three rows
# name features outside the 47-feature inventory; they are kept verbatim and
# marked inert at load time.
REPRESENTATIVE_OVERRIDES = [
    ("rms_energy", "thunderous", 0.75),
    ("crest_factor_db", "spiky", 22.0),
    ("zero_crossing_rate", "extreme-oscillation", 15000.0),
    ("log_attack_time", "snap-onset", -3.2),
    ("log_attack_time", "creeping-onset", -1.0),
    ("attack_slope_db_s", "explosive", 18000.0),
    ("decay_time_s", "endless", 12.0),
    ("spectral_centroid_hz", "sizzling", 14000.0),
    ("spectral_rolloff_hz", "open-ceiling", 16000.0),
    ("spectral_spread_hz", "ultra-wide", 7000.0),
    ("spectral_skewness", "extreme-asymmetry", 75.0),
    ("spectral_kurtosis", "needle-point", 5000.0),
    ("spectral_slope", "ascending", 0.00005),
    ("harmonic_noise_ratio_db", "pristine", 20.0),
    ("harmonic_noise_ratio_db", "noise-engulfed", -5.0),
    ("inharmonicity", "warped", 0.15),
    ("odd_even_harmonic_ratio", "fundamentals-only", 75.0),
    ("sharpness_acum", "piercing", 6.0),
    ("roughness", "abrasive", 0.85),
]

# Expected number of non-pitch bins resolved by the generic representative
# rule alone (soft consistency check reported by validate()).
EXPECTED_GENERIC_RULE_BINS = 245
