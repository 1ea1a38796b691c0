"""Corpus metrics: bin accuracy, family ablation, budget sweeps, rate report.

Includes a deterministic synthetic corpus generator (sines, harmonic
plucks, filtered noise bursts, hybrids) so every experiment runs without
external data. Family selection never changes what is decoded; it only
restricts which of the 47 slots are compared.
"""

from __future__ import annotations

import math
import time
from collections import Counter
from dataclasses import dataclass, field

import numpy as np

from .audioio import CANONICAL_SR
from .features import FAMILY_OF, Waveform, extract
from .refine import RefineConfig, decode_code
from .textcodec import FEATURE_NAMES, LexicalCode, code_from_features, parse, verbalize
from .vocab import Vocabulary

FAMILY_ORDER = ("temporal", "spectral", "harmonic", "bark", "psychoacoustic")


# -- synthetic corpus ----------------------------------------------------------


def _sine(rng, sr, n):
    f0 = math.exp(rng.uniform(math.log(55.0), math.log(3520.0)))
    t = np.arange(n) / sr
    x = np.sin(2.0 * np.pi * f0 * t + rng.uniform(0, 2 * np.pi))
    attack = rng.uniform(0.002, 0.05)
    x *= np.minimum(t / attack, 1.0)
    if rng.random() < 0.5:
        x *= np.exp(-t / rng.uniform(0.08, 0.5))
    return x


def _harmonic_pluck(rng, sr, n):
    f0 = math.exp(rng.uniform(math.log(55.0), math.log(1760.0)))
    t = np.arange(n) / sr
    x = np.zeros(n)
    partials = rng.integers(3, 14)
    rolloff = rng.uniform(0.6, 2.0)
    odd_bias = rng.uniform(0.3, 1.0)
    beta = float(rng.choice([0.0, 1e-4, 1e-3, 5e-3]))
    for k in range(1, partials + 1):
        fk = k * f0 * math.sqrt(1 + beta * k * k)
        if fk > 0.45 * sr:
            break
        a = k ** (-rolloff) * (1.0 if k % 2 == 1 else odd_bias)
        x += a * np.sin(2.0 * np.pi * fk * t + rng.uniform(0, 2 * np.pi))
    x *= np.exp(-t / rng.uniform(0.04, 0.45))
    x *= np.minimum(t / rng.uniform(0.001, 0.02), 1.0)
    return x


def _noise_burst(rng, sr, n):
    from scipy.signal import butter, sosfilt

    t = np.arange(n) / sr
    x = rng.standard_normal(n)
    center = math.exp(rng.uniform(math.log(120.0), math.log(8000.0)))
    width = rng.uniform(0.3, 1.5)
    lo = max(center * (1 - width / 2), 25.0)
    hi = min(center * (1 + width / 2), 0.45 * sr)
    if hi <= lo * 1.1:
        hi = lo * 1.5
    sos = butter(2, [lo, hi], "bandpass", fs=sr, output="sos")
    x = sosfilt(sos, x)
    x *= np.exp(-t / rng.uniform(0.02, 0.4))
    x *= np.minimum(t / rng.uniform(0.0005, 0.01), 1.0)
    return x


def _hybrid(rng, sr, n):
    tone = _harmonic_pluck(rng, sr, n)
    noise = _noise_burst(rng, sr, n)
    w = rng.uniform(0.2, 0.8)
    return w * tone / max(np.max(np.abs(tone)), 1e-9) + (1 - w) * noise / max(
        np.max(np.abs(noise)), 1e-9
    )


_GENERATORS = (_sine, _harmonic_pluck, _noise_burst, _hybrid)


def synthetic_corpus(count: int, seed: int = 0, sr: int = CANONICAL_SR) -> list[Waveform]:
    """Deterministic bank of short test sounds covering the code space."""
    rng = np.random.default_rng(seed)
    out = []
    for i in range(count):
        # log-uniform: short percussive material dominates, as in tracker samples
        dur = float(math.exp(rng.uniform(math.log(0.05), math.log(2.0))))
        n = max(int(dur * sr), 256)
        x = _GENERATORS[i % len(_GENERATORS)](rng, sr, n)
        peak = float(np.max(np.abs(x)))
        if peak > 0:
            x = x / peak
        x = x * float(rng.uniform(0.05, 0.9))
        rms = float(np.sqrt(np.mean(x * x)))
        if rms > 0:
            target = float(rng.uniform(0.015, 0.45))
            x = x * min(target / rms, 0.99 / max(np.max(np.abs(x)), 1e-9))
        out.append(Waveform(x, sr))
    return out


# -- metrics -------------------------------------------------------------------


def bin_accuracy(code_a: LexicalCode, code_b: LexicalCode, features=FEATURE_NAMES) -> float:
    """Fraction of the selected slots with identical labels."""
    names = list(features)
    hits = sum(code_a[n] == code_b[n] for n in names)
    return hits / len(names)


def family_slots(families) -> tuple[str, ...]:
    chosen = set(families)
    return tuple(n for n in FEATURE_NAMES if FAMILY_OF[n] in chosen)


def cumulative_prefixes() -> list[tuple[str, ...]]:
    return [FAMILY_ORDER[: i + 1] for i in range(len(FAMILY_ORDER))]


@dataclass
class CorpusResult:
    families: tuple[str, ...]
    per_sound: list[float]
    extra: dict = field(default_factory=dict)

    @property
    def mean(self) -> float:
        return float(np.mean(self.per_sound)) if self.per_sound else math.nan

    @property
    def ci95(self) -> float:
        n = len(self.per_sound)
        if n < 2:
            return 0.0
        return 1.96 * float(np.std(self.per_sound, ddof=1)) / math.sqrt(n)

    @property
    def median(self) -> float:
        return float(np.median(self.per_sound)) if self.per_sound else math.nan


def encode_corpus(corpus: list[Waveform], vocab: Vocabulary) -> list[LexicalCode]:
    return [code_from_features(extract(w).values, vocab) for w in corpus]


def pre_synthesis_accuracy(
    corpus: list[Waveform], vocab: Vocabulary, families=FAMILY_ORDER
) -> CorpusResult:
    """Accuracy of the lexical chain alone: encode, verbalize, parse, invert
    labels to representatives, re-quantize, compare selected slots."""
    slots = family_slots(families)
    scores = []
    for w in corpus:
        code = code_from_features(extract(w).values, vocab)
        recovered = parse(verbalize(code), vocab)
        requantized = LexicalCode(
            tuple(
                vocab.quantize(name, vocab.representative_of(name, label))
                for name, label in zip(FEATURE_NAMES, recovered.labels)
            )
        )
        scores.append(bin_accuracy(code, requantized, slots))
    return CorpusResult(tuple(families), scores)


def _decode_one(code: LexicalCode, vocab: Vocabulary, config: RefineConfig):
    wav, report, candidates = decode_code(code, vocab, config)
    recovered = code_from_features(extract(wav).values, vocab)
    return recovered, report, candidates


def post_synthesis_accuracy(
    corpus: list[Waveform],
    vocab: Vocabulary,
    families=FAMILY_ORDER,
    budget: int = 64,
    reg_weight: float = 0.05,
    jobs: int = 1,
) -> CorpusResult:
    """Full decode per sound, re-extract, compare selected slots."""
    slots = family_slots(families)
    codes = encode_corpus(corpus, vocab)
    recovered = decode_codes(codes, vocab, RefineConfig(budget=budget, reg_weight=reg_weight), jobs)
    scores = [bin_accuracy(c, r, slots) for c, (r, _, _) in zip(codes, recovered)]
    return CorpusResult(tuple(families), scores, extra={"budget": budget})


_WORKER_VOCAB: Vocabulary | None = None


def _init_worker(vocab: Vocabulary):
    global _WORKER_VOCAB
    _WORKER_VOCAB = vocab


def _decode_worker(code: LexicalCode, config: RefineConfig):
    return _decode_one(code, _WORKER_VOCAB, config)


def decode_codes(codes, vocab, config: RefineConfig, jobs: int = 1):
    """Decode many codes, optionally across processes, preserving order."""
    if jobs <= 1:
        return [_decode_one(code, vocab, config) for code in codes]
    import multiprocessing as mp

    with mp.Pool(jobs, initializer=_init_worker, initargs=(vocab,)) as pool:
        return pool.starmap(_decode_worker, [(code, config) for code in codes])


@dataclass
class AblationRow:
    families: tuple[str, ...]
    pre_mean: float
    pre_ci95: float
    post_mean: float
    post_ci95: float
    post_delta: float | None


def ablation_table(
    corpus: list[Waveform], vocab: Vocabulary, budget: int = 64, reg_weight: float = 0.05,
    jobs: int = 1,
) -> list[AblationRow]:
    """Cumulative family curve; one decode per sound reused for every prefix."""
    codes = encode_corpus(corpus, vocab)
    decoded = decode_codes(codes, vocab, RefineConfig(budget=budget, reg_weight=reg_weight), jobs)
    pre = {tuple(f): pre_synthesis_accuracy(corpus, vocab, f) for f in cumulative_prefixes()}
    rows = []
    prev_post = None
    for fams in cumulative_prefixes():
        slots = family_slots(fams)
        scores = [bin_accuracy(c, r, slots) for c, (r, _, _) in zip(codes, decoded)]
        res = CorpusResult(tuple(fams), scores)
        delta = None if prev_post is None else res.mean - prev_post
        rows.append(
            AblationRow(
                tuple(fams), pre[tuple(fams)].mean, pre[tuple(fams)].ci95, res.mean, res.ci95, delta
            )
        )
        prev_post = res.mean
    return rows


@dataclass
class SweepRow:
    budget: int
    accuracy_mean: float
    accuracy_median: float
    ci95: float
    sounds_per_minute: float
    selection_ok: bool


def budget_sweep(
    corpus: list[Waveform], vocab: Vocabulary, budgets=(1, 16, 32, 64, 128, 256),
    reg_weight: float = 0.05, jobs: int = 1,
) -> list[SweepRow]:
    """Post-synthesis accuracy and throughput against the evaluation budget."""
    codes = encode_corpus(corpus, vocab)
    rows = []
    for budget in budgets:
        started = time.perf_counter()
        decoded = decode_codes(codes, vocab, RefineConfig(budget=budget, reg_weight=reg_weight), jobs)
        elapsed = time.perf_counter() - started
        scores = [bin_accuracy(c, r) for c, (r, _, _) in zip(codes, decoded)]
        selection_ok = all(_selection_minimal(cands) for _, _, cands in decoded)
        res = CorpusResult(FAMILY_ORDER, scores)
        rows.append(
            SweepRow(
                budget,
                res.mean,
                res.median,
                res.ci95,
                60.0 * len(corpus) / max(elapsed, 1e-9),
                selection_ok,
            )
        )
    return rows


def _selection_minimal(candidates) -> bool:
    from .refine import select_best

    best = select_best(candidates)
    return all((best.violations, best.score) <= (c.violations, c.score) for c in candidates)


@dataclass
class RateReport:
    max_bits: float
    marginal_entropy_bits: float
    support_bits: float
    sound_count: int
    per_feature: dict[str, float]

    @property
    def consistent(self) -> bool:
        return (
            self.marginal_entropy_bits <= self.max_bits + 1e-9
            and self.support_bits <= self.max_bits + 1e-9
            and self.support_bits <= math.log2(max(self.sound_count, 1)) + 1e-9
        )

    def lines(self) -> list[str]:
        return [
            f"sounds: {self.sound_count}",
            f"B_max (bits): {self.max_bits:.3f}",
            f"sum of marginal entropies (bits): {self.marginal_entropy_bits:.3f}",
            f"log2 |support| (bits): {self.support_bits:.3f}",
            f"bounds hold: {self.consistent}",
        ]


def rate_report(codes: list[LexicalCode], vocab: Vocabulary) -> RateReport:
    """Plug-in entropy bookkeeping for a batch of observed codes."""
    if not codes:
        raise ValueError("rate report needs at least one code")
    n = len(codes)
    per_feature: dict[str, float] = {}
    for i, name in enumerate(FEATURE_NAMES):
        counts = Counter(code.labels[i] for code in codes)
        h = -sum((c / n) * math.log2(c / n) for c in counts.values())
        per_feature[name] = h
    support = len({code.labels for code in codes})
    return RateReport(
        max_bits=vocab.max_bits(),
        marginal_entropy_bits=sum(per_feature.values()),
        support_bits=math.log2(support),
        sound_count=n,
        per_feature=per_feature,
    )
