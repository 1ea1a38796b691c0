"""Shared lexical vocabulary: feature registry, label alphabets, quantizers.

The vocabulary maps each of 47 acoustic features to a finite alphabet of
labels. Each label owns a half-open interval ``[lower, upper)`` of feature
values plus a single representative value used at synthesis time. Sentinel
labels (e.g. ``unpitched``) stand for a structurally undefined value and
invert to ``None`` rather than a number.

The authoritative form of the vocabulary is a plain-text file shipped with
the package (``data/vocabulary.txt``); :func:`build_default_vocabulary`
loads and validates it. :func:`default_vocabulary_text` regenerates that
file from the tables in :mod:`lacodec._tables` so the two can be diffed.
"""

from __future__ import annotations

import math
from bisect import bisect_right
from dataclasses import dataclass, field
from importlib import resources

from . import _tables

FAMILIES = ("temporal", "spectral", "harmonic", "bark", "psychoacoustic")

FAMILY_COUNTS = {
    "temporal": 7,
    "spectral": 7,
    "harmonic": 7,
    "bark": 24,
    "psychoacoustic": 2,
}


class VocabularyError(ValueError):
    """Malformed vocabulary data or misuse of the vocabulary API."""


class UnknownLabelError(VocabularyError):
    """A label does not belong to the feature's alphabet."""


class QuantizationError(VocabularyError):
    """A value cannot be assigned to any bin of the feature's alphabet."""


def normalize_label(text: str) -> str:
    """Canonical matching form: lowercase, hyphens as spaces, single spaces."""
    return " ".join(text.lower().replace("-", " ").split())


def label_words(text: str) -> tuple[str, ...]:
    return tuple(normalize_label(text).split())


@dataclass(frozen=True)
class FeatureId:
    name: str
    family: str
    index: int


@dataclass(frozen=True)
class Interval:
    """Half-open interval [lower, upper); (None, None) marks a sentinel bin."""

    lower: float | None
    upper: float | None

    @property
    def kind(self) -> str:
        if self.lower is None:
            return "sentinel-undefined"
        if self.lower == -math.inf:
            return "open-lower"
        if self.upper == math.inf:
            return "open-upper"
        return "finite"

    def contains(self, value: float) -> bool:
        if self.lower is None:
            return False
        return self.lower <= value < self.upper

    @property
    def width(self) -> float:
        if self.lower is None:
            return math.nan
        return self.upper - self.lower


@dataclass(frozen=True)
class LabelEntry:
    label: str
    interval: Interval
    representative: float | None
    override_applied: bool = False


@dataclass(frozen=True)
class OverrideRule:
    feature: str
    label: str
    value: float
    inert: bool = False


def generic_representative(lower: float | None, upper: float | None) -> float | None:
    """Deterministic anchor for a bin: midpoint when finite, heuristic when open."""
    if lower is None and upper is None:
        return None
    if lower is None or upper is None:
        raise VocabularyError("half-sentinel interval")
    if math.isfinite(lower) and math.isfinite(upper):
        return (lower + upper) / 2.0
    if upper == math.inf:
        if lower > 0:
            return 1.5 * lower
        if lower == 0:
            return 1.0
        return 1.5 * abs(lower) + 1.0
    if lower == -math.inf:
        if upper > 0:
            return 0.5 * upper
        return upper - abs(upper) / 2.0 - 1.0
    raise VocabularyError(f"unhandled interval [{lower}, {upper})")


def f0_bin(register: int, chromatic: int, micro: int) -> tuple[str, Interval]:
    """Label and interval for one pitch bin; 36 equal-ratio bins per octave."""
    if not (0 <= register < 8 and 0 <= chromatic < 12 and 0 <= micro < 3):
        raise IndexError(f"f0 bin indices out of range: ({register}, {chromatic}, {micro})")
    k = 36 * register + 3 * chromatic + micro
    base = _tables.F0_BASE_HZ
    per_octave = _tables.F0_BINS_PER_OCTAVE
    lower = 0.0 if k == 0 else base * 2.0 ** (k / per_octave)
    upper = base * 2.0 ** ((k + 1) / per_octave)
    label = f"{_tables.F0_REGISTERS[register]} {_tables.F0_CHROMATIC[chromatic]} {_tables.F0_MICRO[micro]}"
    return label, Interval(lower, upper)


def _f0_representative(interval: Interval) -> float:
    # Log-spaced bins use the geometric mean; the bin touching zero falls
    # back to the generic (midpoint) rule.
    if interval.lower > 0:
        return math.sqrt(interval.lower * interval.upper)
    return generic_representative(interval.lower, interval.upper)


@dataclass
class ValidationReport:
    coverage_gaps: list[str] = field(default_factory=list)
    overlaps: list[str] = field(default_factory=list)
    duplicate_labels: list[str] = field(default_factory=list)
    representative_violations: list[str] = field(default_factory=list)
    non_f0_bins: int = 0
    generic_rule_bins: int = 0
    expected_generic_rule_bins: int = _tables.EXPECTED_GENERIC_RULE_BINS

    @property
    def generic_rule_discrepancy(self) -> bool:
        return self.generic_rule_bins != self.expected_generic_rule_bins

    @property
    def ok(self) -> bool:
        return not (
            self.coverage_gaps
            or self.overlaps
            or self.duplicate_labels
            or self.representative_violations
        )

    def lines(self) -> list[str]:
        out = [
            f"features: 47, non-f0 bins: {self.non_f0_bins}",
            f"generic-rule bins (non-f0): {self.generic_rule_bins} "
            f"(expected {self.expected_generic_rule_bins}"
            + (", DISCREPANCY)" if self.generic_rule_discrepancy else ")"),
            f"coverage gaps: {len(self.coverage_gaps)}",
            f"overlaps: {len(self.overlaps)}",
            f"duplicate labels: {len(self.duplicate_labels)}",
            f"representative violations: {len(self.representative_violations)}",
        ]
        for group in (
            self.coverage_gaps,
            self.overlaps,
            self.duplicate_labels,
            self.representative_violations,
        ):
            out.extend("  " + item for item in group)
        return out


class Vocabulary:
    """Immutable registry of features, alphabets, intervals and representatives.

    Instances are safe for concurrent read access; construct once and share.
    """

    def __init__(
        self,
        features: tuple[FeatureId, ...],
        entries: dict[str, tuple[LabelEntry, ...]],
        bark_levels: tuple[LabelEntry, ...],
        bark_keywords: tuple[str, ...],
        f0_registers: tuple[str, ...],
        f0_chromatic: tuple[str, ...],
        f0_micro: tuple[str, ...],
        overrides: tuple[OverrideRule, ...],
    ):
        self.features = features
        self.entries = entries
        self.bark_levels = bark_levels
        self.bark_keywords = bark_keywords
        self.f0_registers = f0_registers
        self.f0_chromatic = f0_chromatic
        self.f0_micro = f0_micro
        self.overrides = overrides
        self.feature_names = tuple(f.name for f in features)
        self._by_name = {f.name: f for f in features}
        self._check_shape()
        self._build_indexes()

    # -- construction helpers -------------------------------------------------

    def _check_shape(self):
        if len(self.features) != 47:
            raise VocabularyError(f"expected 47 features, got {len(self.features)}")
        if len(set(self.feature_names)) != 47:
            raise VocabularyError("duplicate feature names")
        counts: dict[str, int] = {}
        for i, f in enumerate(self.features):
            if f.index != i:
                raise VocabularyError(f"feature {f.name} has index {f.index}, expected {i}")
            if f.family not in FAMILIES:
                raise VocabularyError(f"unknown family {f.family!r}")
            counts[f.family] = counts.get(f.family, 0) + 1
        if counts != FAMILY_COUNTS:
            raise VocabularyError(f"family counts {counts} != {FAMILY_COUNTS}")
        for name in self.feature_names:
            if name not in self.entries:
                raise VocabularyError(f"feature {name} has no alphabet")

    def _build_indexes(self):
        # per-feature: sorted real bins for bisect quantization + label lookup
        self._sorted_bins: dict[str, tuple[list[float], list[LabelEntry]]] = {}
        self._sentinels: dict[str, LabelEntry] = {}
        self._label_map: dict[str, dict[str, LabelEntry]] = {}
        for name, entries in self.entries.items():
            real = sorted(
                (e for e in entries if e.interval.lower is not None),
                key=lambda e: e.interval.lower,
            )
            lowers = [e.interval.lower for e in real]
            sentinels = [e for e in entries if e.interval.lower is None]
            if len(sentinels) > 1:
                raise VocabularyError(f"{name}: multiple sentinel bins")
            if sentinels:
                self._sentinels[name] = sentinels[0]
            self._sorted_bins[name] = (lowers, real)
            self._label_map[name] = {normalize_label(e.label): e for e in entries}

    # -- lookups ---------------------------------------------------------------

    def feature(self, name: str) -> FeatureId:
        try:
            return self._by_name[name]
        except KeyError:
            raise UnknownLabelError(f"unknown feature {name!r}") from None

    def family_features(self, family: str) -> tuple[FeatureId, ...]:
        return tuple(f for f in self.features if f.family == family)

    def label_entries(self, feature: str) -> tuple[LabelEntry, ...]:
        self.feature(feature)
        return self.entries[feature]

    def sentinel_label(self, feature: str) -> str | None:
        entry = self._sentinels.get(feature)
        return entry.label if entry else None

    def entry_of(self, feature: str, label: str) -> LabelEntry:
        self.feature(feature)
        entry = self._label_map[feature].get(normalize_label(label))
        if entry is None:
            raise UnknownLabelError(f"{feature}: unknown label {label!r}")
        return entry

    # -- core operations ---------------------------------------------------

    def quantize(self, feature: str, value: float | None) -> str:
        """Map a feature value (or None) to its lexical label."""
        self.feature(feature)
        if value is None:
            sentinel = self._sentinels.get(feature)
            if sentinel is None:
                raise QuantizationError(f"{feature}: undefined value but no sentinel bin")
            return sentinel.label
        value = float(value)
        if math.isnan(value):
            raise QuantizationError(f"{feature}: NaN is not a quantizable value; pass None")
        lowers, real = self._sorted_bins[feature]
        i = bisect_right(lowers, value) - 1
        if i >= 0 and real[i].interval.contains(value):
            return real[i].label
        raise QuantizationError(f"{feature}: value {value!r} falls in no bin")

    def interval_of(self, feature: str, label: str) -> Interval:
        return self.entry_of(feature, label).interval

    def representative_of(self, feature: str, label: str) -> float | None:
        return self.entry_of(feature, label).representative

    def max_bits(self) -> float:
        """Worst-case bits to index one lexical state: sum of log2 alphabet sizes."""
        return sum(math.log2(len(self.entries[name])) for name in self.feature_names)

    def validate(self) -> ValidationReport:
        """Consistency report: coverage, duplicates, representative placement."""
        report = ValidationReport()
        for name in self.feature_names:
            _, real = self._sorted_bins[name]
            for a, b in zip(real, real[1:]):
                if a.interval.upper < b.interval.lower:
                    report.coverage_gaps.append(
                        f"{name}: gap [{a.interval.upper}, {b.interval.lower})"
                    )
                elif a.interval.upper > b.interval.lower:
                    report.overlaps.append(
                        f"{name}: {a.label} overlaps {b.label}"
                    )
            for e in real:
                rep = e.representative
                if rep is None or not e.interval.contains(rep):
                    report.representative_violations.append(
                        f"{name}: representative {rep!r} outside bin {e.label}"
                    )
            if name != "f0_hz":
                entries = self.entries[name]
                report.non_f0_bins += len(entries)
                report.generic_rule_bins += sum(1 for e in entries if not e.override_applied)
        seen: dict[str, str] = {}
        for name in self.feature_names:
            for e in self.entries[name]:
                key = normalize_label(e.label)
                if key == "unpitched":
                    continue
                if key in seen and seen[key] != name:
                    report.duplicate_labels.append(
                        f"label {e.label!r} in both {seen[key]} and {name}"
                    )
                seen[key] = name
        return report

    # -- serialization -------------------------------------------------------

    def save_text(self) -> str:
        lines = ["# lexical acoustic vocabulary v1"]
        lines.append("[features]")
        for f in self.features:
            lines.append(f"{f.name}\t{f.family}")
        lines.append("[entries]")
        for name in self.feature_names:
            for e in self.entries[name]:
                lines.append(
                    "\t".join(
                        (
                            name,
                            e.label,
                            _fmt(e.interval.lower),
                            _fmt(e.interval.upper),
                            _fmt(e.representative),
                            "1" if e.override_applied else "0",
                        )
                    )
                )
        lines.append("[overrides]")
        for rule in self.overrides:
            lines.append(
                "\t".join(
                    (rule.feature, rule.label, _fmt(rule.value), "inert" if rule.inert else "active")
                )
            )
        return "\n".join(lines) + "\n"

    def save(self, path) -> None:
        with open(path, "w", encoding="ascii", newline="\n") as fh:
            fh.write(self.save_text())

    @classmethod
    def from_text(cls, text: str) -> "Vocabulary":
        section = None
        features: list[FeatureId] = []
        entries: dict[str, list[LabelEntry]] = {}
        overrides: list[OverrideRule] = []
        for raw in text.splitlines():
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if line.startswith("["):
                section = line
                continue
            cols = line.split("\t")
            if section == "[features]":
                features.append(FeatureId(cols[0], cols[1], len(features)))
            elif section == "[entries]":
                name, label, lo, hi, rep, ovr = cols
                interval = Interval(_parse_bound(lo), _parse_bound(hi))
                entries.setdefault(name, []).append(
                    LabelEntry(label, interval, _parse_bound(rep), ovr == "1")
                )
            elif section == "[overrides]":
                overrides.append(
                    OverrideRule(cols[0], cols[1], float(cols[2]), cols[3] == "inert")
                )
            else:
                raise VocabularyError(f"line outside any section: {line!r}")
        return cls(
            features=tuple(features),
            entries={k: tuple(v) for k, v in entries.items()},
            bark_levels=_bark_level_entries(),
            bark_keywords=tuple(_tables.BARK_KEYWORDS),
            f0_registers=tuple(_tables.F0_REGISTERS),
            f0_chromatic=tuple(_tables.F0_CHROMATIC),
            f0_micro=tuple(_tables.F0_MICRO),
            overrides=tuple(overrides),
        )

    @classmethod
    def load(cls, path) -> "Vocabulary":
        with open(path, "r", encoding="ascii") as fh:
            return cls.from_text(fh.read())


def _fmt(value: float | None) -> str:
    if value is None:
        return "nan"
    if value == math.inf:
        return "inf"
    if value == -math.inf:
        return "-inf"
    return repr(float(value))


def _parse_bound(text: str) -> float | None:
    if text == "nan":
        return None
    return float(text)


def _bark_level_entries() -> tuple[LabelEntry, ...]:
    out = []
    for word, lo, hi in _tables.BARK_LEVELS:
        iv = Interval(lo, hi)
        if word == "overwhelming":
            out.append(LabelEntry(word, iv, _tables.BARK_OVERWHELMING_REPRESENTATIVE, True))
        else:
            out.append(LabelEntry(word, iv, generic_representative(lo, hi), False))
    return tuple(out)


def _build_from_tables() -> Vocabulary:
    override_map = {(f, l): v for f, l, v in _tables.REPRESENTATIVE_OVERRIDES}
    features: list[FeatureId] = []
    entries: dict[str, tuple[LabelEntry, ...]] = {}

    def add_feature(name: str, family: str, ents: list[LabelEntry]):
        features.append(FeatureId(name, family, len(features)))
        entries[name] = tuple(ents)

    for name, family in _tables.SCALAR_FEATURES:
        if name == "f0_hz":
            f0_entries = [LabelEntry("unpitched", Interval(None, None), None, False)]
            for r in range(8):
                for n in range(12):
                    for m in range(3):
                        label, iv = f0_bin(r, n, m)
                        f0_entries.append(LabelEntry(label, iv, _f0_representative(iv), False))
            add_feature("f0_hz", family, f0_entries)
            continue
        ents = []
        for label, lo, hi in _tables.SCALAR_BINS[name]:
            iv = Interval(lo, hi)
            rep = generic_representative(lo, hi)
            overridden = (name, label) in override_map
            if overridden:
                rep = override_map[(name, label)]
            ents.append(LabelEntry(label, iv, rep, overridden))
        add_feature(name, family, ents)
        if name == "odd_even_harmonic_ratio":
            levels = _bark_level_entries()
            for b, keyword in enumerate(_tables.BARK_KEYWORDS):
                ents_b = [
                    LabelEntry(
                        f"{lv.label} {keyword}", lv.interval, lv.representative, lv.override_applied
                    )
                    for lv in levels
                ]
                add_feature(f"bark_band_{b + 1}", "bark", ents_b)

    inert_names = {f.name for f in features}
    overrides = tuple(
        OverrideRule(f, l, v, inert=f not in inert_names)
        for f, l, v in _tables.REPRESENTATIVE_OVERRIDES
    )
    return Vocabulary(
        features=tuple(features),
        entries=entries,
        bark_levels=_bark_level_entries(),
        bark_keywords=tuple(_tables.BARK_KEYWORDS),
        f0_registers=tuple(_tables.F0_REGISTERS),
        f0_chromatic=tuple(_tables.F0_CHROMATIC),
        f0_micro=tuple(_tables.F0_MICRO),
        overrides=overrides,
    )


def default_vocabulary_text() -> str:
    """Regenerate the packaged vocabulary file content from the raw tables."""
    return _build_from_tables().save_text()


def _packaged_text() -> str:
    return resources.files("lacodec").joinpath("data/vocabulary.txt").read_text("ascii")


def build_default_vocabulary(path: str | None = None) -> Vocabulary:
    """Load the shipped vocabulary (or one at ``path``) and validate it."""
    if path is None:
        vocab = Vocabulary.from_text(_packaged_text())
    else:
        vocab = Vocabulary.load(path)
    report = vocab.validate()
    if not report.ok:
        raise VocabularyError("vocabulary failed validation:\n" + "\n".join(report.lines()))
    return vocab
