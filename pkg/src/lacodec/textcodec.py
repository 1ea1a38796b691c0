"""Sentence channel: verbalize a lexical code as English and parse it back.

The sentence is an injective carrier: ordinary grammatical glue may be
added, but every label must remain recoverable. Parsing is label spotting
over normalized text (lowercase, hyphen/space equivalent, punctuation as
word boundaries), not grammar parsing; all normalized labels are globally
unique except the shared harmonic sentinel ``unpitched``.
"""

from __future__ import annotations

import hashlib
import re
import weakref
from dataclasses import dataclass

from .vocab import Vocabulary, normalize_label
from . import _tables as _t

# Canonical feature order is fixed by the vocabulary tables: temporal,
# spectral, harmonic, the 24 Bark bands, then the two psychoacoustic scalars.
FEATURE_NAMES: tuple[str, ...] = (
    tuple(name for name, family in _t.SCALAR_FEATURES if family != "psychoacoustic")
    + tuple(f"bark_band_{i}" for i in range(1, 25))
    + tuple(name for name, family in _t.SCALAR_FEATURES if family == "psychoacoustic")
)

HARMONIC_FEATURES = (
    "f0_hz",
    "harmonic_noise_ratio_db",
    "inharmonicity",
    "tristimulus_1",
    "tristimulus_2",
    "tristimulus_3",
    "odd_even_harmonic_ratio",
)

UNPITCHED = "unpitched"

_WORD_RE = re.compile(r"[a-z0-9]+")


class ParseError(ValueError):
    """Sentence does not carry a full, unambiguous lexical code."""


class MissingLabelError(ParseError):
    def __init__(self, features):
        self.features = tuple(features)
        super().__init__("no label found for: " + ", ".join(self.features))


class ConflictingLabelError(ParseError):
    def __init__(self, feature, first, second):
        self.feature = feature
        super().__init__(
            f"{feature}: conflicting labels {first!r} and {second!r} both present"
        )


@dataclass(frozen=True)
class LexicalCode:
    """Ordered 47-tuple of labels, one per feature in canonical order."""

    labels: tuple[str, ...]

    def __post_init__(self):
        if len(self.labels) != len(FEATURE_NAMES):
            raise ValueError(f"expected {len(FEATURE_NAMES)} labels, got {len(self.labels)}")

    def __getitem__(self, feature: str) -> str:
        return self.labels[FEATURE_NAMES.index(feature)]

    def as_dict(self) -> dict[str, str]:
        return dict(zip(FEATURE_NAMES, self.labels))

    @classmethod
    def from_dict(cls, mapping: dict[str, str]) -> "LexicalCode":
        return cls(tuple(mapping[name] for name in FEATURE_NAMES))

    def validate(self, vocab: Vocabulary) -> None:
        for name, label in zip(FEATURE_NAMES, self.labels):
            vocab.entry_of(name, label)


def code_from_features(values: dict[str, float | None], vocab: Vocabulary) -> LexicalCode:
    """Quantize a full feature mapping into a lexical code."""
    return LexicalCode(tuple(vocab.quantize(name, values[name]) for name in FEATURE_NAMES))


def canonical_tokens(code: LexicalCode) -> tuple[str, ...]:
    """Paraphrase-invariant identity of the code; the seed hash preimage."""
    return tuple(f"{name}={label}" for name, label in zip(FEATURE_NAMES, code.labels))


def seed_of(code: LexicalCode) -> int:
    """First 32 bits (big-endian) of SHA-256 over the canonical token string."""
    preimage = " ".join(canonical_tokens(code)).encode("ascii")
    return int.from_bytes(hashlib.sha256(preimage).digest()[:4], "big")


def _prose(label: str) -> str:
    return normalize_label(label)


def verbalize_clauses(code: LexicalCode) -> list[str]:
    """Deterministic clause per family; any clause permutation parses the same."""
    d = code.as_dict()
    temporal = (
        f"A {_prose(d['rms_energy'])} sound with {_prose(d['log_attack_time'])} attack, "
        f"{_prose(d['attack_slope_db_s'])} drive, {_prose(d['crest_factor_db'])} dynamics, "
        f"{_prose(d['zero_crossing_rate'])} crossings, {_prose(d['temporal_centroid'])} energy, "
        f"and a {_prose(d['decay_time_s'])} tail."
    )
    spectral = (
        f"The spectrum reads {_prose(d['spectral_centroid_hz'])} and {_prose(d['spectral_flatness'])}, "
        f"with {_prose(d['spectral_rolloff_hz'])} span, {_prose(d['spectral_flux'])} motion, "
        f"{_prose(d['spectral_kurtosis'])} profile, {_prose(d['spectral_entropy'])} structure, "
        f"and {_prose(d['spectral_irregularity'])} outline."
    )
    harmonic_labels = [d[name] for name in HARMONIC_FEATURES]
    if all(label == UNPITCHED for label in harmonic_labels):
        harmonic = "The sound is unpitched."
    elif UNPITCHED not in harmonic_labels:
        harmonic = (
            f"Pitch holds {_prose(d['f0_hz'])} at {_prose(d['harmonic_noise_ratio_db'])} clarity, "
            f"{_prose(d['inharmonicity'])} tuning, {_prose(d['tristimulus_1'])}, "
            f"{_prose(d['tristimulus_2'])}, {_prose(d['tristimulus_3'])}, "
            f"and {_prose(d['odd_even_harmonic_ratio'])} balance."
        )
    else:
        # mixed sentinels: qualify each unpitched slot to stay injective
        items = []
        for name in HARMONIC_FEATURES:
            if d[name] == UNPITCHED:
                items.append("unpitched " + " ".join(name.split("_")))
            else:
                items.append(_prose(d[name]))
        harmonic = "Pitch mixes " + ", ".join(items) + "."
    bark = (
        "Bark bands carry "
        + ", ".join(_prose(d[f"bark_band_{i}"]) for i in range(1, 25))
        + "."
    )
    psycho = f"Overall it feels {_prose(d['sharpness_acum'])} and {_prose(d['roughness'])}."
    return [temporal, spectral, harmonic, bark, psycho]


def verbalize(code: LexicalCode) -> str:
    """English sentence containing every label in recoverable form."""
    return " ".join(verbalize_clauses(code))


# -- parsing ----------------------------------------------------------------


class _Matcher:
    """Word-run tables for longest-match label spotting."""

    def __init__(self, vocab: Vocabulary):
        runs: dict[str, list[tuple[tuple[str, ...], str, str]]] = {}
        for feature in vocab.feature_names:
            for entry in vocab.entries[feature]:
                if normalize_label(entry.label) == UNPITCHED:
                    continue
                words = tuple(normalize_label(entry.label).split())
                runs.setdefault(words[0], []).append((words, feature, entry.label))
        for cands in runs.values():
            cands.sort(key=lambda c: len(c[0]), reverse=True)
        self.runs = runs
        self.feature_runs = sorted(
            ((tuple(name.split("_")), name) for name in HARMONIC_FEATURES),
            key=lambda c: len(c[0]),
            reverse=True,
        )
        self.sentinel_labels = {
            name: vocab.sentinel_label(name) for name in HARMONIC_FEATURES
        }


_MATCHERS: "weakref.WeakKeyDictionary[Vocabulary, _Matcher]" = weakref.WeakKeyDictionary()


def _matcher(vocab: Vocabulary) -> _Matcher:
    m = _MATCHERS.get(vocab)
    if m is None:
        m = _Matcher(vocab)
        _MATCHERS[vocab] = m
    return m


def parse(sentence: str, vocab: Vocabulary) -> LexicalCode:
    """Recover the lexical code from any sentence honoring the carrier contract."""
    m = _matcher(vocab)
    tokens = _WORD_RE.findall(sentence.lower())
    found: dict[str, str] = {}

    def assign(feature: str, label: str):
        prev = found.get(feature)
        if prev is not None and prev != label:
            raise ConflictingLabelError(feature, prev, label)
        found[feature] = label

    i = 0
    n = len(tokens)
    while i < n:
        word = tokens[i]
        if word == UNPITCHED:
            qualified = None
            for words, feature in m.feature_runs:
                if tuple(tokens[i + 1 : i + 1 + len(words)]) == words:
                    qualified = (feature, len(words))
                    break
            if qualified:
                feature, span = qualified
                assign(feature, m.sentinel_labels[feature])
                i += 1 + span
            else:
                for feature in HARMONIC_FEATURES:
                    assign(feature, m.sentinel_labels[feature])
                i += 1
            continue
        matched = False
        for words, feature, label in m.runs.get(word, ()):
            if tuple(tokens[i : i + len(words)]) == words:
                assign(feature, label)
                i += len(words)
                matched = True
                break
        if not matched:
            i += 1
    missing = [name for name in FEATURE_NAMES if name not in found]
    if missing:
        raise MissingLabelError(missing)
    return LexicalCode(tuple(found[name] for name in FEATURE_NAMES))
