import math

import numpy as np
import pytest

from lacodec import _tables
from lacodec.vocab import (
    Interval,
    QuantizationError,
    UnknownLabelError,
    Vocabulary,
    default_vocabulary_text,
    f0_bin,
    generic_representative,
    normalize_label,
)


def test_feature_registry_shape(vocab):
    assert len(vocab.features) == 47
    families = [f.family for f in vocab.features]
    assert families.count("temporal") == 7
    assert families.count("spectral") == 7
    assert families.count("harmonic") == 7
    assert families.count("bark") == 24
    assert families.count("psychoacoustic") == 2
    assert vocab.features[0].name == "rms_energy"
    assert vocab.features[14].name == "f0_hz"
    assert vocab.features[21].name == "bark_band_1"
    assert vocab.features[46].name == "roughness"
    assert [f.index for f in vocab.features] == list(range(47))


def test_validation_clean(vocab):
    report = vocab.validate()
    assert report.ok, "\n".join(report.lines())
    assert report.non_f0_bins == 285
    assert report.generic_rule_bins == 245
    assert not report.generic_rule_discrepancy


def test_quantize_examples(vocab):
    assert vocab.quantize("rms_energy", 0.2) == "mid-power"
    # half-open lower edge included
    assert vocab.quantize("rms_energy", 0.10) == "mid-power"
    assert vocab.quantize("rms_energy", 0.3) == "forceful"
    assert vocab.quantize("f0_hz", None) == "unpitched"
    assert vocab.quantize("temporal_centroid", 0.5) == "evenly-distributed"


def test_quantize_errors(vocab):
    with pytest.raises(QuantizationError):
        vocab.quantize("rms_energy", None)  # no sentinel bin
    with pytest.raises(QuantizationError):
        vocab.quantize("rms_energy", -0.01)  # below coverage
    with pytest.raises(QuantizationError):
        vocab.quantize("rms_energy", float("nan"))
    with pytest.raises(UnknownLabelError):
        vocab.quantize("not_a_feature", 0.1)


def test_interval_examples(vocab):
    assert vocab.interval_of("spectral_centroid_hz", "warm") == Interval(500.0, 2000.0)
    snap = vocab.interval_of("log_attack_time", "snap-onset")
    assert snap.lower == -math.inf and snap.upper == -2.8
    quack = vocab.interval_of("bark_band_6", "overwhelming quack")
    assert quack.lower == 15.0 and quack.upper == math.inf
    with pytest.raises(UnknownLabelError):
        vocab.interval_of("rms_energy", "deafening")


def test_interval_kinds(vocab):
    assert vocab.interval_of("rms_energy", "whisper").kind == "finite"
    assert vocab.interval_of("rms_energy", "thunderous").kind == "open-upper"
    assert vocab.interval_of("log_attack_time", "snap-onset").kind == "open-lower"
    assert vocab.interval_of("decay_time_s", "non-decaying").kind == "sentinel-undefined"


def test_generic_representative_branches():
    assert generic_representative(0.1, 0.3) == pytest.approx(0.2)
    assert generic_representative(17.0, math.inf) == pytest.approx(25.5)
    assert generic_representative(0.0, math.inf) == 1.0
    assert generic_representative(-1.5, math.inf) == pytest.approx(3.25)
    assert generic_representative(-math.inf, 2.0) == pytest.approx(1.0)
    assert generic_representative(-math.inf, -3.0) == pytest.approx(-5.5)
    assert generic_representative(None, None) is None


def test_representative_examples(vocab):
    assert vocab.representative_of("harmonic_noise_ratio_db", "noise-engulfed") == -5.0
    assert vocab.representative_of("zero_crossing_rate", "infrasonic") == pytest.approx(50.0)
    assert vocab.representative_of("crest_factor_db", "spiky") == 22.0
    assert vocab.representative_of("decay_time_s", "non-decaying") is None
    assert vocab.representative_of("rms_energy", "mid-power") == pytest.approx(0.20)
    # geometric-mean oracle computed straight from the bin formula
    k = 36 * 4 + 3 * 7 + 2
    lo = 20 * 2 ** (k / 36)
    hi = 20 * 2 ** ((k + 1) / 36)
    assert vocab.representative_of("f0_hz", "lumen sol crown") == pytest.approx(
        math.sqrt(lo * hi), rel=1e-12
    )


def test_override_registry(vocab):
    assert len(vocab.overrides) == 19
    inert = {(o.feature, o.label) for o in vocab.overrides if o.inert}
    assert inert == {
        ("spectral_spread_hz", "ultra-wide"),
        ("spectral_skewness", "extreme-asymmetry"),
        ("spectral_slope", "ascending"),
    }
    for rule in vocab.overrides:
        if not rule.inert:
            assert vocab.representative_of(rule.feature, rule.label) == rule.value


def test_bark_level_representatives(vocab):
    expected = {
        "silent": 0.005,
        "trace": 1.005,
        "faint": 3.5,
        "present": 6.5,
        "strong": 9.5,
        "dominant": 13.0,
        "overwhelming": 18.0,
    }
    got = {e.label: e.representative for e in vocab.bark_levels}
    assert got == expected
    for b in range(1, 25):
        keyword = vocab.bark_keywords[b - 1]
        for level, rep in expected.items():
            assert vocab.representative_of(f"bark_band_{b}", f"{level} {keyword}") == rep


def test_f0_bins():
    label, iv = f0_bin(0, 0, 0)
    assert label == "sub do shadow"
    assert iv.lower == 0.0
    assert iv.upper == pytest.approx(20 * 2 ** (1 / 36))
    label, _ = f0_bin(4, 7, 2)
    assert label == "lumen sol crown"
    with pytest.raises(IndexError):
        f0_bin(8, 0, 0)
    with pytest.raises(IndexError):
        f0_bin(0, 12, 0)


def test_f0_bins_contiguous(vocab):
    finite = [e for e in vocab.entries["f0_hz"] if e.interval.lower is not None]
    finite.sort(key=lambda e: e.interval.lower)
    assert len(finite) == 288
    for a, b in zip(finite, finite[1:]):
        assert a.interval.upper == pytest.approx(b.interval.lower, rel=1e-12)
    assert finite[-1].interval.upper == pytest.approx(5120.0, rel=1e-9)


def test_max_bits(vocab):
    # independent recount from the alphabets themselves
    expected = sum(math.log2(len(vocab.entries[f.name])) for f in vocab.features)
    assert vocab.max_bits() == pytest.approx(expected, rel=1e-12)
    assert len(vocab.entries["f0_hz"]) == 289
    assert len(vocab.entries["rms_energy"]) == 5
    # invariant under label renaming: depends only on alphabet sizes
    renamed = Vocabulary.from_text(
        default_vocabulary_text().replace("mid-power", "qq-power")
    )
    assert renamed.max_bits() == vocab.max_bits()


def test_serialization_roundtrip(tmp_path, vocab):
    text = default_vocabulary_text()
    from importlib import resources

    packaged = resources.files("lacodec").joinpath("data/vocabulary.txt").read_text("ascii")
    assert packaged == text, "packaged vocabulary file drifted from the source tables"
    path = tmp_path / "vocab.txt"
    vocab.save(path)
    assert path.read_text("ascii") == text
    reloaded = Vocabulary.load(path)
    assert reloaded.save_text() == text


def test_quantize_interval_containment(vocab):
    rng = np.random.default_rng(5)
    for feature in vocab.feature_names:
        entries = [e for e in vocab.entries[feature] if e.interval.lower is not None]
        lo = entries[0].interval.lower
        hi = entries[-1].interval.upper
        if not math.isfinite(lo):
            lo = entries[0].interval.upper - 10.0
        if not math.isfinite(hi):
            hi = entries[-1].interval.lower * 2 + 10.0
        samples = list(rng.uniform(lo, hi, size=50))
        samples += [e.interval.lower for e in entries if math.isfinite(e.interval.lower)]
        for v in samples:
            label = vocab.quantize(feature, float(v))
            assert vocab.interval_of(feature, label).contains(float(v))


def test_midpoint_minimax(vocab):
    rng = np.random.default_rng(6)
    for feature in vocab.feature_names:
        if feature == "f0_hz":
            continue
        for e in vocab.entries[feature]:
            iv = e.interval
            if iv.lower is None or not math.isfinite(iv.width) or e.override_applied:
                continue
            assert e.representative == pytest.approx((iv.lower + iv.upper) / 2)
            xs = rng.uniform(iv.lower, iv.upper, size=200)
            assert np.max(np.abs(xs - e.representative)) <= iv.width / 2 + 1e-12


def test_normalize_label():
    assert normalize_label("Mid-Power") == "mid power"
    assert normalize_label("  swift   onset ") == "swift onset"
    assert normalize_label("unpitched") == "unpitched"


def test_global_label_uniqueness(vocab):
    seen = {}
    for feature in vocab.feature_names:
        for e in vocab.entries[feature]:
            key = normalize_label(e.label)
            if key == "unpitched":
                continue
            assert key not in seen or seen[key] == feature, key
            seen[key] = feature
