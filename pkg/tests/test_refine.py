import numpy as np
import pytest

from lacodec import refine as rf
from lacodec.features import FeatureVector, Waveform, extract
from lacodec.renderer import RenderSpec, decode_targets, duration_of, init_controls, render
from lacodec.textcodec import FEATURE_NAMES, code_from_features, seed_of, verbalize


def feature_vector_at_representatives(code, vocab) -> FeatureVector:
    values = {}
    for name, label in zip(FEATURE_NAMES, code.labels):
        values[name] = vocab.representative_of(name, label)
    return FeatureVector(values)


@pytest.fixture(scope="module")
def pluck_code(vocab, pluck):
    return code_from_features(extract(Waveform(np.asarray(pluck), 44100)).values, vocab)


def test_mismatch_zero_at_representatives(vocab, pluck_code):
    fv = feature_vector_at_representatives(pluck_code, vocab)
    assert rf.mismatch(fv, pluck_code, vocab) == 0.0
    assert rf.count_violations(fv, pluck_code, vocab) == 0


def test_mismatch_hinge_example(vocab, pluck_code):
    assert pluck_code["rms_energy"] == "mid-power"
    fv = feature_vector_at_representatives(pluck_code, vocab)
    fv.values["rms_energy"] = 0.35
    # (0.35 - 0.30) / 0.20 per the stated hinge normalization
    assert rf.mismatch(fv, pluck_code, vocab) == pytest.approx(0.25)
    assert rf.count_violations(fv, pluck_code, vocab) == 1
    assert rf.violated_features(fv, pluck_code, vocab) == ["rms_energy"]


def test_mismatch_definedness_penalty(vocab, pluck_code):
    fv = feature_vector_at_representatives(pluck_code, vocab)
    fv.values["f0_hz"] = None  # pitched code, unpitched re-extraction
    assert rf.mismatch(fv, pluck_code, vocab) == pytest.approx(1.0)
    fv.values["inharmonicity"] = None
    assert rf.mismatch(fv, pluck_code, vocab) == pytest.approx(2.0)


def test_mismatch_open_bin_scale(vocab, pluck_code):
    code = pluck_code.as_dict()
    code["crest_factor_db"] = "spiky"  # [17, inf), representative 22
    from lacodec.textcodec import LexicalCode

    code = LexicalCode.from_dict(code)
    fv = feature_vector_at_representatives(code, vocab)
    fv.values["crest_factor_db"] = 10.0
    assert rf.mismatch(fv, code, vocab) == pytest.approx((17.0 - 10.0) / (22.0 + 1.0))


def test_powell_quadratic_oracle():
    target = np.full(15, 0.6)
    calls = []

    def quad(x):
        calls.append(1)
        return float(np.sum((np.asarray(x) - target) ** 2))

    evaluations = rf.powell_minimize(quad, np.full(15, 0.3), budget=200)
    assert len(evaluations) <= 200
    assert len(calls) == len(evaluations)
    best_x, best_f = min(evaluations, key=lambda e: e[1])
    assert np.linalg.norm(best_x - target) <= 1e-2


def test_powell_budget_accounting():
    def f(x):
        return float(np.sum(np.asarray(x) ** 2))

    assert len(rf.powell_minimize(f, np.full(15, 0.5), budget=1)) == 1
    for budget in (2, 7, 33):
        assert len(rf.powell_minimize(f, np.full(15, 0.5), budget=budget)) <= budget


def test_select_best_rules():
    def cand(v, s, i):
        return rf.Candidate(controls=None, features=None, violations=v, score=s, index=i)

    a, b = cand(3, 0.2, 0), cand(1, 5.0, 1)
    assert rf.select_best([a, b]) is b
    a, b = cand(2, 1.0, 0), cand(2, 0.5, 1)
    assert rf.select_best([a, b]) is b
    a, b = cand(2, 0.5, 0), cand(2, 0.5, 1)
    assert rf.select_best([a, b]) is a  # earliest evaluation wins ties
    only = cand(5, 9.0, 0)
    assert rf.select_best([only]) is only
    with pytest.raises(ValueError):
        rf.select_best([])


def test_budget_one_is_open_loop(vocab, pluck_code):
    targets = decode_targets(pluck_code, vocab)
    direct = render(
        RenderSpec(targets, init_controls(targets), seed_of(pluck_code), duration_of(targets))
    )
    wav, report, candidates = rf.decode_code(pluck_code, vocab, rf.RefineConfig(budget=1))
    assert len(candidates) == 1
    assert report.evaluations == 1
    assert np.array_equal(wav.samples, direct.samples)


def test_decode_deterministic(vocab, pluck_code):
    sentence = verbalize(pluck_code)
    w1, r1 = rf.decode(sentence, vocab, rf.RefineConfig(budget=6))
    w2, r2 = rf.decode(sentence, vocab, rf.RefineConfig(budget=6))
    assert np.array_equal(w1.samples, w2.samples)
    assert r1.seed == r2.seed
    assert r1.j_trace == r2.j_trace
    assert r1.violations == r2.violations


def test_refinement_never_worse_than_init(vocab, pluck_code):
    _, report, candidates = rf.decode_code(pluck_code, vocab, rf.RefineConfig(budget=10))
    assert report.violations <= candidates[0].violations
    best = rf.select_best(candidates)
    assert all(
        (best.violations, best.score) <= (c.violations, c.score) for c in candidates
    )


def test_candidate_prefix_and_budget_monotonicity(vocab, pluck_code):
    _, _, small = rf.decode_code(pluck_code, vocab, rf.RefineConfig(budget=6))
    _, _, large = rf.decode_code(pluck_code, vocab, rf.RefineConfig(budget=12))
    assert len(small) == 6 and len(large) == 12
    for a, b in zip(small, large):
        assert np.array_equal(a.controls.as_array(), b.controls.as_array())
        assert a.score == b.score
    sel_small = rf.select_best(small)
    sel_large = rf.select_best(large)
    assert (sel_large.violations, sel_large.score) <= (sel_small.violations, sel_small.score)


def test_bad_config_rejected():
    with pytest.raises(ValueError):
        rf.RefineConfig(budget=0)
    with pytest.raises(ValueError):
        rf.RefineConfig(budget=8, reg_weight=-1.0)


def test_parse_errors_propagate(vocab):
    from lacodec.textcodec import MissingLabelError

    with pytest.raises(MissingLabelError):
        rf.decode("A sound with nothing in it.", vocab)
