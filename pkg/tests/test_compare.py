import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from prosodyx.audio_io import AudioBuffer
from prosodyx.compare import (ComparisonReport, align_length, compare_features,
                              normalize_for_loss, save_report)
from prosodyx.errors import ConfigMismatch, NoVoicedFrames, SilentInput
from prosodyx.features import ProsodicFeatures, extract_features

from signals import SR, sawtooth

N_BINS = 513


def synthetic(f0, energy=None, seed=0, sp_level=1e-3):
    """Feature set built directly from tracks, no audio involved."""
    f0 = np.asarray(f0, dtype=np.float64)
    n = f0.shape[0]
    rng = np.random.default_rng(seed)
    if energy is None:
        energy = rng.uniform(0.05, 0.2, n)
    ap = np.where(f0[:, None] > 0, 0.1, 1.0) * np.ones((n, N_BINS))
    return ProsodicFeatures(f0=f0, periodicity=np.where(f0 > 0, 0.9, 0.1),
                            sp=sp_level * rng.uniform(0.5, 1.5, (n, N_BINS)), ap=ap,
                            energy=np.asarray(energy, dtype=np.float64))


@st.composite
def feature_sets(draw, min_frames=1, max_frames=60):
    n = draw(st.integers(min_frames, max_frames))
    f0 = np.array(draw(st.lists(st.one_of(st.just(0.0), st.floats(71.0, 800.0)),
                                min_size=n, max_size=n)))
    if not (f0 > 0).any():
        f0[draw(st.integers(0, n - 1))] = draw(st.floats(71.0, 800.0))
    energy = np.array(draw(st.lists(st.floats(1e-3, 1.0), min_size=n, max_size=n)))
    return synthetic(f0, energy, seed=draw(st.integers(0, 1000)))


def test_self_comparison(saw220):
    f = extract_features(saw220)
    r = compare_features(f, f)
    assert r.discrepancies == (0.0, 1.0, 1.0)
    assert r.aligned_f0_rmse_hz == 0.0
    assert r.voiced_frames_human == r.voiced_frames_tts == int(f.voiced.sum())


@settings(max_examples=60, deadline=None)
@given(feature_sets())
def test_self_comparison_fuzz(f):
    r = compare_features(f, f)
    assert r.discrepancies == (0.0, 1.0, 1.0)
    assert r.aligned_f0_rmse_hz == 0.0


@settings(max_examples=60, deadline=None)
@given(feature_sets(), feature_sets())
def test_antisymmetry(a, b):
    ab, ba = compare_features(a, b), compare_features(b, a)
    assert ba.pitch_diff_hz == pytest.approx(-ab.pitch_diff_hz, rel=1e-9, abs=1e-9)
    assert ba.duration_ratio * ab.duration_ratio == pytest.approx(1.0, rel=1e-9)
    assert ba.energy_ratio * ab.energy_ratio == pytest.approx(1.0, rel=1e-9)


def test_fixture_pair_discrepancies(fixture_reports):
    means = np.mean([r.discrepancies for r in fixture_reports], axis=0)
    assert means[0] == pytest.approx(30.0, abs=3.0)
    assert means[1] == pytest.approx(0.85, abs=0.02)
    assert means[2] == pytest.approx(1.25, abs=0.05)


def test_scaled_copy_energy_ratio():
    # energy_ratio compares mean power, so doubling amplitude reads 4
    x = sawtooth(180.0, amp=0.2)
    h = extract_features(AudioBuffer(2 * x, SR))
    t = extract_features(AudioBuffer(x, SR))
    r = compare_features(h, t)
    assert r.pitch_diff_hz == pytest.approx(0.0, abs=1e-6)
    assert r.duration_ratio == 1.0
    assert r.energy_ratio == pytest.approx(4.0, rel=1e-9)


def test_energy_ratio_is_mean_power():
    h = synthetic(np.full(4, 200.0), energy=[1.0, 3.0, 1.0, 3.0])
    t = synthetic(np.full(2, 200.0), energy=[2.0, 2.0])
    # (1 + 9 + 1 + 9) / 4 over 4
    assert compare_features(h, t).energy_ratio == pytest.approx(5.0 / 4.0)
    assert compare_features(h, t).duration_ratio == 2.0


def test_errors():
    voiced = synthetic(np.full(10, 200.0))
    with pytest.raises(NoVoicedFrames):
        compare_features(voiced, synthetic(np.zeros(10)))
    with pytest.raises(NoVoicedFrames):
        compare_features(synthetic(np.zeros(10)), voiced)
    with pytest.raises(SilentInput):
        compare_features(voiced, synthetic(np.full(10, 200.0), energy=np.zeros(10)))
    with pytest.raises(ConfigMismatch):
        compare_features(voiced, voiced.replace(frame_period_ms=10.0))
    with pytest.raises(ConfigMismatch):
        compare_features(voiced, voiced.replace(sample_rate=8000))


def test_align_identity_and_constant():
    f = synthetic(np.r_[np.full(5, 200.0), np.zeros(3), np.full(4, 150.0)])
    g = align_length(f, f.n_frames)
    assert g is not f
    for name in ProsodicFeatures._fields:
        np.testing.assert_array_equal(getattr(f, name), getattr(g, name))
    c = synthetic(np.full(9, 200.0))
    for m in (1, 2, 5, 17, 40):
        np.testing.assert_array_equal(align_length(c, m).f0, 200.0)


def test_align_linear_energy():
    f = synthetic(np.full(4, 200.0), energy=[0.0, 1.0, 2.0, 3.0])
    np.testing.assert_allclose(align_length(f, 7).energy, [0, 0.5, 1, 1.5, 2, 2.5, 3])


def test_align_does_not_bridge_voicing_gaps():
    f = synthetic(np.array([200.0, 0.0, 0.0, 100.0]))
    g = align_length(f, 10)
    v = g.f0[g.voiced]
    assert set(np.unique(v)) <= {100.0, 200.0}
    assert np.all(g.ap[~g.voiced] == 1.0)
    g.validate()


@settings(max_examples=60, deadline=None)
@given(feature_sets(), st.integers(1, 120))
def test_align_voicing_nearest_neighbour(f, m):
    g = align_length(f, m)
    assert g.n_frames == m
    pos = np.arange(m) * ((f.n_frames - 1) / (m - 1)) if m > 1 and f.n_frames > 1 else np.zeros(m)
    near = np.minimum(np.floor(pos + 0.5).astype(int), f.n_frames - 1)
    if m != f.n_frames:
        np.testing.assert_array_equal(g.voiced, f.voiced[near])
    assert g.voiced.sum() <= f.voiced[near].sum()
    # voiced output frames stay within the range of the voiced input
    v = f.f0[f.voiced]
    assert np.all((g.f0[g.voiced] >= v.min() - 1e-9) & (g.f0[g.voiced] <= v.max() + 1e-9))
    g.validate()


def test_align_rejects_nonpositive():
    with pytest.raises(ValueError):
        align_length(synthetic(np.full(3, 200.0)), 0)


def test_normalize_for_loss():
    f = synthetic(np.r_[np.full(5, 200.0), np.zeros(2)], energy=np.r_[np.full(5, 0.1), 0.0, 0.0])
    s = normalize_for_loss(f)
    assert s.mean_log_f0 == pytest.approx(np.log(200.0))
    assert s.std_log_f0 == 0.0
    assert s.mean_log_energy == pytest.approx(np.log(0.1))
    assert s.std_log_energy == 0.0
    rng = np.random.default_rng(0)
    e = rng.uniform(0.01, 0.5, 20)
    a = normalize_for_loss(synthetic(np.full(20, 180.0), e))
    b = normalize_for_loss(synthetic(np.full(20, 180.0), 3.0 * e))
    assert b.mean_log_energy - a.mean_log_energy == pytest.approx(np.log(3.0))
    assert b.std_log_energy == pytest.approx(a.std_log_energy)
    with pytest.raises(NoVoicedFrames):
        normalize_for_loss(synthetic(np.zeros(4)))
    with pytest.raises(SilentInput):
        normalize_for_loss(synthetic(np.full(4, 200.0), energy=np.zeros(4)))


def test_normalize_fixture_log_ratio(fixture_features):
    diffs = []
    for h, t in fixture_features:
        a, b = normalize_for_loss(h), normalize_for_loss(t)
        expected = np.log(h.f0[h.voiced].mean() / t.f0[t.voiced].mean())
        diffs.append((a.mean_log_f0 - b.mean_log_f0) - expected)
    # log of the mean vs mean of the log differ only by the contour spread
    assert np.max(np.abs(diffs)) < 2e-3


def test_report_json(tmp_path, fixture_reports):
    r = fixture_reports[0]
    save_report(tmp_path / "r.json", r)
    d = json.loads((tmp_path / "r.json").read_text())
    assert set(d) == {"pitch_diff_hz", "duration_ratio", "energy_ratio", "voiced_frames_human",
                      "voiced_frames_tts", "aligned_f0_rmse_hz"}
    assert ComparisonReport.from_dict(d) == r
