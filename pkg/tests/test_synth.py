import numpy as np
import pytest

from prosodyx.audio_io import AudioBuffer
from prosodyx.errors import InvariantViolation
from prosodyx.features import ProsodicFeatures, extract_features, frame_energy
from prosodyx.manipulate import ManipulationParams, scale_energy
from prosodyx.synth import (SynthConfig, harmonic_source, minimum_phase_response,
                            resynthesize, synthesize)

from signals import SR, sawtooth

# analysis reads noise of variance s2 as sp = s2 * mean(hann**2) = 3/8 * s2,
# so a flat envelope c must come back as variance 8/3 * c
FLAT_NOISE_VARIANCE_GAIN = 8.0 / 3.0


def flat(n, f0=0.0, level=1e-4):
    f0 = np.full(n, float(f0))
    ap = np.where(f0 > 0, 0.05, 1.0)[:, None] * np.ones((n, 513))
    return ProsodicFeatures(f0=f0, periodicity=np.where(f0 > 0, 0.95, 0.0),
                            sp=np.full((n, 513), level), ap=ap, energy=np.zeros(n))


def test_minimum_phase_recovers_known_filter():
    w = np.linspace(0, np.pi, 513)
    for a in (0.3, 0.6, -0.8):
        h_true = 1 - a * np.exp(-1j * w)
        h = minimum_phase_response(np.abs(h_true)[None, :])[0]
        np.testing.assert_allclose(h, h_true, atol=1e-9)


def test_minimum_phase_energy_front_loaded():
    fir = np.random.default_rng(0).standard_normal(64)
    mag = np.abs(np.fft.rfft(fir, 1024))
    h = minimum_phase_response(mag[None, :])[0]
    np.testing.assert_allclose(np.abs(h), mag, rtol=1e-6)
    imp = np.fft.irfft(h)
    # among causal responses with one magnitude, the minimum-phase one has
    # the largest partial energy at every length (up to a truncated tail)
    assert np.all(np.cumsum(imp[:64] ** 2) >= np.cumsum(fir ** 2) * (1 - 1e-3))


def test_harmonic_source_unit_power():
    f0 = np.full(SR, 173.0)
    x = harmonic_source(f0, SR)
    assert np.mean(x ** 2) == pytest.approx(1.0, rel=0.01)
    assert np.all(harmonic_source(np.zeros(100), SR) == 0)


def test_flat_noise_level_and_stationarity():
    y = synthesize(flat(300, level=1e-4)).samples
    assert len(y) == 300 * 80
    assert np.var(y) == pytest.approx(FLAT_NOISE_VARIANCE_GAIN * 1e-4, rel=0.03)
    thirds = [np.sqrt(np.mean(p ** 2)) for p in np.array_split(y, 3)]
    assert max(thirds) / min(thirds) <= 1.2
    f = extract_features(AudioBuffer(y, SR))
    assert np.mean(f.f0 == 0) >= 0.95


def test_constant_220_voiced():
    y = synthesize(flat(200, f0=220.0)).samples
    f = extract_features(AudioBuffer(y, SR))
    assert np.mean(f.voiced) >= 0.9
    assert abs(f.f0[f.voiced].mean() - 220.0) <= 5.0


def test_sp_scaled_by_four_doubles_rms(saw220):
    f = extract_features(saw220)
    base = synthesize(f).samples
    loud = synthesize(f.replace(sp=scale_energy(f.sp, 4.0))).samples
    ratio = np.sqrt(np.mean(loud ** 2) / np.mean(base ** 2))
    assert ratio == pytest.approx(2.0, rel=0.10)


def test_deterministic_and_seeded(saw220):
    f = extract_features(saw220)
    a = synthesize(f, SynthConfig(3)).samples
    b = synthesize(f, SynthConfig(3)).samples
    np.testing.assert_array_equal(a, b)
    c = synthesize(f, SynthConfig(4)).samples
    assert not np.array_equal(a, c)


def test_rejects_invalid_features():
    f = flat(10)
    bad = f.replace(sp=f.sp.copy())
    bad.sp[0, 0] = np.nan
    with pytest.raises(InvariantViolation):
        synthesize(bad)
    with pytest.raises(InvariantViolation):
        synthesize(f.replace(sp=-f.sp))
    with pytest.raises(InvariantViolation):
        synthesize(f.replace(energy=np.zeros(3)))


@pytest.mark.parametrize("f0", [130.0, 220.0, 310.0])
def test_round_trip(f0):
    x = AudioBuffer(sawtooth(f0, amp=0.3), SR)
    fin = extract_features(x)
    y = synthesize(fin)
    assert abs(len(y) - len(x)) <= 80
    fout = extract_features(y)
    both = fin.voiced & fout.voiced
    assert np.sqrt(np.mean((fin.f0[both] - fout.f0[both]) ** 2)) <= 5.0
    ratio = np.mean(fout.energy ** 2) / np.mean(fin.energy ** 2)
    assert 0.9 <= ratio <= 1.1


def test_resynthesize_identity_and_duration(saw220):
    y = resynthesize(saw220, ManipulationParams.identity())
    f_in, f_out = extract_features(saw220), extract_features(y)
    both = f_in.voiced & f_out.voiced
    assert np.sqrt(np.mean((f_in.f0[both] - f_out.f0[both]) ** 2)) <= 5.0
    long = resynthesize(saw220, ManipulationParams(0.0, 2.0, 1.0))
    assert abs(long.duration - 2.0) <= 0.005


def test_resynthesize_pitch_shift():
    x = AudioBuffer(sawtooth(200.0), SR)
    y = resynthesize(x, ManipulationParams(30.0, 1.0, 1.0))
    f = extract_features(y)
    assert abs(f.f0[f.voiced].mean() - 230.0) <= 5.0


def test_fixture_corpus_output_sane(fixture_features):
    for h, t in fixture_features[:4]:
        y = synthesize(t).samples
        assert np.all(np.isfinite(y))
        assert np.max(np.abs(y)) <= 4.0


def test_energy_track_follows_envelope_scaling(saw220):
    f = extract_features(saw220)
    base = frame_energy(synthesize(f))
    loud = frame_energy(synthesize(f.replace(sp=4.0 * f.sp)))
    np.testing.assert_allclose(loud, 2.0 * base, rtol=1e-9, atol=1e-12)
