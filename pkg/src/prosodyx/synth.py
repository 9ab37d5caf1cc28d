"""Pulse-plus-noise source-filter vocoder.

Each frame filters a Hann-windowed slice of two continuous excitations (a
flat-spectrum harmonic series following the F0 track, and seeded white
noise) through the minimum-phase filter implied by the spectral envelope.
Frames are overlap-added and divided by the summed window, so a flat unit
filter returns the excitation unchanged.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .audio_io import AudioBuffer
from .errors import InvariantViolation
from .features import (AnalysisConfig, ProsodicFeatures, box_smooth, extract_features,
                       frame_centers, hann, smoothing_width_bins)
from .manipulate import ManipulationParams, manipulate_features

_CHUNK_FRAMES = 128
# filters are built on a grid this many times finer than the envelope; a
# coarse grid aliases the long cepstrum of envelopes with deep valleys
OVERSAMPLE = 4


@dataclass(frozen=True)
class SynthConfig:
    noise_seed: int = 0


def minimum_phase_response(magnitude: np.ndarray) -> np.ndarray:
    """Minimum-phase spectrum for rows of one-sided ``magnitude``.

    Folds the real cepstrum of ``log|H|`` onto positive quefrencies.
    """
    n_fft = 2 * (magnitude.shape[-1] - 1)
    cep = np.fft.irfft(np.log(magnitude), n=n_fft, axis=-1)
    fold = np.zeros_like(cep)
    half = n_fft // 2
    fold[..., 0] = cep[..., 0]
    fold[..., 1:half] = 2.0 * cep[..., 1:half]
    fold[..., half] = cep[..., half]
    return np.exp(np.fft.rfft(fold, axis=-1))


def _upsample_bins(rows: np.ndarray, factor: int) -> np.ndarray:
    """Linear interpolation of one-sided spectra onto a ``factor``-times finer grid."""
    n_bins = rows.shape[1]
    fine = np.arange((n_bins - 1) * factor + 1) / factor
    lo = np.minimum(np.floor(fine).astype(np.int64), n_bins - 2)
    frac = fine - lo
    return rows[:, lo] * (1.0 - frac) + rows[:, lo + 1] * frac


def _sample_f0(f: ProsodicFeatures, centers: np.ndarray, positions: np.ndarray, hop: float):
    voiced = f.voiced
    near = np.clip(np.floor(positions / hop + 0.5).astype(np.int64), 0, f.n_frames - 1)
    voiced_s = voiced[near]
    if not voiced.any():
        return np.zeros(positions.shape[0]), voiced_s
    f0_s = np.interp(positions, centers[voiced], f.f0[voiced])
    return np.where(voiced_s, f0_s, 0.0), voiced_s


def harmonic_source(f0_s: np.ndarray, sample_rate: int) -> np.ndarray:
    """Unit-power harmonic series with continuous phase.

    Phase is the running integral of the per-sample F0; every harmonic
    below Nyquist gets amplitude sqrt(2 / K).
    """
    cycles = np.cumsum(f0_s) / sample_rate
    phase = 2.0 * np.pi * (cycles - np.floor(cycles))
    with np.errstate(divide="ignore"):
        n_harm = np.where(f0_s > 0, np.floor((sample_rate / 2.0 - 1e-9) / f0_s), 0)
    n_harm = n_harm.astype(np.int64)
    amp = np.where(n_harm > 0, np.sqrt(2.0 / np.maximum(n_harm, 1)), 0.0)
    return _kernels.harmonic_excitation(np.ascontiguousarray(phase),
                                        np.ascontiguousarray(n_harm),
                                        np.ascontiguousarray(amp))


def synthesize(f: ProsodicFeatures, cfg: SynthConfig = SynthConfig()) -> AudioBuffer:
    f.validate()
    sr = f.sample_rate
    n_fft = f.fft_size
    n = f.n_frames
    hop = sr * f.frame_period_ms / 1000.0
    out_len = int(round(n * hop))
    cfg_a = AnalysisConfig(frame_period_ms=f.frame_period_ms, fft_size=n_fft)
    centers = frame_centers(n, sr, cfg_a)

    # buffer index b holds output sample b - n_fft
    total = out_len + 3 * n_fft
    positions = np.arange(total, dtype=np.float64) - n_fft
    f0_s, _ = _sample_f0(f, centers.astype(np.float64), positions, hop)
    harm = harmonic_source(f0_s, sr)
    noise = np.random.default_rng(cfg.noise_seed).standard_normal(total)

    # each harmonic carries the envelope power of its own band, so total
    # power does not depend on where the harmonic comb falls after a shift
    sp = box_smooth(f.sp, smoothing_width_bins(f.f0, sr, cfg_a))

    win = hann(n_fft)
    gain = n_fft / np.sum(win ** 2)
    starts = centers + n_fft - n_fft // 2
    long_fft = OVERSAMPLE * n_fft
    acc = np.zeros(total + long_fft)
    wsum = np.zeros(total + long_fft)
    idx = np.arange(n_fft)

    for lo in range(0, n, _CHUNK_FRAMES):
        sl = slice(lo, min(lo + _CHUNK_FRAMES, n))
        st = starts[sl]
        seg = st[:, None] + idx[None, :]
        eh = np.fft.rfft(harm[seg] * win, n=long_fft, axis=1)
        en = np.fft.rfft(noise[seg] * win, n=long_fft, axis=1)

        h = minimum_phase_response(np.sqrt(_upsample_bins(sp[sl], OVERSAMPLE) * gain))
        ap = _upsample_bins(f.ap[sl], OVERSAMPLE)
        spec = h * (np.sqrt(1.0 - ap) * eh + np.sqrt(ap) * en)
        frames = np.fft.irfft(spec, n=long_fft, axis=1)

        for j, s in enumerate(st):
            acc[s:s + long_fft] += frames[j]
            wsum[s:s + n_fft] += win

    norm = np.maximum(wsum, 1e-3 * wsum.max())
    y = (acc / norm)[n_fft:n_fft + out_len]
    if not np.all(np.isfinite(y)):
        raise InvariantViolation("synthesis produced non-finite samples")
    return AudioBuffer(y, sr)


def resynthesize(audio: AudioBuffer, params: ManipulationParams,
                 cfg: SynthConfig = SynthConfig(),
                 analysis: AnalysisConfig = AnalysisConfig()) -> AudioBuffer:
    """Analyze, manipulate and synthesize in one call."""
    feats = extract_features(audio, analysis)
    return synthesize(manipulate_features(feats, params, analysis), cfg)
