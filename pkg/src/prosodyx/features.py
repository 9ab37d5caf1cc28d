"""Frame-level prosodic analysis: F0, periodicity, energy, spectral envelope
and aperiodicity on a common hop grid."""
from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .audio_io import AudioBuffer
from .errors import BufferTooShort, FrameMismatch, InvariantViolation, IoFailure

VOICING_THRESHOLD = 0.45
SILENCE_RMS = 1e-4
SP_FLOOR = 1e-12
AP_MIN = 0.01
# smallest-lag peak within this fraction of the best one wins (octave guard)
OCTAVE_RATIO = 0.9


@dataclass(frozen=True)
class AnalysisConfig:
    frame_period_ms: float = 5.0
    f0_floor: float = 71.0
    f0_ceil: float = 800.0
    fft_size: int = 1024

    def __post_init__(self):
        if not self.frame_period_ms > 0:
            raise ValueError("frame_period_ms must be positive")
        if not 0 < self.f0_floor < self.f0_ceil:
            raise ValueError("need 0 < f0_floor < f0_ceil")
        n = int(self.fft_size)
        if n < 2 or n & (n - 1):
            raise ValueError(f"fft_size must be a power of two, got {self.fft_size}")

    def check(self, sample_rate: int) -> None:
        """Validate the rate-dependent constraints."""
        if not self.f0_ceil < sample_rate / 2:
            raise ValueError(f"f0_ceil {self.f0_ceil} must be below Nyquist")
        if self.fft_size < 2 * sample_rate / self.f0_floor:
            raise ValueError(
                f"fft_size {self.fft_size} holds fewer than two periods of {self.f0_floor} Hz")

    def hop(self, sample_rate: int) -> float:
        return sample_rate * self.frame_period_ms / 1000.0


@dataclass
class ProsodicFeatures:
    f0: np.ndarray
    periodicity: np.ndarray
    sp: np.ndarray
    ap: np.ndarray
    energy: np.ndarray
    frame_period_ms: float = 5.0
    sample_rate: int = 16000
    fft_size: int = 1024
    _fields = ("f0", "periodicity", "sp", "ap", "energy")

    def __post_init__(self):
        for name in self._fields:
            setattr(self, name, np.asarray(getattr(self, name), dtype=np.float64))
        self.sample_rate = int(self.sample_rate)
        self.fft_size = int(self.fft_size)
        self.frame_period_ms = float(self.frame_period_ms)

    @property
    def n_frames(self) -> int:
        return self.f0.shape[0]

    @property
    def voiced(self) -> np.ndarray:
        return self.f0 > 0

    def copy(self) -> "ProsodicFeatures":
        return self.replace()

    def replace(self, **changes) -> "ProsodicFeatures":
        kw = {name: getattr(self, name).copy() for name in self._fields}
        kw.update(frame_period_ms=self.frame_period_ms, sample_rate=self.sample_rate,
                  fft_size=self.fft_size)
        kw.update(changes)
        return ProsodicFeatures(**kw)

    def validate(self, cfg: AnalysisConfig | None = None) -> None:
        """Raise InvariantViolation if any type invariant fails."""
        n = self.n_frames
        n_bins = self.fft_size // 2 + 1
        if n < 1:
            raise InvariantViolation("feature set has no frames")
        for name in ("periodicity", "energy"):
            if getattr(self, name).shape != (n,):
                raise InvariantViolation(f"{name} length differs from f0 length {n}")
        for name in ("sp", "ap"):
            if getattr(self, name).shape != (n, n_bins):
                raise InvariantViolation(f"{name} must have shape ({n}, {n_bins})")
        for name in self._fields:
            if not np.all(np.isfinite(getattr(self, name))):
                raise InvariantViolation(f"{name} contains NaN or Inf")
        if np.any(self.f0 < 0):
            raise InvariantViolation("negative f0")
        if cfg is not None:
            v = self.f0[self.voiced]
            if np.any(v < cfg.f0_floor) or np.any(v > cfg.f0_ceil):
                raise InvariantViolation("voiced f0 outside [f0_floor, f0_ceil]")
        if np.any(self.sp < 0) or np.any(self.energy < 0):
            raise InvariantViolation("negative sp or energy")
        if np.any(self.ap < 0) or np.any(self.ap > 1):
            raise InvariantViolation("ap outside [0, 1]")
        if np.any(self.ap[~self.voiced] != 1.0):
            raise InvariantViolation("unvoiced frame with ap != 1")

    def to_dict(self) -> dict:
        return {
            "f0": self.f0.tolist(),
            "periodicity": self.periodicity.tolist(),
            "energy": self.energy.tolist(),
            "sp": self.sp.tolist(),
            "ap": self.ap.tolist(),
            "frame_period_ms": self.frame_period_ms,
            "sample_rate": self.sample_rate,
            "fft_size": self.fft_size,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ProsodicFeatures":
        n_bins = int(d["fft_size"]) // 2 + 1
        sp = np.asarray(d["sp"], dtype=np.float64).reshape(-1, n_bins)
        ap = np.asarray(d["ap"], dtype=np.float64).reshape(-1, n_bins)
        return cls(f0=d["f0"], periodicity=d["periodicity"], sp=sp, ap=ap,
                   energy=d["energy"], frame_period_ms=d["frame_period_ms"],
                   sample_rate=d["sample_rate"], fft_size=d["fft_size"])


def save_features(path, f: ProsodicFeatures) -> None:
    # json writes floats with repr(), i.e. 17 significant digits
    try:
        with open(os.fspath(path), "w") as fh:
            json.dump(f.to_dict(), fh)
    except OSError as exc:
        raise IoFailure(f"cannot write {path}: {exc}") from exc


def load_features(path) -> ProsodicFeatures:
    with open(os.fspath(path)) as fh:
        return ProsodicFeatures.from_dict(json.load(fh))


def frame_count(n_samples: int, sample_rate: int, cfg: AnalysisConfig) -> int:
    """N = floor(duration_ms / frame_period_ms)."""
    duration_ms = n_samples * 1000.0 / sample_rate
    return int(math.floor(duration_ms / cfg.frame_period_ms + 1e-9))


def frame_centers(n_frames: int, sample_rate: int, cfg: AnalysisConfig) -> np.ndarray:
    return np.round(np.arange(n_frames) * cfg.hop(sample_rate)).astype(np.int64)


def _checked_frames(audio: AudioBuffer, cfg: AnalysisConfig) -> int:
    cfg.check(audio.sample_rate)
    n = frame_count(len(audio), audio.sample_rate, cfg)
    if n < 1:
        raise BufferTooShort(
            f"{len(audio)} samples is shorter than one {cfg.frame_period_ms} ms frame")
    return n


def _windowed_frames(x: np.ndarray, centers: np.ndarray, length: int) -> np.ndarray:
    """Hann-windowed frames of ``length`` centered on ``centers``, zero-padded."""
    half = length // 2
    padded = np.pad(x, (half, half + length))
    idx = centers[:, None] + np.arange(length)[None, :]
    return padded[idx] * hann(length)[None, :]


def hann(length: int) -> np.ndarray:
    """Periodic Hann window."""
    return 0.5 - 0.5 * np.cos(2.0 * np.pi * np.arange(length) / length)


def estimate_f0(audio: AudioBuffer, cfg: AnalysisConfig = AnalysisConfig()):
    """Normalized cross-correlation pitch tracker.

    Returns ``(f0, periodicity)``; f0 is 0.0 on unvoiced frames.
    """
    n = _checked_frames(audio, cfg)
    sr = audio.sample_rate
    min_lag = max(2, int(math.floor(sr / cfg.f0_ceil)))
    max_lag = int(math.ceil(sr / cfg.f0_floor))
    int_len = max_lag
    span = int_len + max_lag
    centers = frame_centers(n, sr, cfg)
    x = np.pad(audio.samples, (span, span))
    # keep edge windows inside the signal when it is long enough
    starts = np.clip(centers - span // 2, 0, max(0, len(audio) - span)) + span
    r = _kernels.nccf(np.ascontiguousarray(x), np.ascontiguousarray(starts),
                      int_len, min_lag, max_lag)

    seg_idx = starts[:, None] + np.arange(span)[None, :]
    rms = np.sqrt(np.mean(x[seg_idx] ** 2, axis=1))

    f0 = np.zeros(n)
    periodicity = np.zeros(n)
    for i in range(n):
        row = r[i]
        inner = row[min_lag + 1:max_lag]
        left = row[min_lag:max_lag - 1]
        right = row[min_lag + 2:max_lag + 1]
        peaks = np.flatnonzero((inner >= left) & (inner > right)) + min_lag + 1
        if peaks.size == 0:
            periodicity[i] = min(max(row[min_lag:].max(), 0.0), 1.0)
            continue
        best = row[peaks].max()
        lag = peaks[row[peaks] >= OCTAVE_RATIO * best][0] if best > 0 else peaks[0]
        a, b, c = row[lag - 1], row[lag], row[lag + 1]
        denom = a - 2.0 * b + c
        delta = 0.5 * (a - c) / denom if denom < 0 else 0.0
        peak = b - 0.25 * (a - c) * delta
        periodicity[i] = min(max(peak, 0.0), 1.0)
        freq = sr / (lag + delta)
        if (peak >= VOICING_THRESHOLD and rms[i] >= SILENCE_RMS
                and cfg.f0_floor <= freq <= cfg.f0_ceil):
            f0[i] = freq
    return f0, periodicity


def frame_energy(audio: AudioBuffer, cfg: AnalysisConfig = AnalysisConfig()) -> np.ndarray:
    """RMS of a Hann-windowed 2*hop frame centered on each frame instant."""
    n = _checked_frames(audio, cfg)
    sr = audio.sample_rate
    length = max(2, int(round(2 * cfg.hop(sr))))
    frames = _windowed_frames(audio.samples, frame_centers(n, sr, cfg), length)
    return np.sqrt(np.mean(frames ** 2, axis=1))


def smoothing_width_bins(f0: np.ndarray, sample_rate: int, cfg: AnalysisConfig) -> np.ndarray:
    """Moving-average width in (fractional) bins for max(f0, f0_floor) Hz."""
    return np.maximum(f0, cfg.f0_floor) * cfg.fft_size / sample_rate


def box_smooth(power: np.ndarray, widths: np.ndarray) -> np.ndarray:
    """Centered moving average with a fractional width per row.

    Bin ``k`` covers ``[k, k + 1)``; the average integrates the piecewise
    constant spectrum over ``[k + 0.5 - w/2, k + 0.5 + w/2)``, reflecting at
    both ends so the total is preserved away from the edges.
    """
    n_rows, n_bins = power.shape
    widths = np.maximum(np.asarray(widths, dtype=np.float64), 1.0)
    pad = int(np.ceil(widths.max() / 2)) + 1
    padded = np.pad(power, ((0, 0), (pad, pad)), mode="symmetric")
    cum = np.concatenate([np.zeros((n_rows, 1)), np.cumsum(padded, axis=1)], axis=1)

    def integral(x):
        i = np.floor(x).astype(np.int64)
        frac = x - i
        rows = np.arange(n_rows)[:, None]
        return cum[rows, i] + frac * padded[rows, np.minimum(i, padded.shape[1] - 1)]

    center = np.arange(n_bins)[None, :] + pad + 0.5
    half = widths[:, None] / 2.0
    return (integral(center + half) - integral(center - half)) / widths[:, None]


def spectral_envelope(audio: AudioBuffer, f0, cfg: AnalysisConfig = AnalysisConfig()) -> np.ndarray:
    """Per-frame power spectrum smoothed over one harmonic spacing.

    Power is ``|FFT(hann * frame)|^2 / fft_size``; the moving average spans
    ``max(f0, f0_floor)`` Hz so harmonic ripple is flattened.
    """
    n = _checked_frames(audio, cfg)
    f0 = np.asarray(f0, dtype=np.float64)
    if f0.shape != (n,):
        raise FrameMismatch(f"f0 has {f0.shape[0]} frames, expected {n}")
    sr = audio.sample_rate
    frames = _windowed_frames(audio.samples, frame_centers(n, sr, cfg), cfg.fft_size)
    power = np.abs(np.fft.rfft(frames, axis=1)) ** 2 / cfg.fft_size
    sp = box_smooth(power, smoothing_width_bins(f0, sr, cfg))
    return np.maximum(sp, SP_FLOOR)


def aperiodicity(audio: AudioBuffer, f0, periodicity, cfg: AnalysisConfig = AnalysisConfig()) -> np.ndarray:
    """Band-constant aperiodicity from the voicing confidence."""
    n = _checked_frames(audio, cfg)
    f0 = np.asarray(f0, dtype=np.float64)
    periodicity = np.asarray(periodicity, dtype=np.float64)
    if f0.shape != (n,) or periodicity.shape != (n,):
        raise FrameMismatch(f"tracks must have {n} frames")
    level = np.where(f0 > 0, np.clip(1.0 - periodicity, AP_MIN, 1.0), 1.0)
    return np.repeat(level[:, None], cfg.fft_size // 2 + 1, axis=1)


def extract_features(audio: AudioBuffer, cfg: AnalysisConfig = AnalysisConfig()) -> ProsodicFeatures:
    f0, per = estimate_f0(audio, cfg)
    return ProsodicFeatures(
        f0=f0,
        periodicity=per,
        sp=spectral_envelope(audio, f0, cfg),
        ap=aperiodicity(audio, f0, per, cfg),
        energy=frame_energy(audio, cfg),
        frame_period_ms=cfg.frame_period_ms,
        sample_rate=audio.sample_rate,
        fft_size=cfg.fft_size,
    )


def extract_features_for_comparison(audio: AudioBuffer, cfg: AnalysisConfig = AnalysisConfig()):
    """Only the tracks the comparison needs: ``(f0, energy)``."""
    f0, _ = estimate_f0(audio, cfg)
    return f0, frame_energy(audio, cfg)
