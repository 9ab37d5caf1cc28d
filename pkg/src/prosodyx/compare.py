"""Discrepancy metrics between a human and a TTS feature set."""
from __future__ import annotations

import json
import os
from dataclasses import asdict, dataclass

import numpy as np

from .errors import ConfigMismatch, IoFailure, NoVoicedFrames, SilentInput
from .features import SILENCE_RMS, ProsodicFeatures

MIN_MEAN_ENERGY = 1e-10


@dataclass(frozen=True)
class ComparisonReport:
    pitch_diff_hz: float
    duration_ratio: float
    energy_ratio: float
    voiced_frames_human: int
    voiced_frames_tts: int
    aligned_f0_rmse_hz: float

    @property
    def discrepancies(self) -> tuple[float, float, float]:
        """``(pitch_diff_hz, duration_ratio, energy_ratio)``."""
        return self.pitch_diff_hz, self.duration_ratio, self.energy_ratio

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "ComparisonReport":
        return cls(
            pitch_diff_hz=float(d["pitch_diff_hz"]),
            duration_ratio=float(d["duration_ratio"]),
            energy_ratio=float(d["energy_ratio"]),
            voiced_frames_human=int(d["voiced_frames_human"]),
            voiced_frames_tts=int(d["voiced_frames_tts"]),
            aligned_f0_rmse_hz=float(d["aligned_f0_rmse_hz"]),
        )


def save_report(path, report: ComparisonReport) -> None:
    try:
        with open(os.fspath(path), "w") as fh:
            json.dump(report.to_dict(), fh, indent=2)
    except OSError as exc:
        raise IoFailure(f"cannot write {path}: {exc}") from exc


def _interp_positions(n_src: int, n_dst: int) -> np.ndarray:
    if n_dst == 1 or n_src == 1:
        return np.zeros(n_dst)
    return np.arange(n_dst) * ((n_src - 1) / (n_dst - 1))


def align_length(f: ProsodicFeatures, target_frames: int) -> ProsodicFeatures:
    """Linearly stretch every track to ``target_frames``.

    Voicing is carried by the nearest source frame; F0 is only interpolated
    between two voiced frames, never across a voiced/unvoiced boundary.
    """
    target_frames = int(target_frames)
    if target_frames < 1:
        raise ValueError(f"target_frames must be >= 1, got {target_frames}")
    n = f.n_frames
    if target_frames == n:
        return f.copy()

    pos = _interp_positions(n, target_frames)
    lo = np.floor(pos).astype(np.int64)
    hi = np.minimum(lo + 1, n - 1)
    frac = pos - lo
    near = np.minimum(np.floor(pos + 0.5).astype(np.int64), n - 1)

    def lerp(track):
        if track.ndim == 2:
            return track[lo] * (1.0 - frac)[:, None] + track[hi] * frac[:, None]
        return track[lo] * (1.0 - frac) + track[hi] * frac

    voiced = f.voiced
    out_voiced = voiced[near]
    both = voiced[lo] & voiced[hi]
    f0 = np.where(both, lerp(f.f0), f.f0[near])
    f0 = np.where(out_voiced, f0, 0.0)

    ap = lerp(f.ap)
    ap[~out_voiced] = 1.0
    return f.replace(f0=f0, periodicity=lerp(f.periodicity), sp=lerp(f.sp), ap=ap,
                     energy=lerp(f.energy))


def _mean_voiced_f0(f: ProsodicFeatures, label: str) -> float:
    v = f.f0[f.voiced]
    if v.size == 0:
        raise NoVoicedFrames(f"{label} features contain no voiced frames")
    return float(v.mean())


def _mean_power(f: ProsodicFeatures, label: str) -> float:
    if f.energy.mean() < MIN_MEAN_ENERGY:
        raise SilentInput(f"{label} mean energy is below {MIN_MEAN_ENERGY}")
    return float(np.mean(f.energy ** 2))


def compare_features(human: ProsodicFeatures, tts: ProsodicFeatures) -> ComparisonReport:
    """Pitch difference (Hz), duration ratio and energy ratio, human over TTS.

    The energy ratio compares mean frame power (squared RMS), so it lives in
    the same domain as the spectral-envelope scale applied during
    manipulation.
    """
    if (human.frame_period_ms != tts.frame_period_ms
            or human.sample_rate != tts.sample_rate):
        raise ConfigMismatch(
            f"frame period / sample rate differ: "
            f"{human.frame_period_ms} ms @ {human.sample_rate} Hz vs "
            f"{tts.frame_period_ms} ms @ {tts.sample_rate} Hz")
    pitch_diff = _mean_voiced_f0(human, "human") - _mean_voiced_f0(tts, "tts")
    energy_ratio = _mean_power(human, "human") / _mean_power(tts, "tts")

    aligned = align_length(tts, human.n_frames)
    common = human.voiced & aligned.voiced
    if common.any():
        rmse = float(np.sqrt(np.mean((human.f0[common] - aligned.f0[common]) ** 2)))
    else:
        rmse = 0.0

    return ComparisonReport(
        pitch_diff_hz=float(pitch_diff),
        duration_ratio=human.n_frames / tts.n_frames,
        energy_ratio=float(energy_ratio),
        voiced_frames_human=int(human.voiced.sum()),
        voiced_frames_tts=int(tts.voiced.sum()),
        aligned_f0_rmse_hz=rmse,
    )


@dataclass(frozen=True)
class NormalizedSummary:
    mean_log_f0: float
    std_log_f0: float
    mean_log_energy: float
    std_log_energy: float


def normalize_for_loss(f: ProsodicFeatures) -> NormalizedSummary:
    """Log-domain mean/std of voiced F0 and of non-silent frame energy."""
    f0 = f.f0[f.voiced]
    if f0.size == 0:
        raise NoVoicedFrames("no voiced frames to normalize")
    energy = f.energy[f.energy >= SILENCE_RMS]
    if energy.size == 0:
        raise SilentInput("no frame above the silence gate")
    log_f0 = np.log(f0)
    log_e = np.log(energy)
    return NormalizedSummary(
        mean_log_f0=float(log_f0.mean()),
        std_log_f0=float(log_f0.std()) if np.ptp(log_f0) > 0 else 0.0,
        mean_log_energy=float(log_e.mean()),
        std_log_energy=float(log_e.std()) if np.ptp(log_e) > 0 else 0.0,
    )
