"""Pitch shift, duration change and energy scaling of a feature set."""
from __future__ import annotations

import json
import os
from dataclasses import dataclass

import numpy as np

from .compare import align_length
from .errors import BoundsViolation, IoFailure
from .features import AnalysisConfig, ProsodicFeatures

DURATION_BOUNDS = (0.1, 10.0)
ENERGY_BOUNDS = (1e-4, 1e4)


def _check_duration(ratio: float) -> None:
    lo, hi = DURATION_BOUNDS
    if not lo < ratio < hi:
        raise BoundsViolation(f"duration_ratio {ratio} outside ({lo}, {hi})")


def _check_energy(scale: float) -> None:
    lo, hi = ENERGY_BOUNDS
    if not lo < scale < hi:
        raise BoundsViolation(f"energy_scale {scale} outside ({lo}, {hi})")


@dataclass(frozen=True)
class ManipulationParams:
    pitch_shift_hz: float = 0.0
    duration_ratio: float = 1.0
    energy_scale: float = 1.0

    def __post_init__(self):
        for name in ("pitch_shift_hz", "duration_ratio", "energy_scale"):
            object.__setattr__(self, name, float(getattr(self, name)))
        if not np.isfinite(self.pitch_shift_hz):
            raise BoundsViolation("pitch_shift_hz must be finite")
        _check_duration(self.duration_ratio)
        _check_energy(self.energy_scale)

    @classmethod
    def identity(cls) -> "ManipulationParams":
        return cls()

    def as_tuple(self) -> tuple[float, float, float]:
        return self.pitch_shift_hz, self.duration_ratio, self.energy_scale

    def to_dict(self) -> dict:
        return {"pitch_shift_hz": self.pitch_shift_hz,
                "duration_ratio": self.duration_ratio,
                "energy_scale": self.energy_scale}

    @classmethod
    def from_dict(cls, d: dict) -> "ManipulationParams":
        return cls(float(d["pitch_shift_hz"]), float(d["duration_ratio"]),
                   float(d["energy_scale"]))


def save_params(path, params: ManipulationParams) -> None:
    try:
        with open(os.fspath(path), "w") as fh:
            json.dump(params.to_dict(), fh, indent=2)
    except OSError as exc:
        raise IoFailure(f"cannot write {path}: {exc}") from exc


def load_params(path) -> ManipulationParams:
    with open(os.fspath(path)) as fh:
        return ManipulationParams.from_dict(json.load(fh))


def shift_pitch(f0, delta_hz: float, f0_floor: float = 71.0, f0_ceil: float = 800.0) -> np.ndarray:
    """Add ``delta_hz`` to voiced frames, clamped to the analysis range.

    Unvoiced frames stay at 0, so the voicing pattern never changes.
    """
    f0 = np.asarray(f0, dtype=np.float64)
    voiced = f0 > 0
    out = f0.copy()
    out[voiced] = np.clip(f0[voiced] + delta_hz, f0_floor, f0_ceil)
    return out


def shift_pitch_semitones(f0, semitones: float, f0_floor: float = 71.0,
                          f0_ceil: float = 800.0) -> np.ndarray:
    """Multiplicative shift; exposed on the CLI, not learned."""
    f0 = np.asarray(f0, dtype=np.float64)
    voiced = f0 > 0
    out = f0.copy()
    out[voiced] = np.clip(f0[voiced] * 2.0 ** (semitones / 12.0), f0_floor, f0_ceil)
    return out


def modify_duration(f: ProsodicFeatures, ratio: float) -> ProsodicFeatures:
    """Resample the frame grid to ``max(1, round(N * ratio))`` frames."""
    _check_duration(ratio)
    n_out = max(1, int(np.floor(f.n_frames * ratio + 0.5)))
    return align_length(f, n_out)


def scale_energy(sp, scale: float) -> np.ndarray:
    _check_energy(scale)
    return np.asarray(sp, dtype=np.float64) * scale


def manipulate_features(f: ProsodicFeatures, params: ManipulationParams,
                        cfg: AnalysisConfig = AnalysisConfig()) -> ProsodicFeatures:
    """Duration first, then pitch, then energy.

    The energy track is rescaled by ``sqrt(energy_scale)`` alongside the
    envelope so the returned features describe the louder signal.
    """
    out = modify_duration(f, params.duration_ratio)
    out.f0 = shift_pitch(out.f0, params.pitch_shift_hz, cfg.f0_floor, cfg.f0_ceil)
    out.sp = scale_energy(out.sp, params.energy_scale)
    out.energy = out.energy * np.sqrt(params.energy_scale)
    return out
