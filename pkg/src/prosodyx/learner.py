"""Corpus-level fitting of the (pitch shift, duration ratio, energy scale)
corrector by full-batch gradient descent, plus an exhaustive-search oracle.

Per pair the loss is::

    w_p * ((pitch_diff - shift) / f0_scale)**2
  + w_d * (duration_ratio / dur - 1)**2
  + w_e * (energy_ratio / energy - 1)**2

Ratios are updated multiplicatively (log domain) so they stay positive; the
pitch shift is stepped in units of ``f0_scale``.
"""
from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass, field

import numpy as np

from .compare import ComparisonReport
from .errors import BoundsViolation, DegenerateGrid, EmptyBatch, EmptyCorpus, IoFailure
from .manipulate import ManipulationParams


@dataclass(frozen=True)
class LossWeights:
    pitch: float = 1.0
    duration: float = 1.0
    energy: float = 1.0

    def __post_init__(self):
        w = (self.pitch, self.duration, self.energy)
        if any(x < 0 for x in w) or not any(x > 0 for x in w):
            raise ValueError(f"weights must be nonnegative with one positive, got {w}")

    def to_dict(self) -> dict:
        return {"pitch": self.pitch, "duration": self.duration, "energy": self.energy}


@dataclass(frozen=True)
class TrainingConfig:
    epochs: int = 5
    learning_rate: float = 0.05
    weights: LossWeights = field(default_factory=LossWeights)
    f0_scale: float = 100.0
    steps_per_epoch: int = 20

    def __post_init__(self):
        if self.epochs < 1 or self.steps_per_epoch < 1:
            raise ValueError("epochs and steps_per_epoch must be >= 1")
        if not self.learning_rate > 0:
            raise ValueError("learning_rate must be positive")
        if not self.f0_scale > 0:
            raise ValueError("f0_scale must be positive")


@dataclass(frozen=True)
class EpochStats:
    epoch: int
    avg_loss: float


def _theta(params) -> tuple[float, float, float]:
    if isinstance(params, ManipulationParams):
        return params.as_tuple()
    shift, dur, energy = params
    return float(shift), float(dur), float(energy)


def _check_positive(dur, energy):
    if not dur > 0 or not energy > 0:
        raise BoundsViolation(f"duration and energy parameters must be positive, got {dur}, {energy}")


def pair_loss(params, report: ComparisonReport, w: LossWeights = LossWeights(),
              f0_scale: float = 100.0) -> float:
    shift, dur, energy = _theta(params)
    _check_positive(dur, energy)
    pitch, d_ratio, e_ratio = report.discrepancies
    return (w.pitch * ((pitch - shift) / f0_scale) ** 2
            + w.duration * (d_ratio / dur - 1.0) ** 2
            + w.energy * (e_ratio / energy - 1.0) ** 2)


def loss_gradient(params, report: ComparisonReport, w: LossWeights = LossWeights(),
                  f0_scale: float = 100.0) -> np.ndarray:
    """Analytic partial derivatives of ``pair_loss`` in (shift, dur, energy)."""
    shift, dur, energy = _theta(params)
    _check_positive(dur, energy)
    pitch, d_ratio, e_ratio = report.discrepancies
    return np.array([
        -2.0 * w.pitch * (pitch - shift) / f0_scale ** 2,
        -2.0 * w.duration * (d_ratio / dur - 1.0) * d_ratio / dur ** 2,
        -2.0 * w.energy * (e_ratio / energy - 1.0) * e_ratio / energy ** 2,
    ])


def corpus_loss(params, reports, w: LossWeights = LossWeights(), f0_scale: float = 100.0) -> float:
    return float(np.mean([pair_loss(params, r, w, f0_scale) for r in reports]))


def train_step(params, batch, lr: float, w: LossWeights = LossWeights(),
               f0_scale: float = 100.0) -> tuple[ManipulationParams, float]:
    """One full-batch update; returns the new params and the pre-update loss."""
    if not batch:
        raise EmptyBatch("train_step needs at least one report")
    shift, dur, energy = _theta(params)
    loss = corpus_loss((shift, dur, energy), batch, w, f0_scale)
    g = np.mean([loss_gradient((shift, dur, energy), r, w, f0_scale) for r in batch], axis=0)
    shift = shift - lr * f0_scale ** 2 * g[0]
    # d/dlog(theta) = theta * d/dtheta
    dur = dur * math.exp(-lr * dur * g[1])
    energy = energy * math.exp(-lr * energy * g[2])
    return ManipulationParams(shift, dur, energy), loss


def train_model(reports, cfg: TrainingConfig = TrainingConfig(),
                init: ManipulationParams | None = None):
    """Gradient descent from the identity; returns ``(params, [EpochStats])``.

    An epoch is ``cfg.steps_per_epoch`` full-batch steps and reports the mean
    pre-update loss over those steps.
    """
    reports = list(reports)
    if not reports:
        raise EmptyCorpus("cannot train on an empty corpus")
    params = init or ManipulationParams.identity()
    history = []
    for epoch in range(1, cfg.epochs + 1):
        losses = []
        for _ in range(cfg.steps_per_epoch):
            params, loss = train_step(params, reports, cfg.learning_rate,
                                      cfg.weights, cfg.f0_scale)
            losses.append(loss)
        history.append(EpochStats(epoch, float(np.mean(losses))))
    return params, history


@dataclass(frozen=True)
class GridSpec:
    """Search box and resolution for ``brute_force_optimum``."""
    pitch_range: tuple[float, float] | None = None
    duration_range: tuple[float, float] | None = None
    energy_range: tuple[float, float] | None = None
    points: int = 41
    resolution: float = 1e-4


def _auto_range(values, positive: bool) -> tuple[float, float]:
    lo, hi = float(min(values)), float(max(values))
    pad = max(0.25 * (hi - lo), 0.1 * max(abs(lo), abs(hi)), 1.0 if not positive else 0.05)
    lo, hi = lo - pad, hi + pad
    if positive:
        lo = max(lo, 1e-3)
    return lo, hi


def brute_force_optimum(reports, w: LossWeights = LossWeights(), f0_scale: float = 100.0,
                        grid: GridSpec = GridSpec()) -> ManipulationParams:
    """Exhaustive grid search over all three parameters, then coordinate-wise
    bracket shrinking until every bracket is narrower than the resolution.

    Uses only loss evaluations, never the gradient.
    """
    reports = list(reports)
    if not reports:
        raise EmptyCorpus("no reports to optimize over")
    disc = np.array([r.discrepancies for r in reports])
    ranges = [
        grid.pitch_range or _auto_range(disc[:, 0], positive=False),
        grid.duration_range or _auto_range(disc[:, 1], positive=True),
        grid.energy_range or _auto_range(disc[:, 2], positive=True),
    ]
    if grid.points < 3:
        raise DegenerateGrid("need at least 3 grid points per axis")
    for lo, hi in ranges:
        if not hi > lo:
            raise DegenerateGrid(f"empty search interval [{lo}, {hi}]")
    if not ranges[1][0] > 0 or not ranges[2][0] > 0:
        raise DegenerateGrid("ratio search intervals must be positive")

    weights = np.array([w.pitch, w.duration, w.energy])

    def loss_at(shift, dur, energy):
        # broadcasting over any grid shape; mean over pairs on the last axis
        p = ((disc[:, 0] - shift[..., None]) / f0_scale) ** 2
        d = (disc[:, 1] / dur[..., None] - 1.0) ** 2
        e = (disc[:, 2] / energy[..., None] - 1.0) ** 2
        return np.mean(weights[0] * p + weights[1] * d + weights[2] * e, axis=-1)

    axes = [np.linspace(lo, hi, grid.points) for lo, hi in ranges]
    mesh = np.meshgrid(*axes, indexing="ij")
    vals = loss_at(*mesh)
    best_idx = np.unravel_index(np.argmin(vals), vals.shape)
    best = np.array([axes[k][best_idx[k]] for k in range(3)])
    step = np.array([(hi - lo) / (grid.points - 1) for lo, hi in ranges])

    lows = np.array([r[0] for r in ranges])
    highs = np.array([r[1] for r in ranges])
    while np.any(step > grid.resolution / 4):
        for k in range(3):
            lo = max(lows[k], best[k] - step[k])
            hi = min(highs[k], best[k] + step[k])
            cand = np.linspace(lo, hi, 11)
            pts = [np.full(cand.shape, best[j]) for j in range(3)]
            pts[k] = cand
            best[k] = cand[np.argmin(loss_at(*pts))]
            step[k] = (hi - lo) / 10
    return ManipulationParams(*best)


def save_model(path, params: ManipulationParams, cfg: TrainingConfig, history) -> None:
    d = params.to_dict()
    d.update(weights=cfg.weights.to_dict(), f0_scale=cfg.f0_scale,
             epochs_run=len(history),
             final_loss=history[-1].avg_loss if history else None)
    try:
        with open(os.fspath(path), "w") as fh:
            json.dump(d, fh, indent=2)
    except OSError as exc:
        raise IoFailure(f"cannot write {path}: {exc}") from exc


def load_model(path) -> dict:
    """Model JSON as a dict with ``params`` added as ManipulationParams."""
    with open(os.fspath(path)) as fh:
        d = json.load(fh)
    d["params"] = ManipulationParams.from_dict(d)
    return d


def save_history(path, history) -> None:
    try:
        with open(os.fspath(path), "w") as fh:
            fh.write("epoch,avg_loss\n")
            for s in history:
                fh.write(f"{s.epoch},{s.avg_loss!r}\n")
    except OSError as exc:
        raise IoFailure(f"cannot write {path}: {exc}") from exc
