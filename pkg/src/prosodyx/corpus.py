"""Paired human/TTS corpora: manifest loading, stress annotations and a
synthetic fixture generator."""
from __future__ import annotations

import csv
import json
import os
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.signal import lfilter

from .audio_io import AudioBuffer, write_wav
from .errors import (BrokenPairing, DuplicateId, HeaderMismatch, InvariantViolation,
                     IoFailure, MissingFile, RowArity, SchemaViolation)

ANNOTATION_HEADER = ["filename", "word_count", "label_count", "correct_count", "word_labels"]
LABEL_SEP = "|"

# /a/-like resonances: (center Hz, bandwidth Hz)
FORMANTS = ((730.0, 90.0), (1090.0, 110.0), (2440.0, 160.0))


@dataclass(frozen=True)
class PairEntry:
    id: str
    human_path: Path
    tts_path: Path
    annotation_id: str | None = None


@dataclass
class CorpusManifest:
    pairs: list[PairEntry]
    language_tag: str = ""
    annotations: list["StressAnnotation"] = field(default_factory=list)

    def __len__(self):
        return len(self.pairs)

    def to_dict(self, root=None) -> dict:
        def rel(p):
            return os.path.relpath(p, root) if root is not None else str(p)
        d = {"language_tag": self.language_tag, "pairs": []}
        for p in self.pairs:
            entry = {"id": p.id, "human_path": rel(p.human_path), "tts_path": rel(p.tts_path)}
            if p.annotation_id is not None:
                entry["annotation_id"] = p.annotation_id
            d["pairs"].append(entry)
        return d


@dataclass(frozen=True)
class StressAnnotation:
    filename: str
    word_count: int
    label_count: int
    correct_count: int
    word_labels: tuple[str, ...] = ()

    def __post_init__(self):
        for name in ("word_count", "label_count", "correct_count"):
            if getattr(self, name) < 0:
                raise InvariantViolation(f"{self.filename}: negative {name}")
        if self.correct_count > self.label_count:
            raise InvariantViolation(
                f"{self.filename}: correct_count {self.correct_count} exceeds "
                f"label_count {self.label_count}")
        if self.word_labels and len(self.word_labels) != self.word_count:
            raise InvariantViolation(
                f"{self.filename}: {len(self.word_labels)} labels for "
                f"{self.word_count} words")


def _require(cond, msg):
    if not cond:
        raise SchemaViolation(msg)


def validate_manifest(manifest: CorpusManifest) -> None:
    seen_ids = set()
    seen_paths = {}
    for p in manifest.pairs:
        if p.id in seen_ids:
            raise DuplicateId(f"duplicate pair id {p.id!r}")
        seen_ids.add(p.id)
        for path in (p.human_path, p.tts_path):
            key = os.path.realpath(path)
            if key in seen_paths:
                raise BrokenPairing(
                    f"{path} is used by pair {seen_paths[key]!r} and pair {p.id!r}")
            seen_paths[key] = p.id
    for p in manifest.pairs:
        for path in (p.human_path, p.tts_path):
            if not os.path.isfile(path):
                raise MissingFile(f"pair {p.id!r}: missing file {path}")


def load_manifest(path) -> CorpusManifest:
    """Load and eagerly validate a manifest; relative paths resolve against
    the manifest's directory."""
    path = Path(path)
    if not path.is_file():
        raise MissingFile(f"no such manifest: {path}")
    try:
        data = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise SchemaViolation(f"{path}: invalid JSON ({exc})") from exc
    root = path.parent

    _require(isinstance(data, dict), "manifest must be a JSON object")
    _require(isinstance(data.get("pairs"), list), "manifest needs a 'pairs' list")
    tag = data.get("language_tag", "")
    _require(isinstance(tag, str), "language_tag must be a string")

    pairs = []
    for i, item in enumerate(data["pairs"]):
        _require(isinstance(item, dict), f"pairs[{i}] must be an object")
        for key in ("id", "human_path", "tts_path"):
            _require(isinstance(item.get(key), str) and item[key],
                     f"pairs[{i}].{key} must be a non-empty string")
        ann = item.get("annotation_id")
        _require(ann is None or isinstance(ann, str), f"pairs[{i}].annotation_id must be a string")
        pairs.append(PairEntry(item["id"], root / item["human_path"], root / item["tts_path"], ann))

    annotations = []
    if data.get("annotations") is not None:
        _require(isinstance(data["annotations"], str), "annotations must be a CSV path")
        annotations = load_annotations(root / data["annotations"])

    manifest = CorpusManifest(pairs, tag, annotations)
    validate_manifest(manifest)
    return manifest


def save_manifest(path, manifest: CorpusManifest, annotations_file: str | None = None) -> None:
    path = Path(path)
    d = manifest.to_dict(root=path.parent)
    if annotations_file is not None:
        d["annotations"] = annotations_file
    try:
        path.write_text(json.dumps(d, indent=2))
    except OSError as exc:
        raise IoFailure(f"cannot write {path}: {exc}") from exc


def _parse_count(value: str, name: str, lineno: int) -> int:
    try:
        return int(value)
    except ValueError:
        raise InvariantViolation(f"line {lineno}: {name} {value!r} is not an integer") from None


def load_annotations(path) -> list[StressAnnotation]:
    """Parse the stress-annotation CSV (labels are ``|``-separated)."""
    path = Path(path)
    if not path.is_file():
        raise MissingFile(f"no such annotation file: {path}")
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header] != ANNOTATION_HEADER:
            raise HeaderMismatch(f"{path}: expected header {','.join(ANNOTATION_HEADER)}")
        rows = []
        for row in reader:
            if not row:
                continue
            if len(row) != len(ANNOTATION_HEADER):
                raise RowArity(
                    f"{path}:{reader.line_num}: expected {len(ANNOTATION_HEADER)} fields, got {len(row)}")
            name, wc, lc, cc, labels = row
            n = reader.line_num
            rows.append(StressAnnotation(
                filename=name,
                word_count=_parse_count(wc, "word_count", n),
                label_count=_parse_count(lc, "label_count", n),
                correct_count=_parse_count(cc, "correct_count", n),
                word_labels=tuple(labels.split(LABEL_SEP)) if labels else (),
            ))
    return rows


def save_annotations(path, annotations) -> None:
    try:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(ANNOTATION_HEADER)
            for a in annotations:
                w.writerow([a.filename, a.word_count, a.label_count, a.correct_count,
                            LABEL_SEP.join(a.word_labels)])
    except OSError as exc:
        raise IoFailure(f"cannot write {path}: {exc}") from exc


@dataclass(frozen=True)
class FixtureSpec:
    """Injected discrepancies, TTS relative to human.

    The TTS copy is detuned by ``-pitch_offset_hz``, stretched in time by
    ``duration_factor`` and has ``energy_factor`` times the human power.
    """
    n_pairs: int = 8
    pitch_offset_hz: float = 30.0
    duration_factor: float = 1.0 / 0.85
    energy_factor: float = 0.8
    duration_s: float = 1.0
    sample_rate: int = 16000
    f0_range: tuple[float, float] = (150.0, 300.0)
    rms: float = 0.1
    language_tag: str = "FIX"


def resonator_filter(x: np.ndarray, sample_rate: int, formants=FORMANTS) -> np.ndarray:
    """Cascade of two-pole resonators with unit gain at DC."""
    y = x
    for freq, bw in formants:
        r = np.exp(-np.pi * bw / sample_rate)
        a = [1.0, -2.0 * r * np.cos(2 * np.pi * freq / sample_rate), r * r]
        y = lfilter([sum(a)], a, y)
    return y


def vowel(f0_track: np.ndarray, sample_rate: int) -> np.ndarray:
    """Band-limited sawtooth following a per-sample F0 track, through the
    fixed resonator cascade."""
    cycles = np.cumsum(f0_track) / sample_rate
    phase = 2.0 * np.pi * (cycles - np.floor(cycles))
    n_harm = int((sample_rate / 2.0) // f0_track.max())
    src = np.zeros_like(f0_track)
    for k in range(1, n_harm + 1):
        src += np.sin(k * phase) / k
    return resonator_filter(src, sample_rate)


def _contour(base: float, t: np.ndarray, total: float, phase: float) -> np.ndarray:
    # gentle declination plus a slow wobble; keeps F0 off the hop grid
    return base * (1.0 + 0.04 * (0.5 - t / total) + 0.03 * np.sin(2 * np.pi * 1.7 * t + phase))


def _fade(x: np.ndarray, sample_rate: int, ms: float = 10.0) -> np.ndarray:
    n = min(int(sample_rate * ms / 1000.0), x.shape[0] // 2)
    ramp = np.linspace(0.0, 1.0, n, endpoint=False)
    x = x.copy()
    x[:n] *= ramp
    x[x.shape[0] - n:] *= ramp[::-1]
    return x


def fixture_pair(base_f0: float, phase: float, spec: FixtureSpec) -> tuple[np.ndarray, np.ndarray]:
    """Synthesize one (human, tts) pair of sample arrays."""
    sr = spec.sample_rate
    n_h = int(round(spec.duration_s * sr))
    n_t = int(round(spec.duration_s * spec.duration_factor * sr))
    t_h = np.arange(n_h) / sr
    f0_h = _contour(base_f0, t_h, spec.duration_s, phase)
    # the TTS contour is the human one stretched in time, then detuned
    t_t = np.arange(n_t) / sr / spec.duration_factor
    f0_t = _contour(base_f0, t_t, spec.duration_s, phase) - spec.pitch_offset_hz

    human = _fade(vowel(f0_h, sr), sr)
    tts = _fade(vowel(f0_t, sr), sr)
    human *= spec.rms / np.sqrt(np.mean(human ** 2))
    tts *= spec.rms * np.sqrt(spec.energy_factor) / np.sqrt(np.mean(tts ** 2))
    return human, tts


def generate_fixture_corpus(out_dir, seed: int = 0, spec: FixtureSpec = FixtureSpec()) -> CorpusManifest:
    """Write ``spec.n_pairs`` synthetic pairs plus ``manifest.json`` and
    ``annotations.csv`` under ``out_dir``."""
    out = Path(out_dir)
    try:
        (out / "human").mkdir(parents=True, exist_ok=True)
        (out / "tts").mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise IoFailure(f"cannot create {out}: {exc}") from exc
    rng = np.random.default_rng(seed)
    lo, hi = spec.f0_range
    pairs, annotations = [], []
    for i in range(spec.n_pairs):
        base = rng.uniform(lo, hi)
        phase = rng.uniform(0.0, 2 * np.pi)
        human, tts = fixture_pair(base, phase, spec)
        pid = f"pair_{i:02d}"
        h_path, t_path = out / "human" / f"{pid}.wav", out / "tts" / f"{pid}.wav"
        write_wav(h_path, AudioBuffer(human, spec.sample_rate))
        write_wav(t_path, AudioBuffer(tts, spec.sample_rate))
        pairs.append(PairEntry(pid, h_path, t_path, f"{pid}.wav"))
        annotations.append(StressAnnotation(f"{pid}.wav", 1, 1, 1, ("HIGH",)))
    manifest = CorpusManifest(pairs, spec.language_tag, annotations)
    save_annotations(out / "annotations.csv", annotations)
    save_manifest(out / "manifest.json", manifest, annotations_file="annotations.csv")
    return manifest
