"""Command-line entry point: ``prosodyx <command> ...``.

Exit codes: 0 success, 1 usage error, 2 data or validation error,
3 internal error.  Diagnostics go to stderr, one line each.
"""
from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from .audio_io import AudioBuffer, load_canonical, resample, write_wav
from .compare import compare_features, save_report
from .corpus import FixtureSpec, generate_fixture_corpus, load_manifest
from .errors import ConfigMismatch, ProsodyError
from .features import AnalysisConfig, extract_features, load_features, save_features
from .learner import (LossWeights, TrainingConfig, brute_force_optimum, save_history, save_model,
                      load_model, train_model)
from .manipulate import ManipulationParams, manipulate_features, shift_pitch_semitones
from .synth import SynthConfig, synthesize

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_INTERNAL = 0, 1, 2, 3
VERIFY_TOL = 1e-3

SUMMARY_COLUMNS = [
    "id", "status",
    "pitch_diff_before", "duration_ratio_before", "energy_ratio_before",
    "pitch_diff_after", "duration_ratio_after", "energy_ratio_after",
    "error",
]
_METRIC_COLUMNS = SUMMARY_COLUMNS[2:8]


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _log(msg: str) -> None:
    print(f"prosodyx: {msg}", file=sys.stderr)


# -- library-level workflows ---------------------------------------------

def analyze_file(path, cfg: AnalysisConfig = AnalysisConfig()):
    return extract_features(load_canonical(path), cfg)


def compare_files(human_path, tts_path, cfg: AnalysisConfig = AnalysisConfig()):
    return compare_features(analyze_file(human_path, cfg), analyze_file(tts_path, cfg))


def corpus_reports(manifest, cfg: AnalysisConfig = AnalysisConfig()):
    return [compare_files(p.human_path, p.tts_path, cfg) for p in manifest.pairs]


def process_file_with_ml(tts_path, params: ManipulationParams, out_path=None, seed: int = 0,
                         semitones: float = 0.0, out_rate: int | None = None,
                         cfg: AnalysisConfig = AnalysisConfig()) -> AudioBuffer:
    """Analyze one TTS file, apply ``params`` and resynthesize it."""
    feats = manipulate_features(analyze_file(tts_path, cfg), params, cfg)
    if semitones:
        feats.f0 = shift_pitch_semitones(feats.f0, semitones, cfg.f0_floor, cfg.f0_ceil)
    out = synthesize(feats, SynthConfig(noise_seed=seed))
    if out_rate is not None and out_rate != out.sample_rate:
        out = resample(out, out_rate)
    if out_path is not None:
        write_wav(out_path, out)
    return out


def _process_pair(job):
    pid, human_path, tts_path, out_path, params, seed = job
    row = {"id": pid}
    try:
        human = analyze_file(human_path)
        tts = analyze_file(tts_path)
        before = compare_features(human, tts)
        out = synthesize(manipulate_features(tts, params), SynthConfig(noise_seed=seed))
        write_wav(out_path, out)
        after = compare_features(human, extract_features(out))
    except Exception as exc:
        row.update(status="failed", error=f"{type(exc).__name__}: {exc}")
        return row
    row.update(zip(_METRIC_COLUMNS, before.discrepancies + after.discrepancies))
    row.update(status="ok", error="")
    return row


def process_all_files_with_ml(manifest, params: ManipulationParams, out_dir, jobs: int = 1,
                              seed: int = 0) -> list[dict]:
    """Manipulate every TTS file of ``manifest`` into ``out_dir``.

    Failures are recorded per row (``status == "failed"``) instead of
    aborting the run.  Rows come back in manifest order.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    work = [(p.id, p.human_path, p.tts_path, out_dir / f"{p.id}.wav", params, seed)
            for p in manifest.pairs]
    if jobs > 1 and len(work) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(_process_pair, work))
    return [_process_pair(w) for w in work]


def summary_means(rows) -> dict:
    ok = [r for r in rows if r["status"] == "ok"]
    if not ok:
        return {c: math.nan for c in _METRIC_COLUMNS}
    return {c: float(np.mean([r[c] for r in ok])) for c in _METRIC_COLUMNS}


def write_summary(path, rows) -> None:
    means = summary_means(rows)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(SUMMARY_COLUMNS)
        for r in rows:
            w.writerow([r["id"], r["status"]]
                       + [repr(r[c]) if c in r else "" for c in _METRIC_COLUMNS]
                       + [r.get("error", "")])
        n_ok = sum(r["status"] == "ok" for r in rows)
        w.writerow(["MEAN", f"{n_ok}/{len(rows)}"] + [repr(means[c]) for c in _METRIC_COLUMNS] + [""])


def write_report_csvs(a, b, out_dir) -> tuple[Path, Path]:
    """Plot data for an F0 overlay and a mean spectral envelope overlay."""
    if a.sample_rate != b.sample_rate or a.fft_size != b.fft_size or a.frame_period_ms != b.frame_period_ms:
        raise ConfigMismatch("feature files were analyzed with different settings")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    f0_path = out_dir / "f0_comparison.csv"
    env_path = out_dir / "envelope_comparison.csv"

    with open(f0_path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["time_s", "f0_a_hz", "f0_b_hz"])
        for i in range(max(a.n_frames, b.n_frames)):
            fa = repr(float(a.f0[i])) if i < a.n_frames else ""
            fb = repr(float(b.f0[i])) if i < b.n_frames else ""
            w.writerow([repr(i * a.frame_period_ms / 1000.0), fa, fb])

    db_a = np.mean(10.0 * np.log10(a.sp), axis=0)
    db_b = np.mean(10.0 * np.log10(b.sp), axis=0)
    freqs = np.arange(db_a.shape[0]) * a.sample_rate / a.fft_size
    with open(env_path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["bin", "freq_hz", "sp_a_db", "sp_b_db"])
        for k in range(db_a.shape[0]):
            w.writerow([k, repr(float(freqs[k])), repr(float(db_a[k])), repr(float(db_b[k]))])
    return f0_path, env_path


# -- subcommands ----------------------------------------------------------

def _analysis_cfg(args) -> AnalysisConfig:
    try:
        return AnalysisConfig(frame_period_ms=args.frame_period, f0_floor=args.f0_floor,
                              f0_ceil=args.f0_ceil)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def cmd_analyze(args) -> int:
    feats = analyze_file(args.input, _analysis_cfg(args))
    save_features(args.out, feats)
    _log(f"{args.input}: {feats.n_frames} frames, {int(feats.voiced.sum())} voiced -> {args.out}")
    return EXIT_OK


def cmd_compare(args) -> int:
    report = compare_files(args.human, args.tts)
    save_report(args.out, report)
    _log("pitch_diff={:.3f} Hz duration_ratio={:.4f} energy_ratio={:.4f}".format(*report.discrepancies))
    return EXIT_OK


def _parse_weights(text: str) -> LossWeights:
    try:
        vals = [float(v) for v in text.split(",")]
    except ValueError:
        raise UsageError(f"--weights expects three numbers, got {text!r}") from None
    if len(vals) != 3:
        raise UsageError(f"--weights expects three numbers, got {text!r}")
    try:
        return LossWeights(*vals)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def cmd_train(args) -> int:
    weights = _parse_weights(args.weights)
    try:
        cfg = TrainingConfig(epochs=args.epochs, learning_rate=args.lr, weights=weights)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    reports = corpus_reports(load_manifest(args.manifest))
    params, history = train_model(reports, cfg)
    save_model(args.out, params, cfg, history)
    loss_csv = args.loss_csv or str(Path(args.out).with_suffix("")) + ".loss.csv"
    save_history(loss_csv, history)
    for s in history:
        _log(f"epoch {s.epoch}: avg_loss={s.avg_loss:.6g}")
    _log("params: pitch_shift_hz={:.4f} duration_ratio={:.5f} energy_scale={:.5f}".format(*params.as_tuple()))
    if args.verify:
        oracle = brute_force_optimum(reports, cfg.weights, cfg.f0_scale)
        gap = max(abs(x - y) for x, y in zip(params.as_tuple(), oracle.as_tuple()))
        _log(f"verify: max |trained - brute force| = {gap:.3g}")
        if gap > VERIFY_TOL:
            _log(f"error: VerificationFailed: gap {gap:.3g} exceeds {VERIFY_TOL} "
                 f"(train longer with --epochs)")
            return EXIT_DATA
    return EXIT_OK


def cmd_apply(args) -> int:
    params = load_model(args.model)["params"]
    out = process_file_with_ml(args.input, params, args.out, seed=args.seed,
                               semitones=args.semitones, out_rate=args.out_rate)
    _log(f"{args.input} -> {args.out} ({out.duration:.3f} s)")
    return EXIT_OK


def cmd_batch(args) -> int:
    if args.jobs < 1:
        raise UsageError("--jobs must be >= 1")
    params = load_model(args.model)["params"]
    manifest = load_manifest(args.manifest)
    rows = process_all_files_with_ml(manifest, params, args.out_dir, args.jobs, args.seed)
    summary = Path(args.out_dir) / "summary.csv"
    write_summary(summary, rows)
    failed = [r for r in rows if r["status"] != "ok"]
    for r in failed:
        _log(f"error: pair {r['id']}: {r['error']}")
    _log(f"{len(rows) - len(failed)}/{len(rows)} pairs processed -> {summary}")
    return EXIT_DATA if failed else EXIT_OK


def cmd_report(args) -> int:
    paths = write_report_csvs(load_features(args.features_a), load_features(args.features_b),
                              args.out_dir)
    _log("wrote " + ", ".join(str(p) for p in paths))
    return EXIT_OK


def cmd_fixture(args) -> int:
    if args.pairs < 1:
        raise UsageError("--pairs must be >= 1")
    manifest = generate_fixture_corpus(args.out_dir, seed=args.seed,
                                       spec=FixtureSpec(n_pairs=args.pairs))
    _log(f"wrote {len(manifest)} pairs to {args.out_dir}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="prosodyx", description="Prosody analysis, comparison and correction.")
    sub = p.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    a = sub.add_parser("analyze", help="extract features to JSON")
    a.add_argument("input")
    a.add_argument("--out", required=True)
    a.add_argument("--frame-period", type=float, default=5.0, help="hop in ms")
    a.add_argument("--f0-floor", type=float, default=71.0)
    a.add_argument("--f0-ceil", type=float, default=800.0)
    a.set_defaults(func=cmd_analyze)

    c = sub.add_parser("compare", help="discrepancy report for a human/TTS pair")
    c.add_argument("human")
    c.add_argument("tts")
    c.add_argument("--out", required=True)
    c.set_defaults(func=cmd_compare)

    t = sub.add_parser("train", help="fit manipulation parameters on a corpus")
    t.add_argument("manifest")
    t.add_argument("--out", required=True)
    t.add_argument("--epochs", type=int, default=TrainingConfig.epochs)
    t.add_argument("--lr", type=float, default=TrainingConfig.learning_rate)
    t.add_argument("--weights", default="1,1,1", help="pitch,duration,energy")
    t.add_argument("--loss-csv", help="defaults to <out stem>.loss.csv")
    t.add_argument("--verify", action="store_true",
                   help="check the result against an exhaustive grid search")
    t.set_defaults(func=cmd_train)

    ap = sub.add_parser("apply", help="manipulate one TTS file with a trained model")
    ap.add_argument("input")
    ap.add_argument("--model", required=True)
    ap.add_argument("--out", required=True)
    ap.add_argument("--seed", type=int, default=0, help="noise excitation seed")
    ap.add_argument("--semitones", type=float, default=0.0,
                    help="extra multiplicative pitch shift after the model")
    ap.add_argument("--out-rate", type=int, default=None)
    ap.set_defaults(func=cmd_apply)

    b = sub.add_parser("batch", help="manipulate every pair of a corpus")
    b.add_argument("manifest")
    b.add_argument("--model", required=True)
    b.add_argument("--out-dir", required=True)
    b.add_argument("--jobs", type=int, default=1)
    b.add_argument("--seed", type=int, default=0)
    b.set_defaults(func=cmd_batch)

    r = sub.add_parser("report", help="export F0 and envelope plot data")
    r.add_argument("features_a")
    r.add_argument("features_b")
    r.add_argument("--out-dir", required=True)
    r.set_defaults(func=cmd_report)

    f = sub.add_parser("fixture", help="write a synthetic paired corpus")
    f.add_argument("out_dir")
    f.add_argument("--seed", type=int, default=0)
    f.add_argument("--pairs", type=int, default=FixtureSpec.n_pairs)
    f.set_defaults(func=cmd_fixture)
    return p


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        return args.func(args)
    except UsageError as exc:
        _log(f"usage error: {exc}")
        return EXIT_USAGE
    except (ProsodyError, OSError, ValueError, KeyError, TypeError, json.JSONDecodeError) as exc:
        _log(f"error: {type(exc).__name__}: {exc}")
        return EXIT_DATA
    except Exception as exc:  # pragma: no cover - last resort
        _log(f"internal error: {type(exc).__name__}: {exc}")
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
