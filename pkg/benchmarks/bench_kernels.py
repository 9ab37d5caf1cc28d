"""Time the compiled kernels against the numpy fallback.

    python benchmarks/bench_kernels.py [--seconds 5] [--repeat 5]

Inputs mirror what analysis and synthesis feed the kernels for a clip of
the given length at 16 kHz.
"""
import argparse
import math
import timeit

import numpy as np

from prosodyx import _kernels
from prosodyx.features import AnalysisConfig, frame_centers, frame_count


def workloads(seconds: float, sr: int = 16000):
    rng = np.random.default_rng(0)
    x = rng.standard_normal(int(seconds * sr)) * 0.1
    cfg = AnalysisConfig()

    # pitch search, same geometry as estimate_f0
    max_lag = int(math.ceil(sr / cfg.f0_floor))
    min_lag = max(2, int(math.floor(sr / cfg.f0_ceil)))
    span = 2 * max_lag
    n = frame_count(x.shape[0], sr, cfg)
    centers = frame_centers(n, sr, cfg)
    padded = np.pad(x, (span, span + max_lag + span))
    starts = (np.clip(centers - span // 2, 0, max(0, x.shape[0] - span)) + span).astype(np.int64)

    # 16 kHz -> 22.05 kHz
    step = 16000 / 22050
    n_out = int(round(x.shape[0] / step))

    # harmonic source at a gliding F0
    f0 = np.linspace(100.0, 300.0, x.shape[0])
    phase = 2 * np.pi * np.mod(np.cumsum(f0) / sr, 1.0)
    n_harm = np.floor((sr / 2 - 1e-9) / f0).astype(np.int64)
    amp = np.sqrt(2.0 / n_harm)

    return {
        "nccf": lambda k: k.nccf(padded, starts, max_lag, min_lag, max_lag),
        "sinc_resample": lambda k: k.sinc_resample(x, step, n_out, 8.0, 1.0),
        "harmonic_excitation": lambda k: k.harmonic_excitation(phase, n_harm, amp),
    }


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--seconds", type=float, default=5.0, help="clip length")
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()

    backends = [("python", _kernels.python)]
    if _kernels.compiled is not None:
        backends.append(("cython", _kernels.compiled))
    else:
        print("compiled extension not built; timing the numpy fallback only")

    print(f"{args.seconds:g} s of 16 kHz audio, best of {args.repeat}")
    print(f"{'kernel':<22}" + "".join(f"{name:>12}" for name, _ in backends) + "     speedup  max|diff|")
    for label, fn in workloads(args.seconds).items():
        times, outs = [], []
        for _, mod in backends:
            outs.append(fn(mod))
            times.append(min(timeit.repeat(lambda: fn(mod), number=1, repeat=args.repeat)))
        row = f"{label:<22}" + "".join(f"{t * 1e3:10.1f}ms" for t in times)
        if len(times) == 2:
            row += f"  {times[0] / times[1]:9.1f}x  {np.max(np.abs(outs[0] - outs[1])):.1e}"
        print(row)


if __name__ == "__main__":
    main()
