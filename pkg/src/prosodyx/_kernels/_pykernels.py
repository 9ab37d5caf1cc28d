"""Numpy implementations of the inner loops; used when the compiled
extension is unavailable or ``PROSODYX_PURE_PYTHON`` is set."""
import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

_CHUNK = 8192


def sinc_resample(x, step, n_out, half_width, cutoff):
    x = np.asarray(x, dtype=np.float64)
    n_in = x.shape[0]
    out = np.zeros(n_out)
    reach = int(np.ceil(half_width)) + 1
    offsets = np.arange(-reach, reach + 1)
    for start in range(0, n_out, _CHUNK):
        t = np.arange(start, min(start + _CHUNK, n_out)) * step
        k = np.floor(t)[:, None].astype(np.int64) + offsets[None, :]
        d = t[:, None] - k
        valid = (np.abs(d) < half_width) & (k >= 0) & (k < n_in)
        kernel = cutoff * np.sinc(cutoff * d) * (0.5 + 0.5 * np.cos(np.pi * d / half_width))
        taps = np.where(valid, x[np.clip(k, 0, n_in - 1)], 0.0)
        out[start:start + t.shape[0]] = np.sum(taps * kernel * valid, axis=1)
    return out


def nccf(x, starts, int_len, min_lag, max_lag):
    x = np.asarray(x, dtype=np.float64)
    starts = np.asarray(starts, dtype=np.int64)
    out = np.zeros((starts.shape[0], max_lag + 1))
    if starts.shape[0] == 0:
        return out
    seg = sliding_window_view(x, int_len + max_lag)[starts]
    sq = np.concatenate([np.zeros((seg.shape[0], 1)), np.cumsum(seg * seg, axis=1)], axis=1)
    head = seg[:, :int_len]
    e0 = sq[:, int_len]
    for lag in range(min_lag, max_lag + 1):
        dot = np.einsum("ij,ij->i", head, seg[:, lag:lag + int_len])
        el = sq[:, lag + int_len] - sq[:, lag]
        denom = e0 * el
        ok = denom > 0.0
        out[ok, lag] = dot[ok] / np.sqrt(denom[ok])
    return out


def harmonic_excitation(phase, n_harm, amp):
    phase = np.asarray(phase, dtype=np.float64)
    n_harm = np.asarray(n_harm, dtype=np.int64)
    amp = np.asarray(amp, dtype=np.float64)
    out = np.zeros_like(phase)
    kmax = int(n_harm.max(initial=0))
    if kmax <= 0:
        return out
    # same Chebyshev recurrence as the compiled loop
    c1 = np.cos(phase)
    prev = np.ones_like(phase)
    cur = c1.copy()
    for k in range(1, kmax + 1):
        out += np.where(n_harm >= k, cur, 0.0)
        prev, cur = cur, 2.0 * c1 * cur - prev
    out *= np.where(n_harm > 0, amp, 0.0)
    return out
