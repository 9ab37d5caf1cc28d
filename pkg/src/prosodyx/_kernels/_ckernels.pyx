# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled inner loops. Signatures mirror ``_pykernels``."""
import numpy as np
cimport numpy as cnp
from libc.math cimport cos, sin, sqrt, floor, ceil, M_PI, fabs

cnp.import_array()


def sinc_resample(const double[::1] x, double step, Py_ssize_t n_out,
                  double half_width, double cutoff):
    cdef Py_ssize_t n_in = x.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out_arr = np.zeros(n_out, dtype=np.float64)
    cdef double[::1] out = out_arr
    cdef Py_ssize_t m, k, lo, hi
    cdef double t, d, arg, s, acc
    for m in range(n_out):
        t = m * step
        lo = <Py_ssize_t>ceil(t - half_width)
        hi = <Py_ssize_t>floor(t + half_width)
        if lo < 0:
            lo = 0
        if hi > n_in - 1:
            hi = n_in - 1
        acc = 0.0
        for k in range(lo, hi + 1):
            d = t - k
            if fabs(d) >= half_width:
                continue
            arg = M_PI * cutoff * d
            if arg == 0.0:
                s = cutoff
            else:
                s = cutoff * sin(arg) / arg
            acc += x[k] * s * (0.5 + 0.5 * cos(M_PI * d / half_width))
        out[m] = acc
    return out_arr


def nccf(const double[::1] x, const cnp.int64_t[::1] starts, Py_ssize_t int_len,
         Py_ssize_t min_lag, Py_ssize_t max_lag):
    cdef Py_ssize_t n_frames = starts.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=2] out_arr = np.zeros(
        (n_frames, max_lag + 1), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    cdef Py_ssize_t i, lag, n, s0
    cdef double e0, el, dot, v, denom, d0, d1, d2, d3
    for i in range(n_frames):
        s0 = starts[i]
        e0 = 0.0
        for n in range(int_len):
            e0 += x[s0 + n] * x[s0 + n]
        if e0 <= 0.0:
            continue
        el = 0.0
        for n in range(int_len):
            v = x[s0 + min_lag + n]
            el += v * v
        for lag in range(min_lag, max_lag + 1):
            if lag > min_lag:
                v = x[s0 + lag + int_len - 1]
                el += v * v
                v = x[s0 + lag - 1]
                el -= v * v
            # four partial sums let the compiler pipeline the reduction
            d0 = d1 = d2 = d3 = 0.0
            n = 0
            while n + 4 <= int_len:
                d0 += x[s0 + n] * x[s0 + lag + n]
                d1 += x[s0 + n + 1] * x[s0 + lag + n + 1]
                d2 += x[s0 + n + 2] * x[s0 + lag + n + 2]
                d3 += x[s0 + n + 3] * x[s0 + lag + n + 3]
                n += 4
            while n < int_len:
                d0 += x[s0 + n] * x[s0 + lag + n]
                n += 1
            dot = (d0 + d1) + (d2 + d3)
            denom = e0 * el
            if denom > 0.0:
                out[i, lag] = dot / sqrt(denom)
    return out_arr


def harmonic_excitation(const double[::1] phase, const cnp.int64_t[::1] n_harm,
                        const double[::1] amp):
    cdef Py_ssize_t n_samples = phase.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out_arr = np.zeros(n_samples, dtype=np.float64)
    cdef double[::1] out = out_arr
    cdef Py_ssize_t n, k, kmax
    cdef double c1, prev, cur, nxt, acc
    for n in range(n_samples):
        kmax = n_harm[n]
        if kmax <= 0 or amp[n] == 0.0:
            continue
        c1 = cos(phase[n])
        prev = 1.0
        cur = c1
        acc = 0.0
        for k in range(1, kmax + 1):
            acc += cur
            nxt = 2.0 * c1 * cur - prev
            prev = cur
            cur = nxt
        out[n] = amp[n] * acc
    return out_arr
