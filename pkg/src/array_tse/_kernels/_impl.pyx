# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot loops: fractional-delay RIR accumulation and per-bin NLMS.

Mirrors `_fallback.py`; keep both in sync.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport cos, fabs, floor, isfinite, sin, sqrt

cdef double M_PI = 3.141592653589793


def rir_accumulate(double[::1] out, double[::1] delay, double[::1] amp, int half_taps=40):
    cdef Py_ssize_t n_pulses = delay.shape[0]
    cdef Py_ssize_t n = out.shape[0]
    cdef Py_ssize_t i, idx
    cdef int k, n0
    cdef double d, a, frac, u, w, s
    cdef double span = 2.0 * half_taps + 1.0
    cdef double edge = half_taps + 0.5
    for i in range(n_pulses):
        d = delay[i]
        a = amp[i]
        n0 = <int>floor(d)
        frac = d - n0
        for k in range(-half_taps, half_taps + 1):
            idx = n0 + k
            if idx < 0 or idx >= n:
                continue
            u = k - frac
            if fabs(u) > edge:
                continue
            w = 0.5 * (1.0 + cos(2.0 * M_PI * u / span))
            if u == 0.0:
                s = 1.0
            else:
                s = sin(M_PI * u) / (M_PI * u)
            out[idx] += a * w * s
    return np.asarray(out)


def nlms_run(double complex[:, ::1] ya, double complex[:, :, ::1] z,
             double complex[:, ::1] w, double mu, double delta, double leakage,
             double complex[:, ::1] out, double[::1] wnorm):
    cdef Py_ssize_t n_frames = ya.shape[0]
    cdef Py_ssize_t n_bins = ya.shape[1]
    cdef Py_ssize_t n_taps = z.shape[2]
    cdef Py_ssize_t t, f, k
    cdef double complex yo, acc, scale, wv
    cdef double den, norm_acc
    cdef int resets = 0
    cdef bint finite
    for t in range(n_frames):
        for f in range(n_bins):
            acc = 0.0
            for k in range(n_taps):
                acc = acc + w[f, k].conjugate() * z[t, f, k]
            yo = ya[t, f] - acc
            if not (isfinite(yo.real) and isfinite(yo.imag)):
                for k in range(n_taps):
                    w[f, k] = 0.0
                resets += 1
                yo = ya[t, f]
            out[t, f] = yo
            if mu != 0.0:
                den = 0.0
                for k in range(n_taps):
                    den = den + (z[t, f, k].real * z[t, f, k].real
                                 + z[t, f, k].imag * z[t, f, k].imag)
                if den > 0.0:
                    scale = yo.conjugate() / (den + delta)
                    finite = True
                    for k in range(n_taps):
                        wv = leakage * w[f, k] + mu * z[t, f, k] * scale
                        w[f, k] = wv
                        if not (isfinite(wv.real) and isfinite(wv.imag)):
                            finite = False
                    if not finite:
                        for k in range(n_taps):
                            w[f, k] = 0.0
                        resets += 1
        norm_acc = 0.0
        for f in range(n_bins):
            for k in range(n_taps):
                norm_acc = norm_acc + (w[f, k].real * w[f, k].real
                                       + w[f, k].imag * w[f, k].imag)
        wnorm[t] = sqrt(norm_acc)
    return resets
