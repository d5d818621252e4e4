"""Numpy reference implementations of the compiled kernels.

Semantics must match `_impl.pyx` exactly; the parity test in
tests/test_kernels.py holds both to the same outputs.
"""

import numpy as np


def rir_accumulate(out, delay, amp, half_taps=40):
    """Add one windowed-sinc pulse per (delay, amp) pair into `out`.

    delay is in fractional samples; each pulse spans 2*half_taps+1 taps of
    sinc(u) shaped by a Hann window that reaches zero at |u| = half_taps+0.5.
    Taps falling outside `out` are dropped.
    """
    n = out.shape[0]
    n0 = np.floor(delay).astype(np.int64)
    frac = delay - n0
    span = 2.0 * half_taps + 1.0
    for k in range(-half_taps, half_taps + 1):
        u = k - frac
        w = 0.5 * (1.0 + np.cos(2.0 * np.pi * u / span))
        w[np.abs(u) > half_taps + 0.5] = 0.0
        taps = amp * w * np.sinc(u)
        idx = n0 + k
        valid = (idx >= 0) & (idx < n)
        if valid.any():
            out += np.bincount(idx[valid], weights=taps[valid], minlength=n)
    return out


def nlms_run(ya, z, w, mu, delta, leakage, out, wnorm):
    """Per-bin NLMS over frames: y_o = y_a - W^H z, then update W.

    ya:    (T, F) complex fixed-beamformer output
    z:     (T, F, K) complex blocking-matrix output
    w:     (F, K) complex adaptive weights, updated in place
    out:   (T, F) complex, receives y_o
    wnorm: (T,) float, receives the per-frame Frobenius norm of W

    Bins with exactly zero blocking energy are left untouched (no update,
    no leakage). A non-finite update resets that bin's weights to zero;
    the number of resets is returned.
    """
    n_frames = ya.shape[0]
    resets = 0
    for t in range(n_frames):
        zt = z[t]
        yo = ya[t] - np.einsum("fk,fk->f", w.conj(), zt)
        bad = ~np.isfinite(yo)
        if bad.any():
            w[bad] = 0.0
            resets += int(bad.sum())
            yo[bad] = ya[t][bad]
        out[t] = yo
        if mu != 0.0:
            den = (zt.real**2 + zt.imag**2).sum(axis=1)
            active = den > 0.0
            if active.any():
                upd = mu * zt[active] * (yo[active].conj() / (den[active] + delta))[:, None]
                w[active] = leakage * w[active] + upd
                bad_rows = ~np.isfinite(w[active]).all(axis=1)
                if bad_rows.any():
                    idx = np.flatnonzero(active)[bad_rows]
                    w[idx] = 0.0
                    resets += int(bad_rows.sum())
        wnorm[t] = np.sqrt((w.real**2 + w.imag**2).sum())
    return resets
