"""Hot numeric loops with a compiled core and a numpy fallback.

The compiled extension (Cython) is preferred when present; the pure-numpy
implementations in `_fallback` produce the same results and are selected
automatically when the extension is missing or when ARRAY_TSE_PURE=1 is set.
`benchmarks/bench_kernels.py` compares the two.
"""

import os

from . import _fallback

if os.environ.get("ARRAY_TSE_PURE", "") == "1":
    _impl = None
else:
    try:
        from . import _impl  # type: ignore[attr-defined]
    except ImportError:
        _impl = None

HAVE_COMPILED = _impl is not None

if HAVE_COMPILED:
    rir_accumulate = _impl.rir_accumulate
    nlms_run = _impl.nlms_run
else:
    rir_accumulate = _fallback.rir_accumulate
    nlms_run = _fallback.nlms_run

__all__ = ["HAVE_COMPILED", "rir_accumulate", "nlms_run", "_fallback"]
