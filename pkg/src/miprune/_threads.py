"""MIPRUNE_THREADS handling.

BLAS thread pools size themselves when numpy first loads, so the cap has
to land in the environment before that. The package __init__ calls
apply_thread_cap() ahead of any numeric import; 0 or unset means auto.
"""

import os
import sys
import warnings

_THREAD_ENV_VARS = (
    "OMP_NUM_THREADS",
    "OPENBLAS_NUM_THREADS",
    "MKL_NUM_THREADS",
    "NUMEXPR_NUM_THREADS",
    "VECLIB_MAXIMUM_THREADS",
)


def apply_thread_cap() -> None:
    raw = os.environ.get("MIPRUNE_THREADS", "").strip()
    if not raw or raw == "0":
        return
    try:
        n = int(raw)
    except ValueError:
        warnings.warn(f"ignoring malformed MIPRUNE_THREADS={raw!r}")
        return
    if n < 1:
        warnings.warn(f"ignoring MIPRUNE_THREADS={n}; need a positive count or 0")
        return
    if "numpy" in sys.modules:
        warnings.warn("numpy already imported; MIPRUNE_THREADS cannot cap its pools")
        return
    for var in _THREAD_ENV_VARS:
        os.environ[var] = str(n)
