"""Hot inner loops with a compiled core and a pure-Python fallback.

The compiled extension (``_core``, Cython) and the fallback (``_pure``)
implement bit-identical semantics — same RNG stream, same IEEE operation
order, same tie-breaking — so results never depend on which backend loaded.
Selection happens once at import: the extension if it built, else the
fallback.  Set ``POSIBENCH_PURE_PYTHON=1`` to force the fallback (the
parity tests and the kernel benchmark import both modules directly).
"""

import os

if os.environ.get("POSIBENCH_PURE_PYTHON", "") not in ("", "0"):
    from . import _pure as _impl

    BACKEND = "pure-python"
else:
    try:
        from . import _core as _impl  # type: ignore[attr-defined]

        BACKEND = "cython"
    except ImportError:
        from . import _pure as _impl

        BACKEND = "pure-python"

kl_pass = _impl.kl_pass
sa_sample = _impl.sa_sample
gray_scan = _impl.gray_scan
bnb_search = _impl.bnb_search

__all__ = ["BACKEND", "kl_pass", "sa_sample", "gray_scan", "bnb_search"]
