"""Kernel-core backend selection.

Prefers the compiled extension (fieldwork._kernels) and falls back to the
numpy implementation when the extension is unavailable. Selection is
all-or-nothing: one implementation serves every kernel op, so results are
reproducible against a single code path (benchmarks/bench_kernels.py shows
the per-op differences wash out in the full fit+predict round trip). Set
the environment variable FIELDWORK_PURE_PYTHON=1 to force the fallback,
e.g. for benchmarking or debugging.
"""

import os

from . import _kernels_py

if os.environ.get("FIELDWORK_PURE_PYTHON"):
    _impl = _kernels_py
    BACKEND = "python"
else:
    try:
        from . import _kernels as _impl  # type: ignore[no-redef]

        BACKEND = "compiled"
    except ImportError:
        _impl = _kernels_py
        BACKEND = "python"

sq_dists = _impl.sq_dists
sq_dists_sym = _impl.sq_dists_sym
se_from_sq = _impl.se_from_sq
se_cross = _impl.se_cross
se_sym = _impl.se_sym
