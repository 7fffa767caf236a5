"""Kernel backend selection.

Prefers the compiled extension, falls back to numpy.  Set BQCSIM_KERNELS to
``cython`` or ``numpy`` to force a backend (forcing a missing one raises).
"""
from __future__ import annotations

import os

_forced = os.environ.get("BQCSIM_KERNELS", "").strip().lower()

if _forced == "numpy":
    from bqcsim import _kernels_py as _impl
elif _forced == "cython":
    from bqcsim import _kernels_cy as _impl  # type: ignore[no-redef]
elif _forced:
    raise ImportError(f"BQCSIM_KERNELS={_forced!r}: expected 'cython' or 'numpy'")
else:
    try:
        from bqcsim import _kernels_cy as _impl  # type: ignore[no-redef]
    except ImportError:
        from bqcsim import _kernels_py as _impl

BACKEND: str = _impl.BACKEND
apply_1q = _impl.apply_1q
apply_diag = _impl.apply_diag
apply_cnot = _impl.apply_cnot
apply_cphase = _impl.apply_cphase
apply_swap = _impl.apply_swap
apply_toffoli = _impl.apply_toffoli
prob_one = _impl.prob_one
collapse = _impl.collapse
sumsq = _impl.sumsq
