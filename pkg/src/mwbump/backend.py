"""Kernel backend selection.

The hot kernels exist twice: a Cython extension (``mwbump._kernels``) and a
pure numpy fallback (``mwbump._kernels_py``).  The compiled module is used
when importable; set ``MWBUMP_PURE_PYTHON=1`` to force the fallback.
``benchmarks/bench_kernels.py`` compares the two.
"""

from __future__ import annotations

import os

from . import _kernels_py as _py

_impl = _py
if not os.environ.get("MWBUMP_PURE_PYTHON"):
    try:
        from . import _kernels as _c

        _impl = _c
    except ImportError:
        _impl = _py

BACKEND = _impl.BACKEND_NAME

young_eval = _impl.young_eval
lux_rows = _impl.lux_rows
khachiyan_mvee = _impl.khachiyan_mvee
pair_opnorm = _impl.pair_opnorm
pair_vecnorm = _impl.pair_vecnorm
eigh_batch = _impl.eigh_batch


def backend_name() -> str:
    return BACKEND
