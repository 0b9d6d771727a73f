"""Kernel backend selection.

The compiled extension `_native` (Cython) and the numpy/scipy `_purepy`
module implement the same functions. The native module is preferred when
importable; set SNAKETRACE_KERNELS=python or =native to force a backend.
"""

import os

from . import _purepy

_requested = os.environ.get("SNAKETRACE_KERNELS", "auto").lower()

if _requested == "python":
    _impl = _purepy
    BACKEND = "python"
else:
    try:
        from . import _native as _impl  # type: ignore[attr-defined]

        BACKEND = "native"
    except ImportError:
        if _requested == "native":
            raise
        _impl = _purepy
        BACKEND = "python"

chain_residual = _impl.chain_residual
chain_jacobian_diag = _impl.chain_jacobian_diag
square_residual = _impl.square_residual
square_jacobian_diag = _impl.square_jacobian_diag
chain_energy = _impl.chain_energy
square_energy = _impl.square_energy
tridiag_factor = _impl.tridiag_factor
tridiag_solve = _impl.tridiag_solve
chain_relax = _impl.chain_relax
map_iterate = _impl.map_iterate


def get_backend():
    return BACKEND
