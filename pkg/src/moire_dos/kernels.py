"""Backend selection for the inner loops.

The compiled extension is used when it imports; setting ``MOIRE_DOS_PURE=1``
forces the numpy fallback.  ``BACKEND`` names the active one.
"""

import os

from . import _fallback

if os.environ.get("MOIRE_DOS_PURE", "") not in ("", "0"):
    _impl = _fallback
    BACKEND = "python"
else:
    try:
        from . import _kernels as _impl
        BACKEND = "cython"
    except ImportError:
        _impl = _fallback
        BACKEND = "python"

scan_box = _impl.scan_box
fill_couplings = _impl.fill_couplings
compensated_sum = _impl.compensated_sum
lattice_phase_sum = _impl.lattice_phase_sum
tridiagonal_first_row = _impl.tridiagonal_first_row

__all__ = ["BACKEND", "scan_box", "fill_couplings", "compensated_sum", "lattice_phase_sum",
           "tridiagonal_first_row"]
