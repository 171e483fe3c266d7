"""Select the kernel backend at import time.

The compiled extension is preferred. Setting ``GYROMAT_BACKEND=python`` forces
the numpy fallback (useful for benchmarking and for cross-checking results).
"""

import os

_requested = os.environ.get("GYROMAT_BACKEND", "auto").lower()

if _requested == "python":
    from gyromat.matker import _pykernels as kernels

    NAME = "python"
else:
    try:
        from gyromat.matker import _kernels as kernels

        NAME = "cython"
    except ImportError:
        if _requested == "cython":
            raise
        from gyromat.matker import _pykernels as kernels

        NAME = "python"

__all__ = ["kernels", "NAME"]
