"""Backend selection for the series kernels.

The compiled extension is used when it imports; set ``RAMLAB_PURE_PYTHON=1``
to force the numpy fallback.
"""

import os

from . import _kernels_py

BACKEND = "python"
compose = _kernels_py.compose
mul_trunc = _kernels_py.mul_trunc

if not os.environ.get("RAMLAB_PURE_PYTHON"):
    try:
        from . import _ckernels
    except ImportError:  # extension not built
        _ckernels = None
    else:
        BACKEND = "cython"
        compose = _ckernels.compose
        mul_trunc = _ckernels.mul_trunc

__all__ = ["BACKEND", "compose", "mul_trunc"]
