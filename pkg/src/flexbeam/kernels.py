"""Backend selection for the position-surrogate kernels.

The compiled extension is used when it imports; otherwise the numpy
fallback is used. Setting ``FLEXBEAM_PURE_PYTHON=1`` forces the fallback.
"""

import os

from . import _kernels_py

py_backend = _kernels_py
compiled_backend = None

if os.environ.get("FLEXBEAM_PURE_PYTHON", "") not in ("", "0"):
    backend = _kernels_py
else:
    try:
        from . import _kernels as compiled_backend
    except ImportError:
        backend = _kernels_py
    else:
        backend = compiled_backend

BACKEND = "cython" if backend is compiled_backend else "numpy"

surrogate_value = backend.surrogate_value
surrogate_grad = backend.surrogate_grad
scan_antenna = backend.scan_antenna
armijo_coordinate = backend.armijo_coordinate
coordinate_ascent = backend.coordinate_ascent
