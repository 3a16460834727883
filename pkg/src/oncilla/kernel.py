"""Backend selection for the oscillator integration kernels.

The compiled extension is preferred when it was built; otherwise the NumPy
implementation is used. Set ONCILLA_PURE_PYTHON=1 to force the fallback
(useful for benchmarking the two against each other).
"""

import os

from . import _kernel_py

if os.environ.get("ONCILLA_PURE_PYTHON"):
    _impl = _kernel_py
    BACKEND = "python"
else:
    try:
        from . import _kernel as _impl  # type: ignore[no-redef]

        BACKEND = "cython"
    except ImportError:
        _impl = _kernel_py
        BACKEND = "python"

rk4_run = _impl.rk4_run
rk4_record = _impl.rk4_record

# Table evaluation outside the run loop is not hot; always use the NumPy
# version so ShapeFunction results do not depend on the backend.
shape_eval = _kernel_py.shape_eval
derivs = _kernel_py.derivs


def backend_name():
    """Name of the active integration backend ('cython' or 'python')."""
    return BACKEND
