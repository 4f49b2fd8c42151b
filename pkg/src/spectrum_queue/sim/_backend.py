"""Pick the event kernel at import time.

The compiled kernel is preferred.  Set ``SPECTRUM_QUEUE_PURE_PYTHON=1`` to
force the pure-Python kernel, e.g. to compare the two.
"""

import os

from . import _kernel_py

try:
    from . import _kernel as _kernel_c
except ImportError:  # extension not built
    _kernel_c = None

_KERNELS = {"python": _kernel_py.EventKernel}
if _kernel_c is not None:
    _KERNELS["cython"] = _kernel_c.EventKernel

if os.environ.get("SPECTRUM_QUEUE_PURE_PYTHON") or _kernel_c is None:
    DEFAULT_BACKEND = "python"
else:
    DEFAULT_BACKEND = "cython"


def available_backends():
    return sorted(_KERNELS)


def get_kernel(backend=None):
    name = backend or DEFAULT_BACKEND
    try:
        return _KERNELS[name]
    except KeyError:
        raise ValueError(f"unknown or unavailable kernel backend {name!r}; "
                         f"available: {available_backends()}") from None
