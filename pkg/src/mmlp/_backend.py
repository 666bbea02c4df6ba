"""Select the kernel implementation at import time.

The compiled extension is used when it was built; set ``MMLP_PURE_PYTHON=1``
to force the numpy fallback.
"""

import os

from . import _fallback

fallback = _fallback

if os.environ.get("MMLP_PURE_PYTHON", "") not in ("", "0"):
    compiled = None
else:
    try:
        from . import _kernels as compiled
    except ImportError:  # extension not built
        compiled = None

kernels = compiled if compiled is not None else fallback
BACKEND = kernels.NAME


def get(name=None):
    """Kernel module by name ("cython" or "numpy"); ``None`` means the default."""
    if name is None:
        return kernels
    if name == fallback.NAME:
        return fallback
    if name == "cython":
        if compiled is None:
            raise RuntimeError("the compiled kernels are not available")
        return compiled
    raise ValueError(f"unknown backend {name!r}")
