"""Kernel backend chosen at import: compiled if available, else numpy.

Set ``IDKAMC_BACKEND=python`` to force the numpy fallback.
"""
import os

from . import _pykernels

try:
    from . import _ckernels
except ImportError:  # extension not built
    _ckernels = None

BACKENDS = {"python": _pykernels}
if _ckernels is not None:
    BACKENDS["cython"] = _ckernels

if os.environ.get("IDKAMC_BACKEND", "").lower() == "python" or _ckernels is None:
    NAME = "python"
else:
    NAME = "cython"

kernels = BACKENDS[NAME]


def get(name=None):
    """Return the kernel module named ``name`` (default: the active one)."""
    if name is None:
        return kernels
    try:
        return BACKENDS[name]
    except KeyError:
        raise ValueError(f"backend {name!r} not available; have {sorted(BACKENDS)}") from None
