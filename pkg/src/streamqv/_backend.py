"""Select the compiled kernels when available, else the NumPy fallback.

Set ``STREAMQV_PURE_PYTHON=1`` to force the fallback.
"""
import logging
import os

from . import _pykernels
from .errors import ParameterError

logger = logging.getLogger(__name__)

_compiled = None
if not os.environ.get("STREAMQV_PURE_PYTHON"):
    try:
        from . import _kernels as _compiled
    except ImportError:  # extension not built
        logger.debug("compiled kernels unavailable; using NumPy fallback")
        _compiled = None

kernels = _compiled if _compiled is not None else _pykernels
BACKEND = "cython" if _compiled is not None else "python"


def available_backends():
    return ["cython", "python"] if _compiled is not None else ["python"]


def get_kernels(name=None):
    """Kernel module by name (``"cython"`` or ``"python"``); default is the active one."""
    if name is None:
        return kernels
    if name == "python":
        return _pykernels
    if name == "cython":
        if _compiled is None:
            raise ImportError("compiled kernels are not built")
        return _compiled
    raise ParameterError(f"unknown backend {name!r}")
