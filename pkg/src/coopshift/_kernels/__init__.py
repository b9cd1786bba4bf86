"""Hot-kernel backend selection.

The compiled extension is used when it imports; otherwise the numpy
fallback. Set ``COOPSHIFT_PURE_PYTHON=1`` to force the fallback.
"""
import os
from types import ModuleType

from . import _pykernels

STATUS_OK = _pykernels.STATUS_OK
STATUS_INVALID = _pykernels.STATUS_INVALID
STATUS_ILL_CONDITIONED = _pykernels.STATUS_ILL_CONDITIONED

try:
    from . import _ckernels
except ImportError:  # extension not built
    _ckernels = None


def available_backends() -> list[str]:
    return ["python"] + (["compiled"] if _ckernels is not None else [])


def get_backend(name: str) -> ModuleType:
    if name == "python":
        return _pykernels
    if name == "compiled":
        if _ckernels is None:
            raise ImportError("compiled kernels are not built")
        return _ckernels
    raise ValueError(f"unknown backend {name!r}")


if os.environ.get("COOPSHIFT_PURE_PYTHON", "") not in ("", "0") or _ckernels is None:
    BACKEND = "python"
else:
    BACKEND = "compiled"

_active = get_backend(BACKEND)
collective_sums = _active.collective_sums
three_point_centers = _active.three_point_centers
