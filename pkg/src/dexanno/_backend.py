"""Pick the compiled kernels when available, else the numpy fallback.

``DEXANNO_KERNELS=python`` in the environment forces the fallback at import.
"""

import os

from . import _kernels_py

try:
    from . import _ckernels as _compiled
except ImportError:  # extension not built
    _compiled = None

_active = _compiled if _compiled is not None else _kernels_py
if os.environ.get("DEXANNO_KERNELS", "auto") == "python":
    _active = _kernels_py


def compiled_available():
    return _compiled is not None


def name():
    return "cython" if _active is _compiled else "python"


def use(backend):
    """Switch the active kernels: ``"cython"``, ``"python"`` or ``"auto"``."""
    global _active
    if backend == "python":
        _active = _kernels_py
    elif backend in ("cython", "auto"):
        if _compiled is None:
            if backend == "cython":
                raise ImportError("compiled kernels are not built; run `pip install -e .`")
            _active = _kernels_py
        else:
            _active = _compiled
    else:
        raise ValueError(f"unknown backend {backend!r}")


def get(backend=None):
    """Kernel module for ``backend`` (None means the active one)."""
    if backend is None:
        return _active
    if backend == "python":
        return _kernels_py
    if backend == "cython":
        if _compiled is None:
            raise ImportError("compiled kernels are not built")
        return _compiled
    raise ValueError(f"unknown backend {backend!r}")


def lp_max(A, b, c, **kw):
    return _active.lp_max(A, b, c, **kw)


def wrench_columns(points, normals, half_angles, m, torque_scale=1.0):
    return _active.wrench_columns(points, normals, half_angles, m, torque_scale)


def tangent_basis(n):
    return _active.tangent_basis(n)
