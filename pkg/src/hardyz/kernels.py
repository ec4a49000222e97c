"""Backend selection for the hot loops.

The compiled ``_ckernels`` extension is used when it imports; otherwise the
numpy fallback in ``_pykernels``. Set ``HARDYZ_PURE_PYTHON=1`` to force the
fallback.
"""
import os

from . import _pykernels

_force_py = os.environ.get("HARDYZ_PURE_PYTHON", "").strip() not in ("", "0")

backend = _pykernels
if not _force_py:
    try:
        from . import _ckernels as backend  # noqa: F811
    except ImportError:
        backend = _pykernels

BACKEND = backend.NAME

rs_main_sum = backend.rs_main_sum
simpson_cumsum = backend.simpson_cumsum
kahan_sum = backend.kahan_sum
filon_sweep = backend.filon_sweep
dirichlet_one_convolve = backend.dirichlet_one_convolve
crc64 = backend.crc64


def get(name):
    """Return the kernel module named ``"python"`` or ``"cython"``."""
    if name == "python":
        return _pykernels
    if name == "cython":
        from . import _ckernels
        return _ckernels
    raise ValueError(f"unknown kernel backend {name!r}")
