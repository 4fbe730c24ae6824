"""Hot kernels with a compiled core and a numpy fallback.

The compiled extension ``_ckernels`` is used when importable.  Setting the
environment variable ``GAMMADIAG_BACKEND`` to ``python`` forces the numpy
fallback, ``cython`` makes a missing extension an import error.
:func:`set_backend` switches at runtime (tests and benchmarks use it).
"""
import os
from contextlib import contextmanager

from . import _pykernels

try:
    from . import _ckernels
except ImportError:  # extension not built
    _ckernels = None

__all__ = [
    "SHIFT",
    "available_backends",
    "backend_name",
    "bucket_best_s",
    "fwht",
    "jacobi_round",
    "rotate",
    "rotation_signs",
    "row_sq_norms",
    "set_backend",
    "use_backend",
    "xor_gather",
    "xor_gather_inplace",
    "xy",
]

SHIFT = _pykernels.SHIFT

_BACKENDS = {"python": _pykernels}
if _ckernels is not None:
    _BACKENDS["cython"] = _ckernels

_impl = _pykernels
_name = "python"


def available_backends():
    return sorted(_BACKENDS)


def backend_name():
    return _name


def set_backend(name):
    global _impl, _name
    if name == "auto":
        name = "cython" if "cython" in _BACKENDS else "python"
    if name not in _BACKENDS:
        raise ImportError(
            f"kernel backend {name!r} is unavailable (have {available_backends()})"
        )
    _impl = _BACKENDS[name]
    _name = name


@contextmanager
def use_backend(name):
    previous = _name
    set_backend(name)
    try:
        yield
    finally:
        set_backend(previous)


def rotate(keys, vals, r, s, c2, s2):
    return _impl.rotate(keys, vals, r, s, c2, s2)


def xy(keys, vals, r, s):
    return _impl.xy(keys, vals, r, s)


def row_sq_norms(keys, vals):
    return _impl.row_sq_norms(keys, vals)


def bucket_best_s(diag_q, diag_h, row_q, row_h, r, weighted):
    return _impl.bucket_best_s(diag_q, diag_h, row_q, row_h, r, weighted)


def rotation_signs(p, q, r, s):
    return _impl.rotation_signs(p, q, r, s)


def fwht(v):
    return _impl.fwht(v)


def jacobi_round(a, lo, hi):
    return _impl.jacobi_round(a, lo, hi)


def xor_gather(m):
    return _impl.xor_gather(m)


def xor_gather_inplace(m):
    return _impl.xor_gather_inplace(m)


set_backend(os.environ.get("GAMMADIAG_BACKEND", "auto"))
