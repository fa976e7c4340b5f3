"""Backend selection for the hot kernels.

The compiled extension is used when it was built; otherwise (or when
``ACW_PURE_PYTHON`` is set) the numpy fallback is used. Both expose the same
three functions and are checked against each other in the test-suite.
"""

import os

import numpy as np

from . import _kernels_py

try:
    if os.environ.get("ACW_PURE_PYTHON"):
        raise ImportError("pure-python backend forced")
    from . import _kernels as _compiled
except ImportError:
    _compiled = None

BACKEND = "cython" if _compiled is not None else "python"
_impl = _compiled if _compiled is not None else _kernels_py

BACKENDS = {"python": _kernels_py}
if _compiled is not None:
    BACKENDS["cython"] = _compiled


def _geom(g):
    return (
        np.asarray(g.moduli, dtype=np.int64),
        np.asarray(g.strides, dtype=np.int64),
        np.int64(g.order),
    )


def conv_direct(g, idx_p, p, idx_q, q, sign=1, impl=None):
    mods, strides, order = _geom(g)
    return (impl or _impl).conv_direct(
        np.ascontiguousarray(idx_p, dtype=np.int64), np.ascontiguousarray(p, dtype=np.float64),
        np.ascontiguousarray(idx_q, dtype=np.int64), np.ascontiguousarray(q, dtype=np.float64),
        mods, strides, order, int(sign),
    )


def sumset_mask(g, idx_a, idx_b, sign=1, impl=None):
    mods, strides, order = _geom(g)
    return (impl or _impl).sumset_mask(
        np.ascontiguousarray(idx_a, dtype=np.int64), np.ascontiguousarray(idx_b, dtype=np.int64),
        mods, strides, order, int(sign),
    ).astype(bool)


def bohr_maxdist(g, weights, cutoff, impl=None):
    mods, strides, order = _geom(g)
    w = np.ascontiguousarray(np.asarray(weights, dtype=np.int64).reshape(-1, g.rank))
    return (impl or _impl).bohr_maxdist(w, np.int64(g.lcm), mods, strides, order, np.int64(cutoff))
