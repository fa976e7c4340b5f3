"""Enumeration caps and numerical thresholds.

Caps are process-wide and mutable through :func:`caps_override`; every
operation that enumerates the group or builds a dense table consults them.
"""

from __future__ import annotations

import contextlib
from dataclasses import dataclass, replace

from .errors import CapExceeded


@dataclass(frozen=True)
class Caps:
    enum_order: int = 2**20       # membership scans / dense accumulators
    dft_order: int = 2**16        # full DFT tables and FFT convolution
    direct_pairs: int = 2**22     # direct double-loop convolution
    sumset_pairs: int = 2**26     # pairwise sumset enumeration


_caps = Caps()

MASS_FLOOR = 1e-15
FIBER_WEIGHT_FLOOR = 1e-13
SLACK_TOL = 1e-9


def get_caps() -> Caps:
    return _caps


def set_caps(**kw) -> Caps:
    global _caps
    _caps = replace(_caps, **kw)
    return _caps


@contextlib.contextmanager
def caps_override(**kw):
    global _caps
    old = _caps
    _caps = replace(old, **kw)
    try:
        yield _caps
    finally:
        _caps = old


def require(value: int, cap_name: str, what: str = "") -> None:
    cap = getattr(_caps, cap_name)
    if value > cap:
        raise CapExceeded(f"{what or cap_name}: {value} > {cap_name}={cap}")
