"""Fourier transform of distributions on a finite abelian group.

p_hat(gamma) = sum_x p(x) conj(gamma(x)), i.e. counting measure on G and the
uniform probability measure on the dual. With characters indexed like
elements this is exactly numpy's forward ``fftn`` of the dense pmf.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .config import require
from .dist import Dist
from .groups import Group


@dataclass(frozen=True, eq=False)
class SpectrumTable:
    group: Group
    values: np.ndarray      # flat, indexed by character flat index

    def __getitem__(self, chi) -> complex:
        return complex(self.values[self.group.flat(chi)])

    @property
    def abs(self) -> np.ndarray:
        return np.abs(self.values)

    def inverse(self) -> np.ndarray:
        """Dense function recovered by Fourier inversion."""
        g = self.group
        return np.fft.ifftn(self.values.reshape(g.shape)).ravel()


def dft(p: Dist) -> SpectrumTable:
    g = p.group
    require(g.order, "dft_order", "full DFT table")
    vals = np.fft.fftn(p.dense().reshape(g.shape)).ravel()
    return SpectrumTable(g, vals)


def dft_dense(g: Group, f: np.ndarray) -> np.ndarray:
    require(g.order, "dft_order", "full DFT table")
    return np.fft.fftn(np.asarray(f).reshape(g.shape)).ravel()


def dft_at(p: Dist, chars) -> np.ndarray:
    """p_hat at the given characters (flat indices) without a full table."""
    g = p.group
    w = g.phase_weights(chars)                      # (m, k)
    xc = g.coords(p.idx)                            # (s, k)
    ph = (w @ xc.T) % g.lcm                         # (m, s)
    return (np.exp(-2j * np.pi * ph / g.lcm) * p.p[None, :]).sum(axis=1)


def dft_naive(p: Dist) -> np.ndarray:
    """O(|G| |supp p|) reference evaluation of the full table."""
    g = p.group
    return dft_at(p, np.arange(g.order))


def lspec(p: Dist, eps: float) -> np.ndarray:
    """Characters with |p_hat|^2 >= 1 - eps^2/2 (sorted flat indices)."""
    if not 0 < eps < 1:
        raise ValueError("eps must lie in (0, 1)")
    a2 = np.abs(dft(p).values) ** 2
    out = np.flatnonzero(a2 >= 1 - eps * eps / 2 - 1e-12)
    return np.union1d(out, [0]).astype(np.int64)


def spec(p: Dist, eps: float) -> np.ndarray:
    """Characters with |p_hat| >= eps (sorted flat indices)."""
    if not 0 < eps <= 1:
        raise ValueError("eps must lie in (0, 1]")
    a = np.abs(dft(p).values)
    return np.union1d(np.flatnonzero(a >= eps - 1e-12), [0]).astype(np.int64)
