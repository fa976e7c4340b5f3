"""Finitely supported distributions on a finite abelian group.

A :class:`Dist` stores its support as sorted flat indices plus a matching
mass vector. All entropies are in nats.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterator

import numpy as np

from . import kernels
from .config import FIBER_WEIGHT_FLOOR, MASS_FLOOR, get_caps, require
from .errors import CapExceeded, EmptySet, GroupMismatch, ZeroProbabilityFiber
from .groups import Group, Homomorphism


@dataclass(frozen=True, eq=False)
class Dist:
    group: Group
    idx: np.ndarray
    p: np.ndarray

    def __post_init__(self):
        self.idx.setflags(write=False)
        self.p.setflags(write=False)

    @classmethod
    def from_arrays(cls, group: Group, idx, p) -> "Dist":
        """Aggregate duplicate atoms, drop masses below the floor and renormalise."""
        idx = np.asarray(idx, dtype=np.int64).ravel()
        p = np.asarray(p, dtype=np.float64).ravel()
        if idx.shape != p.shape:
            raise ValueError("idx and p must have the same length")
        if p.size and p.min() < -1e-12:
            raise ValueError(f"negative mass {p.min()}")
        p = np.clip(p, 0.0, None)
        if idx.size and (idx.min() < 0 or idx.max() >= group.order):
            raise ValueError("atom outside the group")
        if idx.size and np.any(np.diff(idx) <= 0):
            uniq, inv = np.unique(idx, return_inverse=True)
            p = np.bincount(inv, weights=p, minlength=uniq.size)
            idx = uniq
        total = p.sum()
        if not total > 0:
            raise EmptySet("distribution has no mass")
        p = p / total
        keep = p >= MASS_FLOOR
        if not keep.all():
            idx, p = idx[keep], p[keep]
            p = p / p.sum()
        return cls(group, idx.copy(), p.copy())

    @classmethod
    def from_pmf(cls, group: Group, pmf: dict) -> "Dist":
        items = list(pmf.items())
        return cls.from_arrays(group, group.as_index([k for k, _ in items]), [v for _, v in items])

    @classmethod
    def point(cls, group: Group, elem) -> "Dist":
        return cls(group, np.array([group.flat(elem)], dtype=np.int64), np.ones(1))

    @classmethod
    def from_dense(cls, group: Group, arr) -> "Dist":
        arr = np.asarray(arr, dtype=np.float64).ravel()
        nz = np.flatnonzero(arr > 0)
        return cls.from_arrays(group, nz, arr[nz])

    # -- views -------------------------------------------------------------

    @property
    def size(self) -> int:
        return int(self.idx.size)

    @property
    def pmf(self) -> dict:
        return {self.group.element(i): float(v) for i, v in zip(self.idx, self.p)}

    def dense(self) -> np.ndarray:
        out = np.zeros(self.group.order)
        out[self.idx] = self.p
        return out

    def mass_at(self, idx) -> np.ndarray:
        """Masses at the given flat indices (zero off the support)."""
        idx = np.asarray(idx, dtype=np.int64)
        pos = np.searchsorted(self.idx, idx)
        pos_c = np.minimum(pos, self.idx.size - 1)
        hit = self.idx[pos_c] == idx
        return np.where(hit, self.p[pos_c], 0.0)

    def translate(self, t) -> "Dist":
        new = self.group.add(self.idx, self.group.flat(t))
        order = np.argsort(new)
        return Dist(self.group, new[order], self.p[order].copy())

    def neg(self) -> "Dist":
        new = self.group.neg(self.idx)
        order = np.argsort(new)
        return Dist(self.group, new[order], self.p[order].copy())

    def restrict(self, mask_idx) -> "Dist":
        keep = np.isin(self.idx, mask_idx)
        return Dist.from_arrays(self.group, self.idx[keep], self.p[keep])

    def canonical_key(self) -> bytes:
        """Key equal for translates that share their smallest atom offset.

        Equal keys imply the two distributions are translates of each other;
        unequal keys imply nothing.
        """
        shifted = self.group.add(self.idx, self.idx[0], -1)
        order = np.argsort(shifted)
        return shifted[order].tobytes() + np.round(self.p[order], 15).tobytes()

    def __repr__(self) -> str:
        atoms = ", ".join(
            f"{self.group.element(i)}: {v:.4g}" for i, v in zip(self.idx[:6], self.p[:6])
        )
        more = "" if self.size <= 6 else f", ... ({self.size} atoms)"
        return f"Dist({self.group.moduli}; {atoms}{more})"


def _same_group(p: Dist, q: Dist) -> Group:
    if p.group != q.group:
        raise GroupMismatch(f"{p.group.moduli} vs {q.group.moduli}")
    return p.group


def uniform_on(g: Group, A) -> Dist:
    idx = np.unique(g.as_index(A) if not isinstance(A, np.ndarray) else g.as_index(A))
    if idx.size == 0:
        raise EmptySet("uniform_on needs a nonempty set")
    return Dist(g, idx, np.full(idx.size, 1.0 / idx.size))


def entropy(p: Dist) -> float:
    v = p.p[p.p > 0]
    return float(-(v * np.log(v)).sum())


def renyi(p: Dist, order: int) -> float:
    if order == 0:
        return math.log(p.size)
    if order == 2:
        return float(-math.log(float((p.p**2).sum())))
    raise ValueError("only Renyi orders 0 and 2 are supported")


def kl_divergence(p: Dist, q: Dist) -> float:
    _same_group(p, q)
    qm = q.mass_at(p.idx)
    live = p.p > 0
    if np.any(qm[live] == 0):
        return math.inf
    return float((p.p[live] * np.log(p.p[live] / qm[live])).sum())


def l1_distance(p: Dist, q: Dist) -> float:
    _same_group(p, q)
    union = np.union1d(p.idx, q.idx)
    return float(np.abs(p.mass_at(union) - q.mass_at(union)).sum())


# -- convolution -------------------------------------------------------------


def _conv_fft(g: Group, p: Dist, q: Dist, sign: int) -> Dist:
    a = p.dense().reshape(g.shape)
    b = (q if sign == 1 else q.neg()).dense().reshape(g.shape)
    out = np.fft.ifftn(np.fft.fftn(a) * np.fft.fftn(b)).real.ravel()
    out[out < MASS_FLOOR] = 0.0
    return Dist.from_dense(g, out)


def _conv_direct(g: Group, p: Dist, q: Dist, sign: int) -> Dist:
    idx, vals = kernels.conv_direct(g, p.idx, p.p, q.idx, q.p, sign)
    return Dist.from_arrays(g, idx, vals)


def convolve(p: Dist, q: Dist, sign: int = 1, method: str = "auto") -> Dist:
    """Law of X' + sign*Y' for independent X' ~ p, Y' ~ q."""
    g = _same_group(p, q)
    if sign not in (1, -1):
        raise ValueError("sign must be +1 or -1")
    caps = get_caps()
    if p.size == 1:
        out = q if sign == 1 else q.neg()
        return out.translate(int(p.idx[0])) if p.idx[0] else out
    if q.size == 1 and sign == 1:
        return p.translate(int(q.idx[0]))
    pairs = p.size * q.size
    if method == "auto":
        if pairs <= caps.direct_pairs and g.order <= caps.enum_order:
            method = "direct"
        elif g.order <= caps.dft_order:
            method = "fft"
        else:
            raise CapExceeded(
                f"convolution of {p.size}x{q.size} atoms in a group of order {g.order}"
            )
    if method == "direct":
        require(g.order, "enum_order", "dense accumulator")
        return _conv_direct(g, p, q, sign)
    if method == "fft":
        require(g.order, "dft_order", "FFT convolution")
        return _conv_fft(g, p, q, sign)
    raise ValueError(f"unknown method {method!r}")


def iterate_sum(p: Dist, n: int) -> Dist:
    """Law of nX (n iid copies) by exponentiation by squaring."""
    if n < 1:
        raise ValueError("n must be >= 1")
    result = None
    base = p
    while True:
        if n & 1:
            result = base if result is None else convolve(result, base)
        n >>= 1
        if not n:
            return result
        base = convolve(base, base)


def product(p: Dist, q: Dist) -> Dist:
    """Law of the independent pair (X, Y) on G x H."""
    g = p.group.product(q.group)
    idx = (p.idx[:, None] * q.group.order + q.idx[None, :]).ravel()
    return Dist(g, idx.copy(), (p.p[:, None] * q.p[None, :]).ravel())


def push_forward(pi: Homomorphism, p: Dist) -> Dist:
    if p.group != pi.source:
        raise GroupMismatch("distribution does not live on the homomorphism's source")
    return Dist.from_arrays(pi.target, pi.apply_index(p.idx), p.p)


# -- conditioning on sums ------------------------------------------------------


def _fiber_rows(p: Dist, rest: Dist, total: Dist, ts: np.ndarray) -> np.ndarray:
    """Matrix of p(x) * rest(t - x) / total(t) over (t in ts, x in supp p)."""
    g = p.group
    diff = g.add(ts[:, None], p.idx[None, :], -1)
    rows = rest.mass_at(diff) * p.p[None, :]
    return rows / total.mass_at(ts)[:, None]


def cond_on_sum(p: Dist, n: int, t) -> Dist:
    """Law of X_1 given X_1 + ... + X_n = t."""
    if n < 2:
        raise ValueError("n must be >= 2")
    rest = iterate_sum(p, n - 1)
    return cond_on_pair_sum(p, rest, t)


def cond_on_pair_sum(p: Dist, q: Dist, t) -> Dist:
    """Law of X given X + Y = t for independent X ~ p, Y ~ q."""
    g = _same_group(p, q)
    ti = g.flat(t)
    total = convolve(p, q)
    w = float(total.mass_at(np.array([ti]))[0])
    if w <= 0:
        raise ZeroProbabilityFiber(f"P(sum = {g.element(ti)}) = 0")
    row = _fiber_rows(p, q, total, np.array([ti], dtype=np.int64))[0]
    return Dist.from_arrays(g, p.idx, row)


@dataclass(frozen=True, eq=False)
class FiberFamily:
    """Fibers of X given the sum of n iid copies, keyed by flat index t."""

    base: Dist
    n: int
    ts: np.ndarray
    weights: np.ndarray
    fibers: list = field(repr=False)

    def items(self):
        return zip(self.ts.tolist(), self.weights.tolist(), self.fibers)

    def fiber(self, t) -> Dist:
        ti = self.base.group.flat(t)
        pos = int(np.searchsorted(self.ts, ti))
        if pos >= self.ts.size or self.ts[pos] != ti:
            raise KeyError(t)
        return self.fibers[pos]

    def mixture(self) -> np.ndarray:
        """Dense sum_t weight(t) * fiber_t; reproduces the base law."""
        out = np.zeros(self.base.group.order)
        for w, f in zip(self.weights, self.fibers):
            out[f.idx] += w * f.p
        return out

    def conditional_entropy(self) -> float:
        return float(sum(w * entropy(f) for w, f in zip(self.weights, self.fibers)))


def iter_fibers(p: Dist, rest: Dist, total: Dist | None = None,
                chunk: int = 1 << 20) -> Iterator[tuple[int, float, Dist]]:
    """Yield (t, P(X+Y=t), law of X | X+Y=t) in increasing t for Y ~ rest.

    Fibers with weight below the floor are skipped.
    """
    g = _same_group(p, rest)
    if total is None:
        total = convolve(p, rest)
    ts = total.idx[total.p >= FIBER_WEIGHT_FLOOR]
    step = max(1, chunk // max(1, p.size))
    for lo in range(0, ts.size, step):
        block = ts[lo:lo + step]
        rows = _fiber_rows(p, rest, total, block)
        wts = total.mass_at(block)
        for t, w, row in zip(block.tolist(), wts.tolist(), rows):
            nz = row > 0
            yield t, w, Dist.from_arrays(g, p.idx[nz], row[nz])


def fiber_family(p: Dist, n: int) -> FiberFamily:
    if n < 2:
        raise ValueError("n must be >= 2")
    rest = iterate_sum(p, n - 1)
    return family_from_pair(p, rest, n)


def family_from_pair(p: Dist, rest: Dist, n: int = 2) -> FiberFamily:
    ts, ws, fs = [], [], []
    for t, w, f in iter_fibers(p, rest):
        ts.append(t)
        ws.append(w)
        fs.append(f)
    return FiberFamily(p, n, np.array(ts, dtype=np.int64), np.array(ws), fs)
