"""Test-set generators: progressions, boxes, subgroups with noise, box times
a spread set, and centred binomial laws."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from math import comb

import numpy as np

from .config import require
from .dist import Dist, product
from .groups import Group


@dataclass(eq=False)
class Scenario:
    name: str
    group: Group
    A: np.ndarray
    # largest n for which n-fold sums of A do not wrap around in any coordinate;
    # None when A spans a whole subgroup and wrap-around is intended
    wrap_free_fold: int | None = None
    meta: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {"name": self.name, "group": self.group.to_json(),
                "set": [list(self.group.element(i)) for i in self.A.tolist()],
                "wrap_free_fold": self.wrap_free_fold, "meta": self.meta}


def _fold(span: int, n: int) -> int:
    """max k with k * span < n (span = max - min of the coordinate)."""
    return (n - 1) // span if span else None


def ap(N: int, length: int, step: int = 1, start: int = 0) -> Scenario:
    g = Group((N,))
    require(N, "enum_order", "scenario group")
    A = np.unique((start + step * np.arange(length)) % N)
    return Scenario(f"ap_{length}_{step}", g, A, _fold(step * (length - 1), N),
                    {"length": length, "step": step, "start": start})


def box(N: int, side: int, dim: int) -> Scenario:
    g = Group((N,) * dim)
    require(g.order, "enum_order", "scenario group")
    pts = np.array(list(itertools.product(range(side), repeat=dim)), dtype=np.int64)
    return Scenario(f"box_{side}^{dim}", g, np.unique(g.from_coords(pts)), _fold(side - 1, N),
                    {"side": side, "dim": dim})


def coset(N: int, step: int, shift: int = 0) -> Scenario:
    """The coset shift + step Z/N of the subgroup generated by step (step | N)."""
    if N % step:
        raise ValueError("step must divide N")
    g = Group((N,))
    A = np.unique((shift + np.arange(0, N, step)) % N)
    return Scenario(f"coset_{step}_{shift}", g, A, None, {"step": step, "shift": shift})


def subgroup_noise(N: int, step: int, noise: int, rng: np.random.Generator) -> Scenario:
    """Subgroup step*Z/N plus ``noise`` random points outside it."""
    base = coset(N, step)
    outside = np.setdiff1d(np.arange(N), base.A)
    extra = rng.choice(outside, size=min(noise, outside.size), replace=False)
    return Scenario(f"subgroup_{step}+{noise}", base.group, np.union1d(base.A, extra), None,
                    {"step": step, "noise": int(extra.size)})


def union_of_aps(N: int, count: int, length: int, spacing: int) -> Scenario:
    """``count`` APs of the given length starting at multiples of ``spacing``."""
    g = Group((N,))
    A = np.unique(np.concatenate([k * spacing + np.arange(length) for k in range(count)]) % N)
    span = (count - 1) * spacing + length - 1
    return Scenario(f"union_{count}x{length}", g, A, _fold(span, N),
                    {"count": count, "length": length, "spacing": spacing})


def spread_set(N: int, K: int) -> np.ndarray:
    """{1, 2, 4, ..., 2^(K-1)} in Z/N, checked to have pairwise distinct sums."""
    gam = np.array([2 ** i for i in range(K)], dtype=np.int64)
    if gam[-1] * 2 >= N:
        raise ValueError("N too small for distinct pairwise sums")
    sums = [(int(a) + int(b)) % N for a, b in itertools.combinations_with_replacement(gam, 2)]
    assert len(set(sums)) == len(sums)
    return gam


def a2_product(N1: int, side: int, N2: int, K: int) -> Scenario:
    """[0, side) x {2^i : i < K} inside Z/N1 x Z/N2."""
    g = Group((N1, N2))
    gam = spread_set(N2, K)
    pts = np.array([(a, b) for a in range(side) for b in gam.tolist()], dtype=np.int64)
    return Scenario(f"a2_{side}x{K}", g, np.unique(g.from_coords(pts)),
                    _fold(side - 1, N1), {"side": side, "K": K, "gamma": gam.tolist()})


def binomial_1d(n: int, N: int | None = None) -> Dist:
    """Binomial(n, 1/2) - floor(n/2) on Z/N; default N = 2n + 1 keeps differences wrap-free."""
    N = 2 * n + 1 if N is None else N
    if N < 2 * n + 1:
        raise ValueError("N must be at least 2n + 1 for wrap-free differences")
    g = Group((N,))
    k = np.arange(n + 1)
    p = np.array([comb(n, int(i)) for i in k], dtype=float) / 2.0 ** n
    return Dist.from_arrays(g, (k - n // 2) % N, p)


def binomial_product(n: int, dim: int, N: int | None = None) -> Dist:
    one = binomial_1d(n, N)
    out = one
    for _ in range(dim - 1):
        out = product(out, one)
    return out


def suite(seed: int = 0) -> list[Scenario]:
    """Twenty small sets mixing progressions, boxes, unions and box-times-spread products."""
    rng = np.random.default_rng(seed)
    out = [
        ap(101, 10), ap(1009, 16), ap(4096, 12, 3), ap(10007, 16), ap(257, 20, 5, 7),
        box(64, 3, 2), box(32, 4, 2), box(16, 2, 3), box(128, 5, 2),
        union_of_aps(1024, 2, 6, 100), union_of_aps(2048, 3, 5, 300),
        union_of_aps(4096, 4, 4, 500),
        a2_product(64, 4, 64, 3), a2_product(32, 3, 128, 4), a2_product(128, 6, 32, 2),
        coset(96, 8, 3), subgroup_noise(128, 16, 2, rng),
    ]
    for _ in range(3):
        N = int(rng.integers(200, 2000))
        out.append(ap(N, int(rng.integers(5, 15)), int(rng.integers(1, 4)), int(rng.integers(0, N))))
    return out


KINDS = {"ap": ap, "box": box, "coset": coset, "union": union_of_aps, "a2": a2_product,
         "binomial": binomial_product}
