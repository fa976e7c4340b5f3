"""Finite abelian groups Z/n_1 x ... x Z/n_k with exact integer arithmetic.

Elements are addressed two ways: as coordinate tuples (the public,
human-facing form) and as flat row-major indices in ``[0, order)`` (the
internal form used by every vectorised routine). Characters are indexed by
the same coordinate tuples as elements.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .config import require
from .errors import DimensionMismatch, IllFormedHom, OrderOverflow, ZeroModulus

_INT64_MAX = 2**63 - 1


@dataclass(frozen=True)
class Group:
    moduli: tuple[int, ...]
    order: int = field(init=False)
    strides: tuple[int, ...] = field(init=False, repr=False)
    lcm: int = field(init=False, repr=False)

    def __post_init__(self):
        mods = tuple(int(n) for n in self.moduli)
        if not mods:
            raise ZeroModulus("a group needs at least one cyclic factor")
        if any(n < 1 for n in mods):
            raise ZeroModulus(f"moduli must be >= 1, got {mods}")
        order = math.prod(mods)
        if order > _INT64_MAX:
            raise OrderOverflow(f"order {order} does not fit in 64 bits")
        strides = []
        s = 1
        for n in reversed(mods):
            strides.append(s)
            s *= n
        object.__setattr__(self, "moduli", mods)
        object.__setattr__(self, "order", order)
        object.__setattr__(self, "strides", tuple(reversed(strides)))
        object.__setattr__(self, "lcm", math.lcm(*mods))

    @property
    def rank(self) -> int:
        return len(self.moduli)

    @property
    def shape(self) -> tuple[int, ...]:
        return self.moduli

    # -- conversions -----------------------------------------------------

    def index(self, elem) -> int:
        """Flat index of one element given as a tuple (or int for cyclic groups)."""
        if isinstance(elem, (int, np.integer)):
            if self.rank != 1:
                raise DimensionMismatch(f"scalar element for a rank-{self.rank} group")
            return int(elem) % self.moduli[0]
        elem = tuple(elem)
        if len(elem) != self.rank:
            raise DimensionMismatch(f"element {elem} has {len(elem)} coords, group has {self.rank}")
        return sum((int(x) % n) * s for x, n, s in zip(elem, self.moduli, self.strides))

    def flat(self, t) -> int:
        """Flat index of ``t``: a coordinate tuple, or an int taken as a flat index."""
        if isinstance(t, (int, np.integer)) and not isinstance(t, bool):
            t = int(t)
            if self.rank == 1:
                return t % self.moduli[0]
            if not 0 <= t < self.order:
                raise DimensionMismatch(f"flat index {t} out of range")
            return t
        return self.index(t)

    def as_index(self, elems) -> np.ndarray:
        """Flat indices for a collection of elements.

        Accepts a 1-D integer array (already flat), a 2-D array of coordinate
        rows, or any iterable of tuples / ints (ints are flat indices).
        """
        if isinstance(elems, np.ndarray):
            if elems.ndim == 1:
                out = elems.astype(np.int64)
                if out.size and (out.min() < 0 or out.max() >= self.order):
                    raise DimensionMismatch("flat index out of range")
                return out
            if elems.ndim == 2:
                if elems.shape[1] != self.rank:
                    raise DimensionMismatch("coordinate rows do not match group rank")
                return self.from_coords(elems)
            raise DimensionMismatch("expected 1-D or 2-D array")
        return np.fromiter((self.flat(e) for e in elems), dtype=np.int64)

    def coords(self, idx) -> np.ndarray:
        """Coordinate rows (n, k) for flat indices."""
        idx = np.asarray(idx, dtype=np.int64)
        return np.stack([(idx // s) % n for n, s in zip(self.moduli, self.strides)], axis=-1)

    def from_coords(self, coords) -> np.ndarray:
        coords = np.asarray(coords, dtype=np.int64)
        out = np.zeros(coords.shape[:-1], dtype=np.int64)
        for i, (n, s) in enumerate(zip(self.moduli, self.strides)):
            out += (coords[..., i] % n) * s
        return out

    def element(self, idx: int) -> tuple[int, ...]:
        idx = int(idx)
        return tuple((idx // s) % n for n, s in zip(self.moduli, self.strides))

    def elements(self) -> np.ndarray:
        require(self.order, "enum_order", "group enumeration")
        return np.arange(self.order, dtype=np.int64)

    # -- arithmetic on flat indices ---------------------------------------

    def add(self, a, b, sign: int = 1) -> np.ndarray:
        """Vectorised a + sign*b on flat indices (numpy broadcasting applies)."""
        a = np.asarray(a, dtype=np.int64)
        b = np.asarray(b, dtype=np.int64)
        if self.rank == 1:
            return (a + sign * b) % self.moduli[0]
        out = np.zeros(np.broadcast_shapes(a.shape, b.shape), dtype=np.int64)
        for n, s in zip(self.moduli, self.strides):
            out += (((a // s) % n + sign * ((b // s) % n)) % n) * s
        return out

    def neg(self, a) -> np.ndarray:
        return self.add(0, a, -1)

    def scale(self, a, k: int) -> np.ndarray:
        """k*a for an integer k."""
        a = np.asarray(a, dtype=np.int64)
        if self.rank == 1:
            return (a * (k % self.moduli[0])) % self.moduli[0]
        out = np.zeros(a.shape, dtype=np.int64)
        for n, s in zip(self.moduli, self.strides):
            out += ((((a // s) % n) * (k % n)) % n) * s
        return out

    def product(self, other: "Group") -> "Group":
        return Group(self.moduli + other.moduli)

    # -- characters --------------------------------------------------------

    def phase_weights(self, chars) -> np.ndarray:
        """Integer weights w with gamma(x) = exp(2 pi i (w . x) / lcm).

        Returns an (m, k) array for m characters given as flat dual indices.
        """
        c = self.coords(np.atleast_1d(np.asarray(chars, dtype=np.int64)))
        scale = np.array([self.lcm // n for n in self.moduli], dtype=np.int64)
        return (c * scale) % self.lcm

    def to_json(self) -> dict:
        return {"moduli": list(self.moduli)}

    @classmethod
    def from_json(cls, obj: dict) -> "Group":
        return make_group(obj["moduli"])


GroupSpec = Group


def make_group(moduli: Sequence[int]) -> Group:
    return Group(tuple(moduli))


def make_element(g: Group, coords) -> tuple[int, ...]:
    if isinstance(coords, (int, np.integer)):
        coords = (coords,)
    coords = tuple(int(c) for c in coords)
    if len(coords) != g.rank:
        raise DimensionMismatch(f"element {coords} has {len(coords)} coords, group has {g.rank}")
    return tuple(c % n for c, n in zip(coords, g.moduli))


def group_op(g: Group, a, b, sign: int = 1) -> tuple[int, ...]:
    a = make_element(g, a)
    b = make_element(g, b)
    return tuple((x + sign * y) % n for x, y, n in zip(a, b, g.moduli))


@dataclass(frozen=True)
class Character:
    """gamma_a(x) = exp(2 pi i sum a_i x_i / n_i)."""

    group: Group
    coords: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "coords", make_element(self.group, self.coords))

    @property
    def index(self) -> int:
        return self.group.index(self.coords)

    def phase(self, x) -> int:
        """Numerator k of the phase k / lcm, exact."""
        g = self.group
        x = make_element(g, x)
        return sum(a * xi * (g.lcm // n) for a, xi, n in zip(self.coords, x, g.moduli)) % g.lcm

    def __call__(self, x) -> complex:
        return cmath.exp(2j * math.pi * self.phase(x) / self.group.lcm)


def char_eval(g: Group, chi: Character, x) -> complex:
    if chi.group != g:
        raise DimensionMismatch("character belongs to a different group")
    return chi(x)


@dataclass(frozen=True)
class Homomorphism:
    """x -> M x reduced mod the target moduli.

    Column j of ``matrix`` must satisfy n_j * M[i][j] = 0 mod m_i for every
    target modulus m_i, otherwise the map is not well defined on the source.
    """

    source: Group
    target: Group
    matrix: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        mat = tuple(tuple(int(v) for v in row) for row in self.matrix)
        if len(mat) != self.target.rank or any(len(r) != self.source.rank for r in mat):
            raise DimensionMismatch(
                f"matrix must be {self.target.rank}x{self.source.rank}"
            )
        for i, m in enumerate(self.target.moduli):
            for j, n in enumerate(self.source.moduli):
                if (mat[i][j] * n) % m:
                    raise IllFormedHom(
                        f"entry ({i},{j})={mat[i][j]} does not kill Z/{n} in Z/{m}"
                    )
        object.__setattr__(self, "matrix", mat)

    def apply_index(self, idx) -> np.ndarray:
        c = self.source.coords(idx)
        m = np.array(self.matrix, dtype=np.int64)
        return self.target.from_coords(c @ m.T)

    def __call__(self, x) -> tuple[int, ...]:
        x = make_element(self.source, x)
        return tuple(
            sum(a * xi for a, xi in zip(row, x)) % m
            for row, m in zip(self.matrix, self.target.moduli)
        )

    @classmethod
    def identity(cls, g: Group) -> "Homomorphism":
        k = g.rank
        return cls(g, g, tuple(tuple(int(i == j) for j in range(k)) for i in range(k)))

    @classmethod
    def addition(cls, g: Group) -> "Homomorphism":
        """(u, v) -> u + v on G x G."""
        k = g.rank
        rows = tuple(tuple(int(j % k == i) for j in range(2 * k)) for i in range(k))
        return cls(g.product(g), g, rows)

    @classmethod
    def projection(cls, g: Group, h: Group, first: bool = True) -> "Homomorphism":
        """(u, v) -> u (or v) on G x H."""
        k, l = g.rank, h.rank
        if first:
            rows = tuple(tuple(int(j == i) for j in range(k + l)) for i in range(k))
            return cls(g.product(h), g, rows)
        rows = tuple(tuple(int(j == k + i) for j in range(k + l)) for i in range(l))
        return cls(g.product(h), h, rows)

    @classmethod
    def trivial(cls, g: Group) -> "Homomorphism":
        return cls(g, Group((1,)), (tuple(0 for _ in g.moduli),))


def hom_apply(pi: Homomorphism, x) -> tuple[int, ...]:
    return pi(x)


def subgroup_from_generators(g: Group, gens: Iterable) -> np.ndarray:
    """Sorted flat indices of the subgroup generated by ``gens``."""
    gidx = g.as_index(list(gens)) if not isinstance(gens, np.ndarray) else g.as_index(gens)
    h = np.zeros(1, dtype=np.int64)
    while True:
        grown = np.union1d(h, g.add(h[:, None], gidx[None, :]).ravel()) if gidx.size else h
        require(grown.size, "enum_order", "subgroup closure")
        if grown.size == h.size:
            break
        h = grown
    # closed under adding generators and finite => closed under + and -
    if gidx.size:
        assert np.isin(g.add(h[:, None], gidx[None, :]), h).all()
    assert np.isin(g.neg(h), h).all()
    return h


def format_element(g: Group, idx: int) -> str:
    return ",".join(str(c) for c in g.element(idx))


def parse_element(g: Group, text: str) -> int:
    parts = [p for p in text.replace(" ", "").split(",") if p != ""]
    return g.index(tuple(int(p) for p in parts))
