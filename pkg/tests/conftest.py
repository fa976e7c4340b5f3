"""Independent brute-force oracles and hypothesis strategies shared by the tests.

The oracles work on plain dicts keyed by coordinate tuples and never call the
package's convolution or entropy code.
"""

import itertools
import math

import numpy as np
import pytest
from hypothesis import strategies as st

from acw.dist import Dist
from acw.groups import Group


def brute_add(moduli, a, b, sign=1):
    return tuple((x + sign * y) % n for x, y, n in zip(a, b, moduli))


def brute_conv(moduli, p: dict, q: dict, sign=1) -> dict:
    out = {}
    for (a, pa), (b, qb) in itertools.product(p.items(), q.items()):
        k = brute_add(moduli, a, b, sign)
        out[k] = out.get(k, 0.0) + pa * qb
    return out


def brute_entropy(p: dict) -> float:
    return -sum(v * math.log(v) for v in p.values() if v > 0)


def brute_ruzsa(moduli, p: dict, q: dict) -> float:
    return brute_entropy(brute_conv(moduli, p, q, -1)) - brute_entropy(p) / 2 - brute_entropy(q) / 2


def brute_sumset(moduli, A, B, sign=1) -> set:
    return {brute_add(moduli, a, b, sign) for a in A for b in B}


def binomial_entropy(n: int) -> float:
    return brute_entropy({k: math.comb(n, k) / 2 ** n for k in range(n + 1)})


def as_dict(p: Dist) -> dict:
    return {k: v for k, v in p.pmf.items()}


# -- strategies -----------------------------------------------------------------

moduli_st = st.lists(st.integers(1, 9), min_size=1, max_size=3).filter(
    lambda m: math.prod(m) <= 400)


@st.composite
def group_and_dist(draw, max_support=8, moduli=None):
    mods = draw(moduli_st) if moduli is None else moduli
    g = Group(tuple(mods))
    k = draw(st.integers(1, min(max_support, g.order)))
    idx = draw(st.lists(st.integers(0, g.order - 1), min_size=k, max_size=k, unique=True))
    w = draw(st.lists(st.floats(0.05, 1.0), min_size=k, max_size=k))
    return g, Dist.from_arrays(g, idx, w)


@st.composite
def group_and_dists(draw, count=2, max_support=8):
    g, p = draw(group_and_dist(max_support=max_support))
    out = [p]
    for _ in range(count - 1):
        out.append(draw(group_and_dist(max_support=max_support, moduli=list(g.moduli)))[1])
    return (g, *out)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    mod = __import__("sys").modules.get("test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if results:
        terminalreporter.section("acceptance criteria")
        for n in sorted(results):
            terminalreporter.write_line(results[n])
