import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from acw.bohr import (
    BohrProfile,
    almost_period_set,
    bohr_count,
    bohr_set,
    bohr_size_check,
    bohr_upper_check,
    chang_global,
    dissociated_greedy,
    phase_threshold,
    progression_certificate,
    regular_radius,
    regularity_violation,
    weak_bogolyubov_global,
    weak_bogolyubov_local,
)
from acw.dist import Dist, iterate_sum, uniform_on
from acw.errors import BadRadius, HypothesisFailed, NotRegular
from acw.groups import Group
from acw.kernels import sumset_mask

from conftest import moduli_st


def direct_bohr(g, chars, delta):
    """Complex-arithmetic membership; returns (members, boundary-ambiguous elements)."""
    x = g.coords(np.arange(g.order))
    dev = np.zeros(g.order)
    for c in chars:
        a = np.array(g.element(c))
        ang = 2 * np.pi * (x * (a / np.array(g.moduli))).sum(axis=1)
        dev = np.maximum(dev, np.abs(np.exp(1j * ang) - 1))
    return set(np.flatnonzero(dev <= delta).tolist()), set(np.flatnonzero(np.abs(dev - delta) < 1e-9).tolist())


def test_trivial_bohr_sets():
    g = Group((6, 4))
    assert bohr_set(g, [], 0.3).size == 24
    assert bohr_set(g, [1, 5, 7], 2).size == 24
    with pytest.raises(BadRadius):
        bohr_set(g, [1], 0)


@pytest.mark.parametrize("N", [64, 1024])
def test_cube_rule(N):
    g = Group((N, N))
    chars = [g.index((1, 0)), g.index((0, 1))]
    B = bohr_set(g, chars, 1 / 100)
    bound = N * math.acos(1 - 1 / 20000) / (2 * math.pi)
    c = g.coords(B.members)
    c = np.where(c > N // 2, c - N, c)
    side = int(math.floor(bound))
    assert B.size == (2 * side + 1) ** 2
    assert np.abs(c).max() <= bound


@settings(max_examples=60)
@given(moduli_st, st.data())
def test_membership_matches_direct(mods, data):
    g = Group(tuple(mods))
    chars = data.draw(st.lists(st.integers(0, g.order - 1), max_size=3))
    delta = data.draw(st.floats(0.01, 2.0))
    B = bohr_set(g, chars, delta)
    inside, edge = direct_bohr(g, chars, delta)
    assert set(B.members.tolist()) ^ inside <= edge


@settings(max_examples=60)
@given(moduli_st, st.data())
def test_monotone_symmetric(mods, data):
    g = Group(tuple(mods))
    chars = data.draw(st.lists(st.integers(0, g.order - 1), max_size=3))
    r1 = data.draw(st.floats(0.01, 1.0))
    r2 = data.draw(st.floats(r1, 2.0))
    small, big = bohr_set(g, chars, r1), bohr_set(g, chars, r2)
    assert np.isin(small.members, big.members).all()
    assert np.isin(g.neg(small.members), small.members).all()
    more = bohr_set(g, list(chars) + [1 % g.order], r1)
    assert np.isin(more.members, small.members).all()


def test_size_check_examples():
    g = Group((60,))
    lo, dbl = bohr_size_check(bohr_set(g, [], 0.4))
    assert lo
    ann = [0, 10, 20, 30, 40, 50]        # annihilator of the subgroup 6Z/60
    B = bohr_set(g, ann, 0.05)
    assert B.members.tolist() == list(range(0, 60, 6))
    assert tuple(bohr_size_check(B)) == (True, True)


def test_doubling_bound_random():
    rng = np.random.default_rng(5)
    g = Group((4096,))
    for _ in range(30):
        chars = rng.choice(4096, int(rng.integers(1, 4)), replace=False)
        rho = float(rng.uniform(0.05, 0.9))
        chk = bohr_size_check(bohr_set(g, chars, rho))
        assert chk.doubling_ok in (True, None)


def test_profile_matches_direct_counts():
    g = Group((8, 12))
    prof = BohrProfile(g, [5, 17])
    for delta in (0.1, 0.5, 1.0, 1.7):
        assert prof.count(delta) == bohr_count(g, [5, 17], delta)


def test_phase_threshold_edges():
    assert phase_threshold(12, 2.0) == 6
    assert phase_threshold(12, 1.0) == 2     # 2 sin(pi*2/12) = 1 exactly
    assert phase_threshold(12, 0.99) == 1


def test_regular_radius_examples():
    g = Group((60,))
    assert regular_radius(g, [], 0.1) == 0.1
    rho = regular_radius(g, [0, 10, 20, 30, 40, 50], 0.05)
    assert 0.05 <= rho <= 0.1
    g = Group((8192,))
    chars = [1, 5, 77]
    rho = regular_radius(g, chars, 0.05)
    prof = BohrProfile(g, chars)
    assert regularity_violation(prof, rho, grid=128) <= 0


def test_dissociated_examples():
    g = Group((5, 5, 5))
    assert dissociated_greedy(g, [0]).size == 0
    coord = [g.index((1, 0, 0)), g.index((0, 1, 0)), g.index((0, 0, 1))]
    assert sorted(dissociated_greedy(g, coord).tolist()) == sorted(coord)
    z7 = Group((7,))
    assert dissociated_greedy(z7, [1, 2]).tolist() == [1, 2]
    z4 = Group((4,))
    assert dissociated_greedy(z4, [1, 2]).tolist() == [1, 2]
    assert dissociated_greedy(Group((2,)), [1, 1]).tolist() == [1]


@settings(max_examples=30)
@given(moduli_st, st.data())
def test_dissociated_property(mods, data):
    g = Group(tuple(mods))
    chars = data.draw(st.lists(st.integers(0, g.order - 1), max_size=6))
    lam = dissociated_greedy(g, chars).tolist()
    # no nontrivial signed combination vanishes
    import itertools
    for signs in itertools.product((-1, 0, 1), repeat=len(lam)):
        if any(signs):
            tot = 0
            for s, c in zip(signs, lam):
                tot = int(g.add(tot, c, s))
            assert tot != 0


def test_chang_examples():
    g = Group((64,))
    assert chang_global(g, np.arange(64), 0.5, 1.0).size == 64
    H = np.arange(0, 64, 8)
    B = chang_global(g, H, 0.5, 1.0)
    assert np.isin(H, B.members).all()
    rng = np.random.default_rng(2)
    z512 = Group((512,))
    A = rng.choice(512, 128, replace=False)
    B = chang_global(z512, A, 0.5, 0.5)
    assert B.meta["spectrum_size"] >= 1


def test_bogolyubov_global_examples():
    g = Group((64,))
    res = weak_bogolyubov_global(g, np.arange(64))
    assert res.k == 1 and res.bohr.size == 64 and res.contained
    H = np.arange(0, 64, 4)
    res = weak_bogolyubov_global(g, H)
    assert res.contained and np.isin(H, res.bohr.members).all()
    rng = np.random.default_rng(11)
    g = Group((4096,))
    A = rng.choice(4096, 512, replace=False)
    res = weak_bogolyubov_global(g, A)
    mask = sumset_mask(g, A, A, -1)
    assert res.contained and res.margin >= res.margin_required
    assert mask[res.bohr.members].all() or res.k > 1


def test_bogolyubov_local_examples():
    g = Group((64,))
    B = bohr_set(g, [], 2.0)
    res = weak_bogolyubov_local(B, np.arange(64))
    assert res.k == 1 and res.contained
    ann = [0, 16, 32, 48]
    Bh = bohr_set(g, ann, 0.05)
    res = weak_bogolyubov_local(Bh, Bh.members)
    assert res.k == 1 and res.contained
    g = Group((8192,))
    rho = regular_radius(g, [1, 5], 0.1)
    B = bohr_set(g, [1, 5], rho)
    c = g.coords(B.members)[:, 0]
    A = B.members[(c < 4096)]
    res = weak_bogolyubov_local(B, A)
    assert res.contained and res.margin >= res.margin_required


def test_bogolyubov_local_not_regular():
    g = Group((4096,))
    B = bohr_set(g, [1], 0.015)
    prof = BohrProfile(g, [1])
    if regularity_violation(prof, 0.015) > 0:
        with pytest.raises(NotRegular):
            weak_bogolyubov_local(B, B.members)


def test_almost_period_examples():
    g = Group((48,))
    pt = Dist.point(g, 5)
    Y = uniform_on(g, [0, 1, 2])
    res = almost_period_set(pt, Y, Y, 0.25)
    assert res.S.tolist() == [5] and res.verified
    H = uniform_on(g, range(0, 48, 6))
    res = almost_period_set(H, H, H, 0.25)
    assert res.S.tolist() == list(range(0, 48, 6))
    assert np.isin(res.S, res.bohr.members).all()
    assert res.log_size_slack == pytest.approx(2 * math.log(2), abs=1e-9)
    g = Group((4096,))
    X = uniform_on(g, range(16))
    with pytest.raises(HypothesisFailed):
        almost_period_set(X, X, X, 0.25)
    Y = iterate_sum(X, 45)
    res = almost_period_set(X, Y, X, 0.25)
    assert res.verified and res.mass >= 0.5


def test_bohr_upper_examples():
    g = Group((24,))
    H = uniform_on(g, range(0, 24, 4))
    from acw.pipeline import _search_params
    pc = _search_params(2.0, 1e6)
    res = bohr_upper_check(H, H, 2.0, pc.eps, pc.m, pc.ell, strict=False)
    assert res.bohr.members.tolist() == list(range(0, 24, 4))
    assert res.ok and res.hyp_decay and res.hyp_entropy
    pt = Dist.point(g, 0)
    with pytest.raises(HypothesisFailed):
        bohr_upper_check(pt, pt, 2.0, 0.5, 1, 45)


def test_progression_examples():
    g = Group((60,))
    B = bohr_set(g, [0, 10, 20, 30, 40, 50], 0.01)
    cert = progression_certificate(B, 1)
    assert cert.ratio == 1 and cert.valid
    E = bohr_set(g, [], 0.01)
    assert progression_certificate(E, 3).valid
    assert not progression_certificate(bohr_set(g, [], 0.2), 3).valid
