import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from acw.dist import uniform_on
from acw.errors import Infeasible
from acw.groups import Group
from acw.kernels import sumset_mask
from acw.pipeline import (
    _search_params,
    cover_holds,
    freiman_cover,
    packing_bound,
    ruzsa_cover,
    smallest_m,
    solve_params,
    structure_from_growth,
    verify_params,
)
from acw.tau import small_growth_index


def test_ell_rule():
    for d in (1.5, 2.0, 3.0, 7.25):
        ell = small_growth_index(d)
        assert ell > 32 * d * math.log(d) >= ell - 1


def test_search_params_d2_frozen():
    pc = _search_params(2.0, 1e6)
    # frozen from an mpmath re-evaluation of the four constraints
    assert (pc.ell, pc.m, pc.r, pc.j) == (45, 219306999688, 392, 15)
    assert verify_params(pc) == {1: True, 2: True, 3: True, 4: False, "ell": True}


def test_m_is_minimal():
    pc = _search_params(2.0, 1e6)
    with mpmath.workdps(50):
        def ok(m):
            lm = mpmath.mpf(pc.ell) * m
            return (1 - mpmath.mpf(pc.eps) ** 2 / 2) ** m <= \
                mpmath.exp(-2 * mpmath.log(lm) - 60 * mpmath.log(2)) / 2
        assert ok(pc.m) and not ok(pc.m - 1)


def test_d2_c1e4_infeasible():
    with pytest.raises(Infeasible) as exc:
        solve_params(2.0, 1e4)
    assert exc.value.binding == 4


def test_feasible_when_c_large():
    pc = solve_params(2.0, 1e12)
    assert pc.feasible and all(verify_params(pc).values())


@settings(max_examples=20, deadline=None)
@given(st.floats(1.1, 6.0), st.floats(6.0, 14.0))
def test_doubling_c_keeps_feasibility(d, logc):
    C = 10 ** logc
    try:
        solve_params(d, C)
    except Infeasible:
        return
    solve_params(d, 2 * C)


@settings(max_examples=20, deadline=None)
@given(st.floats(1.1, 8.0))
def test_params_independently_verified(d):
    pc = _search_params(d, 1e6)
    v = verify_params(pc)
    assert v[1] and v[2] and v[3] and v["ell"]
    assert smallest_m(d, pc.ell, pc.eps) == pc.m


def test_cover_examples():
    g = Group((60,))
    H = np.arange(0, 60, 5)
    t = ruzsa_cover(g, H, H)
    assert t.tolist() == [0] and cover_holds(g, H, t, H)
    A = np.array([1, 7, 30, 44])
    assert ruzsa_cover(g, A, [0]).tolist() == A.tolist()
    g = Group((1000,))
    A = np.arange(100)
    S = np.arange(50)
    t = ruzsa_cover(g, A, S)
    assert len(t) <= 3 and cover_holds(g, A, t, S)


@settings(max_examples=40)
@given(st.lists(st.integers(0, 120), min_size=1, max_size=25, unique=True),
       st.lists(st.integers(0, 120), min_size=1, max_size=6, unique=True))
def test_cover_properties(A, S):
    g = Group((127,))
    A, S = np.array(sorted(A)), np.array(sorted(S))
    t = ruzsa_cover(g, A, S)
    assert cover_holds(g, A, t, S)
    assert len(t) <= packing_bound(g, A, S)
    # translates are disjoint
    shifted = np.concatenate([g.add(S, x) for x in t])
    assert np.unique(shifted).size == shifted.size
    # independent recheck of the covering
    diffs = {int(a - b) % 127 for a in S for b in S}
    assert all(any((int(a) - int(x)) % 127 in diffs for x in t) for a in A)


def test_structure_subgroup():
    g = Group((96,))
    A = np.arange(0, 96, 8)
    cert = structure_from_growth(g, A, uniform_on(g, A), 0.0)
    assert cert.S.tolist() == A.tolist()
    assert np.isin(A, cert.B_small.members).all()
    assert cert.num_translates == 1 and cert.size_ratio >= 1
    assert cert.progression.valid and cert.cover_valid


def test_freiman_cover_coset_and_union():
    g = Group((96,))
    cert = freiman_cover(g, np.arange(3, 96, 8))
    assert cert.K == 1 and cert.cover_valid and cert.trace.steps == []
    g = Group((4096,))
    A = np.concatenate([k * 500 + np.arange(8) for k in (0, 1, 3, 7)])
    cert = freiman_cover(g, A)
    ref = len({(a + b) % 4096 for a in A for b in A}) / A.size
    assert cert.K == pytest.approx(ref)
    assert cert.cover_valid
    js = cert.to_json()
    assert js["schema"] == "acw-cert/1" and "tau_trace" in js
    assert set(js["hypotheses"]) >= {"growth_order", "distance_to_uniform", "small_growth",
                                     "progression_valid", "params_feasible"}


def test_strict_mode_raises():
    from acw.errors import HypothesisFailed
    g = Group((96,))
    A = np.arange(0, 96, 8)
    with pytest.raises(HypothesisFailed):
        structure_from_growth(g, A, uniform_on(g, A), 0.0, strict=True)
