import cmath

import numpy as np
import pytest
from hypothesis import given, strategies as st

from acw.errors import DimensionMismatch, IllFormedHom, OrderOverflow, ZeroModulus
from acw.groups import (
    Character,
    Group,
    Homomorphism,
    char_eval,
    group_op,
    hom_apply,
    make_element,
    make_group,
    subgroup_from_generators,
)

from conftest import moduli_st


@pytest.mark.parametrize("moduli,order", [([5], 5), ([2, 2, 2], 8), ([1], 1)])
def test_make_group_orders(moduli, order):
    assert make_group(moduli).order == order


def test_bad_moduli():
    with pytest.raises(ZeroModulus):
        make_group([0])
    with pytest.raises(ZeroModulus):
        make_group([])
    with pytest.raises(OrderOverflow):
        make_group([2 ** 40, 2 ** 40])


def test_group_op_examples():
    z5 = make_group([5])
    assert group_op(z5, (3,), (4,)) == (2,)
    assert group_op(z5, (3,), (3,), -1) == (0,)
    f4 = make_group([2, 2])
    assert group_op(f4, (1, 0), (1, 1)) == (0, 1)


def test_make_element_dimension():
    with pytest.raises(DimensionMismatch):
        make_element(make_group([3, 3]), (1,))


def test_char_eval_examples():
    z4, z8 = make_group([4]), make_group([8])
    assert char_eval(z4, Character(z4, (0,)), (3,)) == 1
    assert abs(char_eval(z4, Character(z4, (1,)), (2,)) + 1) < 1e-15
    assert abs(char_eval(z8, Character(z8, (1,)), (1,)) - cmath.exp(2j * cmath.pi / 8)) < 1e-15


def test_hom_examples():
    z5 = make_group([5])
    add = Homomorphism.addition(z5)
    assert hom_apply(add, (2, 3)) == (0,)
    g, h = make_group([3]), make_group([4])
    proj = Homomorphism.projection(g, h)
    assert all(proj((x, y)) == (x,) for x in range(3) for y in range(4))
    z6 = make_group([6])
    assert Homomorphism(z6, z6, ((2,),))((4,)) == (2,)


def test_ill_formed_hom():
    with pytest.raises(IllFormedHom):
        Homomorphism(make_group([3]), make_group([2]), ((1,),))


def test_subgroups():
    z6 = make_group([6])
    assert subgroup_from_generators(z6, [(2,)]).tolist() == [0, 2, 4]
    assert subgroup_from_generators(z6, []).tolist() == [0]
    f8 = make_group([2, 2, 2])
    assert subgroup_from_generators(f8, [(1, 0, 0), (0, 1, 0)]).size == 4


@given(moduli_st, st.data())
def test_flat_roundtrip_and_arithmetic(mods, data):
    g = Group(tuple(mods))
    a, b = (data.draw(st.integers(0, g.order - 1)) for _ in range(2))
    assert g.index(g.element(a)) == a
    ea, eb = g.element(a), g.element(b)
    assert g.element(g.add(a, b)) == tuple((x + y) % n for x, y, n in zip(ea, eb, g.moduli))
    assert int(g.add(g.add(a, b), b, -1)) == a
    assert int(g.add(a, g.neg(a))) == 0


@given(moduli_st, st.data())
def test_characters_are_homomorphisms(mods, data):
    g = Group(tuple(mods))
    c, x, y = (g.element(data.draw(st.integers(0, g.order - 1))) for _ in range(3))
    chi = Character(g, c)
    assert abs(chi(group_op(g, x, y)) - chi(x) * chi(y)) < 1e-12
    w = g.phase_weights([g.index(c)])
    coords = np.array([x])
    assert int((w @ coords.T)[0, 0] % g.lcm) == chi.phase(x)


@given(moduli_st, st.data())
def test_subgroup_closed(mods, data):
    g = Group(tuple(mods))
    gens = [g.element(data.draw(st.integers(0, g.order - 1))) for _ in range(2)]
    h = subgroup_from_generators(g, gens)
    assert g.order % h.size == 0
    sums = g.add(h[:, None], h[None, :], -1)
    assert np.isin(sums, h).all()


def test_json_roundtrip():
    g = make_group([3, 4])
    assert Group.from_json(g.to_json()) == g
