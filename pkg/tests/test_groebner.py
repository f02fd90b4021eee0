"""Buchberger bases for ideals and submodules over a field."""

import pytest
from sympy import QQ

from py_rigidsq.groebner import (
    Engine,
    MonomialOrder,
    buchberger,
    is_groebner,
    monomial_div,
    monomial_lcm,
    standard_monomials,
)


def poly(*terms):
    """Ideal element from (coefficient, exponents) pairs."""
    return {(0, tuple(m)): QQ(c) for c, m in terms}


def test_grevlex_ranks_x_above_y():
    order = MonomialOrder.grevlex(2)
    assert order.key((1, 0)) > order.key((0, 1))
    assert order.key((0, 2)) > order.key((1, 0))


def test_lex_ranks_x_above_any_power_of_y():
    order = MonomialOrder.lex(2)
    assert order.key((1, 0)) > order.key((0, 5))


def test_unknown_order():
    with pytest.raises(ValueError):
        MonomialOrder.named("foo", 2)
    assert MonomialOrder.named("degrevlex", 2) == MonomialOrder.grevlex(2)


def test_block_order_must_partition():
    with pytest.raises(ValueError):
        MonomialOrder.block(3, [[0], [1]])


def test_monomial_helpers():
    assert monomial_div((2, 1), (1, 1)) == (1, 0)
    assert monomial_div((0, 1), (1, 0)) is None
    assert monomial_lcm((2, 0), (1, 3)) == (2, 3)


def test_reduced_basis_lex():
    F = [poly((1, (2, 0)), (-1, (0, 0))), poly((1, (1, 1)), (-1, (0, 0)))]
    G = buchberger(F, QQ, MonomialOrder.lex(2), ideal=True)
    assert G == [
        poly((1, (1, 0)), (-1, (0, 1))),
        poly((1, (0, 2)), (-1, (0, 0))),
    ]
    assert is_groebner(G, Engine(QQ, MonomialOrder.lex(2)))


def test_unit_ideal_collapses():
    F = [poly((1, (1,)),), poly((1, (1,)), (1, (0,)))]
    G = buchberger(F, QQ, MonomialOrder.grevlex(1), ideal=True)
    assert G == [poly((1, (0,)),)]


def test_module_basis_is_groebner():
    order = MonomialOrder.grevlex(2)
    # rows [x, y] and [y, 0] in QQ[x, y]^2
    F = [
        {(0, (1, 0)): QQ(1), (1, (0, 1)): QQ(1)},
        {(0, (0, 1)): QQ(1)},
    ]
    G = buchberger(F, QQ, order)
    assert is_groebner(G, Engine(QQ, order))


def test_standard_monomials():
    assert standard_monomials([(2,)], 1) == [(0,), (1,)]
    assert standard_monomials([(2, 0), (1, 1), (0, 2)], 2) == [(0, 0), (0, 1), (1, 0)]
    assert standard_monomials([(1, 1)], 2) is None
    assert standard_monomials([(0, 0)], 2) == []
