"""Graded-commutative DG algebras, their maps and tensor products."""

import pytest

from py_rigidsq.dgalgebra import (
    DGAlgebra,
    DGAlgebraMap,
    GradedVariable,
    augmentation,
    dg_validate,
    tensor_algebras,
    trivial_algebra,
)
from py_rigidsq.errors import DomainError
from py_rigidsq.polyring import RingMap


@pytest.fixture
def exterior(Qxy):
    """Koszul algebra QQ[x, y]<e1, e2> with d(e1) = x, d(e2) = y."""
    return DGAlgebra(Qxy, [GradedVariable("e1", -1), GradedVariable("e2", -1)],
                     [{(0, 0): "x"}, {(0, 0): "y"}])


def test_exterior_products(exterior):
    A = exterior
    e1, e2 = A.var("e1"), A.var("e2")
    assert A.mul(e1, e1) == {}
    assert A.equal(A.mul(e2, e1), A.neg(A.mul(e1, e2)))
    assert A.to_str(A.mul(e1, e2)) == "e1*e2"
    assert A.to_str(A.mul(e2, e1)) == "-e1*e2"


def test_leibniz_on_a_product(exterior):
    A = exterior
    prod = A.mul(A.var("e1"), A.var("e2"))
    assert A.equal(A.d(prod), A.element({(0, 1): "x", (1, 0): "-y"}))
    assert A.d(A.d(prod)) == {}


def test_validates(exterior):
    assert dg_validate(exterior).ok


def test_graded_pieces(exterior):
    assert exterior.monomials(0) == [(0, 0)]
    assert exterior.monomials(-1) == [(0, 1), (1, 0)]
    assert exterior.monomials(-2) == [(1, 1)]
    assert exterior.monomials(-3) == []
    assert exterior.graded_set() == {-1: ["e1", "e2"]}


def test_polynomial_variable_has_powers(Qx):
    A = DGAlgebra(Qx, [GradedVariable("s", -2)], [{}])
    assert A.monomials(-4) == [(2,)]
    assert A.to_str(A.power(A.var("s"), 2)) == "s^2"


def test_nonnegative_degree_is_reported(Qx):
    A = DGAlgebra(Qx, [GradedVariable("z", 0)], [{}])
    assert dg_validate(A).failures == ["z: degree 0 is not negative"]


def test_retained_odd_square_is_reported(Qx):
    A = DGAlgebra(Qx, [GradedVariable("z", -1, square_zero=False)], [{(0,): "x"}])
    assert "z: odd variable with z^2 retained" in dg_validate(A).failures


def test_differential_of_wrong_degree(Qx):
    A = DGAlgebra(Qx, [GradedVariable("z", -2)], [{(0,): "x"}])
    (failure,) = dg_validate(A).failures
    assert failure.endswith("is not of degree -1")


def test_d_squared_is_reported(Qx):
    A = DGAlgebra(Qx, [GradedVariable("e", -1), GradedVariable("f", -2)],
                  [{(0, 0): "x"}, {(1, 0): 1}])
    assert "f: d(d(f)) = x" in dg_validate(A).failures


def test_name_clash_and_arity(Qx):
    with pytest.raises(DomainError):
        DGAlgebra(Qx, [GradedVariable("x", -1)], [{}])
    with pytest.raises(DomainError):
        DGAlgebra(Qx, [GradedVariable("e", -1)], [])


def test_augmentation(exterior, Qxy, QQ0):
    good = augmentation(exterior, RingMap(Qxy, QQ0, [0, 0]))
    assert good.failures() == []
    bad = augmentation(exterior, RingMap(Qxy, QQ0, [1, 0]))
    assert bad.failures() == ["e1: d(w(e1)) != w(d(e1))"]


def test_identity_map(exterior):
    ident = DGAlgebraMap.identity(exterior)
    assert ident.failures() == []
    prod = exterior.mul(exterior.var("e1"), exterior.var("e2"))
    assert ident(prod) == prod


def test_trivial_algebra_is_cached(Qx):
    assert trivial_algebra(Qx) is trivial_algebra(Qx)
    assert trivial_algebra(Qx).nvars == 0


def test_tensor_of_koszul_algebras(Z):
    K = DGAlgebra(Z, [GradedVariable("e", -1)], [{(0,): 2}])
    T = tensor_algebras(K, K, Z)
    assert T.algebra.nvars == 2
    assert dg_validate(T.algebra).ok
    assert T.first.failures() == []
    assert T.second.failures() == []
