"""Exact matrices over ZZ, QQ and GF(p)."""

import pytest

from py_rigidsq.errors import DomainError
from py_rigidsq.exactlin import (
    QQ_BASE,
    ZZ_BASE,
    BaseRing,
    ExactMatrix,
    Lattice,
    Scalar,
    integer_matrix,
    invariant_factors,
    kernel_basis,
    smith_normal_form,
    solve_linear,
)


@pytest.mark.parametrize("text", ["GF(5)", "F5", "Fp5", "Fp 5", "GF5"])
def test_parse_prime_fields(text):
    assert BaseRing.parse(text) == BaseRing("GF", 5)


def test_parse_rejects_garbage():
    with pytest.raises(DomainError):
        BaseRing.parse("RR")


def test_gf_needs_prime():
    with pytest.raises(DomainError):
        BaseRing("GF", 4)
    assert str(BaseRing("GF", 5)) == "GF(5)"
    assert not ZZ_BASE.is_field
    assert QQ_BASE.is_field


def test_scalar_division():
    assert Scalar.of(ZZ_BASE, 6) / 2 == 3
    with pytest.raises(DomainError):
        Scalar.of(ZZ_BASE, 3) / 2
    with pytest.raises(DomainError):
        Scalar.of(QQ_BASE, 3) / 0
    assert str(Scalar.of(QQ_BASE, 3) / 2) == "3/2"


def test_scalar_mixing_bases():
    with pytest.raises(DomainError):
        Scalar.of(QQ_BASE, 1) + Scalar.of(ZZ_BASE, 1)


def test_gf_arithmetic_wraps():
    F5 = BaseRing("GF", 5)
    assert Scalar.of(F5, 3) + 4 == 2
    assert Scalar.of(F5, 1) / 2 == 3


def test_matmul_shape_mismatch():
    a = integer_matrix([[1, 2]])
    with pytest.raises(DomainError):
        a @ a


def test_matmul_and_to_lists():
    a = integer_matrix([[1, 2], [3, 4]])
    assert (a @ ExactMatrix.identity(ZZ_BASE, 2)) == a
    assert a.to_lists() == [["1", "2"], ["3", "4"]]
    assert a.det() == -2
    assert a.rank() == 2


def test_smith_form_verifies():
    m = integer_matrix([[2, 4], [6, 8]])
    S, U, V = smith_normal_form(m)
    assert U @ m @ V == S
    assert S.is_diagonal()
    assert [int(d) for d in S.diagonal()] == [2, 4]


def test_smith_form_rejects_rationals():
    with pytest.raises(DomainError):
        smith_normal_form(ExactMatrix.from_rows(QQ_BASE, [[1]]))


@pytest.mark.parametrize(
    "rows, expected",
    [
        ([[2, 0], [0, 3]], [1, 6]),
        ([[2, 4], [6, 8]], [2, 4]),
        ([[0, 0], [0, 0]], []),
        ([[1, 2, 3]], [1]),
    ],
)
def test_invariant_factors(rows, expected):
    assert invariant_factors(integer_matrix(rows)) == expected


def test_kernel_over_field():
    m = ExactMatrix.from_rows(QQ_BASE, [[1, 1]])
    assert kernel_basis(m) == [(-1, 1)]


def test_kernel_over_integers_is_a_lattice_basis():
    m = integer_matrix([[2, 4]])
    (v,) = kernel_basis(m)
    assert m.apply(v) == (0,)
    assert abs(int(v[0])) == 2 and abs(int(v[1])) == 1


def test_solve_linear():
    assert solve_linear(integer_matrix([[2]]), [4]) == (2,)
    assert solve_linear(integer_matrix([[2]]), [3]) is None
    x = solve_linear(ExactMatrix.from_rows(QQ_BASE, [[2]]), [3])
    assert str(Scalar(QQ_BASE, x[0])) == "3/2"
    with pytest.raises(DomainError):
        solve_linear(integer_matrix([[2]]), [1, 2])


def test_solve_inconsistent_field_system():
    m = ExactMatrix.from_rows(QQ_BASE, [[1, 1], [1, 1]])
    assert solve_linear(m, [1, 2]) is None


def test_lattice_cosets():
    L = Lattice.spanned_by(1, [(6,)])
    assert L.rank == 1
    assert L.reduce((7,)) == (1,)
    assert L.contains((12,))
    assert not L.contains((4,))


def test_lattice_two_dimensional():
    L = Lattice.spanned_by(2, [(2, 0), (0, 3)])
    assert L.contains((4, 6))
    assert L.reduce((5, 4)) == L.reduce((1, 1))
