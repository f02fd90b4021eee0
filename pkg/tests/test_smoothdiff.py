"""Differential forms, Koszul Ext, generalized fractions and etale splittings."""

import pytest

from py_rigidsq.errors import CertificateError, DomainError
from py_rigidsq.exactlin import QQ_BASE
from py_rigidsq.polyring import FPModule, RingMap, polynomial_ring
from py_rigidsq.smoothdiff import (
    Chart,
    GeneralizedFraction,
    chart_independence,
    conormal_iso,
    diagonal_square_check,
    etale_decomposition,
    exterior_power,
    ext_via_koszul,
    fraction_change_of_sequence,
    fundamental_iso,
    is_regular_sequence,
    kaehler,
    localized_diagonal,
    matrix_determinant,
    omega_composition,
    omega_power,
    wedge,
)


@pytest.fixture
def split():
    """QQ[x]/(x^2 - 1), etale over QQ."""
    return polynomial_ring(QQ_BASE, ["x"], ["x^2 - 1"])


@pytest.fixture
def cusp():
    return polynomial_ring(QQ_BASE, ["x", "y"], ["y^2 - x^3"])


class TestForms:
    def test_wedge_is_alternating(self, Qxy):
        one = Qxy.one
        assert wedge(Qxy, {(1,): one}, {(0,): one}) == {(0, 1): -one}
        assert wedge(Qxy, {(0,): one}, {(0,): one}) == {}

    def test_differential(self, QQ0, Qx):
        omega = kaehler(RingMap(QQ0, Qx, []))
        assert omega.names == ["dx"]
        assert Qx.to_str(omega.differential("x^3")[0]) == "3*x^2"
        assert omega.rank() == 1

    def test_singular_curve_is_not_free(self, QQ0, cusp):
        assert kaehler(RingMap(QQ0, cusp, [])).rank() is None

    def test_etale_algebra_has_no_forms(self, QQ0, split):
        assert kaehler(RingMap(QQ0, split, [])).rank() == 0

    def test_relative_forms(self, Qx, Qxy):
        omega = kaehler(RingMap.by_names(Qx, Qxy))
        assert omega.rank() == 1

    def test_exterior_powers(self, QQ0, Qxy):
        omega = kaehler(RingMap(QQ0, Qxy, []))
        top = exterior_power(omega, 2)
        assert top.subsets == [(0, 1)]
        assert top.describe(0) == "dx^dy"
        assert exterior_power(omega, 3).module.ngens == 0
        assert omega_power(RingMap(QQ0, Qxy, []), 0).ngens == 1
        with pytest.raises(DomainError):
            exterior_power(omega, -1)

    def test_form_of_the_wrong_degree(self, QQ0, Qxy):
        top = exterior_power(kaehler(RingMap(QQ0, Qxy, [])), 2)
        with pytest.raises(DomainError):
            top.vector({(0,): Qxy.one})


class TestKoszulExt:
    def test_regular_sequences(self, Qx, Qxy):
        assert is_regular_sequence(Qxy, ["x", "y"])
        assert is_regular_sequence(Qx, [])
        assert not is_regular_sequence(Qx, ["x", "x"])

    def test_ext_of_the_residue_field(self, Qxy):
        R = FPModule(Qxy, 1)
        assert ext_via_koszul(Qxy, ["x", "y"], R, 2).dimension() == 1
        assert ext_via_koszul(Qxy, ["x", "y"], R, 1).is_zero()
        assert ext_via_koszul(Qxy, ["x", "y"], R, 0).is_zero()
        assert ext_via_koszul(Qxy, ["x", "y"], R, 3).is_zero()

    def test_irregular_sequence_is_refused(self, Qx):
        with pytest.raises(CertificateError):
            ext_via_koszul(Qx, ["x", "x"], FPModule(Qx, 1), 1)


class TestFractions:
    def test_fraction_classes(self, Qx):
        M = FPModule(Qx, 1)
        x = Qx.var("x")
        one = GeneralizedFraction(Qx, (Qx.one,), (x,))
        assert one.describe() == "|(1) / x|"
        assert not one.is_zero(one.dual(M))
        killed = GeneralizedFraction(Qx, (x,), (x,))
        assert killed.is_zero(killed.dual(M))

    def test_determinant(self, Qx):
        assert Qx.to_str(matrix_determinant(Qx, [[0, 1], [1, 0]])) == "-1"
        assert matrix_determinant(Qx, []) == Qx.one
        with pytest.raises(DomainError):
            matrix_determinant(Qx, [[1, 2]])

    def test_change_of_sequence(self, Qx):
        x = Qx.var("x")
        fr = GeneralizedFraction(Qx, (Qx.one,), (x,))
        new = fraction_change_of_sequence(fr, [[2]])
        assert [Qx.to_str(a) for a in new.sequence] == ["2*x"]
        assert [Qx.to_str(c) for c in new.numerator] == ["2"]

    def test_change_needs_a_unit(self, Qx):
        fr = GeneralizedFraction(Qx, (Qx.one,), (Qx.var("x"),))
        with pytest.raises(DomainError):
            fraction_change_of_sequence(fr, [["x"]])
        with pytest.raises(DomainError):
            fraction_change_of_sequence(fr, [[1, 0], [0, 1]])


class TestFundamentalIso:
    def test_affine_line(self, QQ0, Qx):
        iso = fundamental_iso(RingMap(QQ0, Qx, []))
        assert iso.degree == 1
        assert iso.vanishing_degrees() == {0: True}
        assert iso.is_iso()
        assert iso.pulls_back()
        assert chart_independence(iso, [[2]])

    @pytest.mark.slow
    def test_affine_plane(self, QQ0, Qxy):
        iso = fundamental_iso(RingMap(QQ0, Qxy, []))
        assert iso.degree == 2
        assert iso.vanishing_degrees() == {0: True, 1: True}
        assert iso.is_iso()
        assert chart_independence(iso, [[0, 1], [1, 0]])

    def test_relations_need_a_chart(self, QQ0, dual_numbers):
        with pytest.raises(CertificateError):
            fundamental_iso(RingMap(QQ0, dual_numbers, []))

    def test_chart_must_cut_out_the_diagonal(self, QQ0, Qx):
        with pytest.raises(CertificateError):
            fundamental_iso(RingMap(QQ0, Qx, []), Chart(1, ("x1 + x2",)))


class TestDiagonal:
    def test_square_of_forms(self, QQ0, Qx):
        assert diagonal_square_check(RingMap(QQ0, Qx, [])).is_iso()

    def test_conormal(self, QQ0, Qxy):
        assert conormal_iso(RingMap(QQ0, Qxy, [])).is_iso()

    def test_forms_along_a_tower(self, QQ0, Qx, Qxy):
        assert omega_composition(RingMap(QQ0, Qx, []), RingMap.by_names(Qx, Qxy)).is_iso()

    def test_open_diagonal(self, QQ0, split):
        loc = localized_diagonal(RingMap(QQ0, split, []), "x1 + x2")
        assert loc.is_iso
        assert loc.tensor_dimension == 4

    def test_element_must_be_a_unit_on_the_diagonal(self, QQ0, split):
        with pytest.raises(DomainError):
            localized_diagonal(RingMap(QQ0, split, []), "x1 - x2")


class TestEtale:
    @pytest.mark.parametrize("relation", ["x^2 - 1", "x^2 + 1"])
    def test_idempotent(self, QQ0, relation):
        B = polynomial_ring(QQ_BASE, ["x"], [relation])
        dec = etale_decomposition(RingMap(QQ0, B, []))
        assert all(dec.checks().values())
        assert dec.round_trip("x1*x2 + x1")

    def test_ramified_algebra(self, QQ0, dual_numbers):
        with pytest.raises(CertificateError):
            etale_decomposition(RingMap(QQ0, dual_numbers, []))
