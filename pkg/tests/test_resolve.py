"""Koszul complexes, semi-free algebra and module resolutions."""

import pytest

from py_rigidsq.dgalgebra import dg_validate
from py_rigidsq.dgcore import module_complex
from py_rigidsq.dgmodule import FlatModule
from py_rigidsq.errors import CertificateError, DomainError
from py_rigidsq.exactlin import QQ_BASE
from py_rigidsq.polyring import FPModule, RingMap, polynomial_ring
from py_rigidsq.resolve import (
    DEFAULT_DEPTH,
    TraceEntry,
    finite_kprojective_resolution,
    flat_resolution,
    koszul,
    lift_dg_morphism,
    redundant_resolution,
    semifree_algebra_resolution,
    semifree_module_resolution,
)


class TestKoszul:
    def test_integers_mod_two(self, Z):
        K = koszul(Z, [2])
        assert K.length == 1
        assert K.cohomology(0).describe() == "Z/2; 1 gen / 1 rel"
        assert K.is_acyclic()
        assert K.augmentation_check().ok

    def test_regular_sequence(self, Qxy):
        K = koszul(Qxy, ["x", "y"])
        assert K.cohomology(0).invariants().dimension == 1
        assert K.is_acyclic()
        assert K.augmentation_check().ok

    def test_repeated_element_is_not_regular(self, Qx):
        K = koszul(Qx, ["x", "x"])
        assert not K.is_acyclic()
        assert not K.cohomology(-1).is_zero()

    def test_names_must_match_length(self, Qx):
        with pytest.raises(DomainError):
            koszul(Qx, ["x"], names=["a", "b"])

    def test_quotient(self, Qxy):
        Q, q = koszul(Qxy, ["x"]).quotient()
        assert Q.is_zero("x")
        assert q.is_surjective()


class TestAlgebraResolution:
    def test_trace_line(self):
        assert TraceEntry(1, "t1_0", -1, "2").line() == "stage 1: t1_0 [-1] d = 2"

    def test_integers_onto_z_mod_two(self, Z, Z2):
        res = semifree_algebra_resolution(RingMap(Z, Z2, []))
        assert res.finite
        assert res.exact
        assert res.depth == DEFAULT_DEPTH
        assert res.window() == (-1, 0)
        assert [v.name for v in res.algebra.variables] == ["t1_0"]
        assert res.trace_lines()[0] in ("stage 1: t1_0 [-1] d = 2",
                                        "stage 1: t1_0 [-1] d = -2")
        assert res.verify().ok
        assert dg_validate(res.algebra).ok
        assert res.augmentation_map().failures() == []

    def test_dual_numbers_over_the_field(self, QQ0, dual_numbers):
        res = semifree_algebra_resolution(RingMap(QQ0, dual_numbers, []))
        assert not res.finite
        assert res.exact
        assert res.algebra.ring.variables == ("x",)
        assert res.window() == (-1, 0)
        assert res.verify().ok

    def test_depth_must_be_positive(self, QQ0, dual_numbers):
        with pytest.raises(DomainError):
            semifree_algebra_resolution(RingMap(QQ0, dual_numbers, []), depth=0)

    @pytest.mark.slow
    def test_non_complete_intersection_is_truncated(self, QQ0):
        B = polynomial_ring(QQ_BASE, ["x", "y"], ["x^2", "x*y", "y^2"])
        res = semifree_algebra_resolution(RingMap(QQ0, B, []), depth=2)
        assert not res.exact
        assert res.window() == (-1, 0)
        assert res.verify().ok

    def test_identity_lift(self, Z, Z2):
        res = semifree_algebra_resolution(RingMap(Z, Z2, []))
        assert lift_dg_morphism(res, res).failures() == []


class TestCertificates:
    def test_generators_without_certificates(self, QQ0, dual_numbers):
        u = RingMap(QQ0, dual_numbers, [])
        with pytest.raises(CertificateError):
            finite_kprojective_resolution(u, generators=["x"])
        with pytest.raises(CertificateError):
            finite_kprojective_resolution(u, monic=[[0, 0, 1]])

    def test_certificate_must_be_monic(self, QQ0, dual_numbers):
        u = RingMap(QQ0, dual_numbers, [])
        with pytest.raises(CertificateError):
            finite_kprojective_resolution(u, ["x"], [[0, 0, 2]])

    def test_certificate_must_annihilate(self, QQ0, dual_numbers):
        u = RingMap(QQ0, dual_numbers, [])
        with pytest.raises(CertificateError):
            finite_kprojective_resolution(u, ["x"], [[1, 0, 1]])

    def test_valid_certificate(self, QQ0, dual_numbers):
        res = finite_kprojective_resolution(RingMap(QQ0, dual_numbers, []), ["x"], [[0, 0, 1]])
        assert res.finite
        assert res.algebra.nvars == 0
        assert res.window() == (0, 0)
        assert res.verify().ok


class TestVariants:
    def test_redundant_pair(self, Z, Z2):
        res = semifree_algebra_resolution(RingMap(Z, Z2, []))
        with pytest.raises(DomainError):
            redundant_resolution(res, 0)
        red = redundant_resolution(res)
        assert red.algebra.nvars == 3
        assert len(red.trace) == len(res.trace) + 2
        assert dg_validate(red.algebra).ok

    def test_flat_resolution(self, QQ0, Qx):
        res = flat_resolution(RingMap(QQ0, Qx, []))
        assert res.algebra.nvars == 0
        assert res.algebra.ring is Qx


class TestModuleResolution:
    def test_integers_mod_two(self, Z):
        M = FlatModule(module_complex(FPModule(Z, 1, [(2,)])))
        res = semifree_module_resolution(M, -3)
        assert res.module.ngens == 2
        assert res.module.degrees == [0, -1]
        assert res.window() == (-2, 0)
        assert res.verify().ok
        assert len(res.trace_lines()) == 2
