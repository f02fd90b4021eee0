"""Rigid complexes, traces, f^sharp and the existence pipeline."""

import dataclasses

import pytest

from py_rigidsq.dgcore import Complex, InducedMap, module_complex
from py_rigidsq.errors import CertificateError, DomainError, UnsupportedRingError
from py_rigidsq.exactlin import BaseRing, QQ_BASE
from py_rigidsq.polyring import FPModule, RingMap, localize, polynomial_ring
from py_rigidsq.rigidity import (
    RigidityReport,
    coalgebra_check,
    concentrated_degree,
    cyclic_isomorphism,
    dual_module,
    endomorphisms_are_scalars,
    flat_shriek,
    q_sharp,
    q_sharp_rigid,
    rigid_auto_scan,
    rigid_existence,
    scalar_rigid_check,
    sharp,
    sharp_coherence,
    shriek_coherence,
    tautological_rigid,
    tensor_rigid,
    trace_morphism,
    trace_scan,
    unit_candidates,
    verify_rigid,
    verify_rigid_morphism,
)


class TestPieces:
    def test_concentrated_degree(self, Qx):
        x_map = Complex(Qx, {-1: 1, 0: 1}, {-1: Qx.matrix(1, 1, [["x"]])})
        assert concentrated_degree(x_map) == 0
        assert concentrated_degree(Complex(Qx, {})) is None
        with pytest.raises(DomainError):
            concentrated_degree(Complex(Qx, {-1: 1, 0: 1}))

    def test_cyclic_isomorphism(self, Qx):
        point = FPModule(Qx, 1, [["x"]])
        H = cyclic_isomorphism(point, FPModule(Qx, 1, [["x"]]), scale=2)
        assert H is not None
        assert H.is_iso()
        assert cyclic_isomorphism(point, FPModule(Qx, 1)) is None

    def test_zero_modules(self, Qx):
        H = cyclic_isomorphism(FPModule(Qx, 0), FPModule(Qx, 0), degree=3)
        assert H.degree == 3
        assert H.columns == []

    def test_report_statuses(self):
        report = RigidityReport()
        report.add("first", True)
        report.add("second", None, "outside the window")
        assert not report.ok
        assert report.undetermined() == ["second"]
        assert report.failing() == []
        report.add("third", False)
        assert report.failing() == ["third"]
        assert report.rows()[1] == ["second", "undetermined", "outside the window"]


class TestUnits:
    def test_dual_numbers(self, dual_numbers):
        units = unit_candidates(dual_numbers, 1)
        assert len(units) == 6
        assert dual_numbers.one in units

    def test_prime_field(self):
        F5 = polynomial_ring(BaseRing.parse("Fp 5"), [])
        assert len(unit_candidates(F5)) == 4

    def test_infinite_ring(self, Qx):
        with pytest.raises(UnsupportedRingError):
            unit_candidates(Qx)

    def test_scan_limit(self, dual_numbers):
        with pytest.raises(DomainError):
            unit_candidates(dual_numbers, 100)


class TestLocalization:
    def test_base_change_to_a_localization(self, Qx):
        _, canon = localize(Qx, "x")
        assert q_sharp(canon, Complex(Qx, {0: 1})).nondegenerate
        point = module_complex(FPModule(Qx, 1, [["x - 1"]]))
        q = q_sharp(canon, point)
        assert q.nondegenerate
        assert q.map.target.rank(0) == 1

    def test_needs_an_etale_map(self, QQ0, Qx):
        with pytest.raises(CertificateError):
            q_sharp(RingMap(QQ0, Qx, []), Complex(Qx, {0: 1}))

    def test_complex_over_the_source(self, Qx, Qxy):
        _, canon = localize(Qx, "x")
        with pytest.raises(DomainError):
            q_sharp(canon, Complex(Qxy, {0: 1}))


class TestDuals:
    def test_dual_of_the_dual_numbers(self, QQ0, dual_numbers):
        D = dual_module(RingMap(QQ0, dual_numbers, []), FPModule(QQ0, 1))
        assert D.ngens == 2
        assert D.dimension() == 2

    def test_coalgebra(self, dual_numbers):
        assert coalgebra_check(dual_numbers).ok

    def test_coalgebra_needs_a_finite_ring(self, Qx):
        with pytest.raises(UnsupportedRingError):
            coalgebra_check(Qx)


@pytest.mark.slow
class TestRigidComplexes:
    def test_tautological(self, QQ0):
        rc = tautological_rigid(QQ0)
        assert rc.degree == 0
        assert verify_rigid(rc).ok
        assert endomorphisms_are_scalars(rc)

    @pytest.mark.parametrize("variables, relations", [
        (["x"], []),
        (["x"], ["x^2"]),
        (["x", "y"], ["y^2 - x^3"]),
    ])
    def test_existence(self, variables, relations):
        A = polynomial_ring(QQ_BASE, variables, relations)
        out = rigid_existence(A)
        assert out.ok, out.report.rows() if out.report else out.notes
        assert out.end_check

    def test_existence_over_the_field(self, QQ0):
        assert rigid_existence(QQ0).ok

    def test_only_the_identity_is_a_rigid_automorphism(self, dual_numbers):
        rc = rigid_existence(dual_numbers).rigid
        assert rigid_auto_scan(rc, unit_candidates(dual_numbers, 1)) == [dual_numbers.one]
        assert rigid_auto_scan(rc, unit_candidates(dual_numbers, 3)) == [dual_numbers.one]

    def test_only_one_is_rigid_over_a_prime_field(self):
        F5 = polynomial_ring(BaseRing.parse("Fp 5"), [])
        rc = tautological_rigid(F5)
        assert rigid_auto_scan(rc, unit_candidates(F5)) == [F5.one]

    def test_trace_of_the_dual_numbers(self, QQ0, dual_numbers):
        shriek = trace_morphism(RingMap(QQ0, dual_numbers, []), tautological_rigid(QQ0))
        assert shriek.witness is not None
        assert shriek.unique
        assert endomorphisms_are_scalars(shriek.rigid)
        assert len(trace_scan(shriek)) == 1

    def test_sharp_of_the_affine_line(self, QQ0, Qx):
        out = sharp(RingMap(QQ0, Qx, []), tautological_rigid(QQ0))
        assert out.fundamental is not None and out.fundamental.is_iso()
        assert out.rigid.degree == -1
        assert verify_rigid(out.rigid).ok

    def test_scalar_automorphisms_of_the_field(self, QQ0):
        rc = tautological_rigid(QQ0)
        assert scalar_rigid_check(1, rc)
        assert not scalar_rigid_check(2, rc)
        assert not scalar_rigid_check(0, rc)

    def test_identity_is_a_rigid_morphism(self, QQ0):
        rc = tautological_rigid(QQ0)
        witness = verify_rigid_morphism(rc.complex.identity(), rc, rc)
        assert witness is not None
        assert verify_rigid_morphism(rc.complex.identity().scale(3), rc, rc) is None

    def test_flat_shriek_along_the_identity(self, QQ0):
        rc = tautological_rigid(QQ0)
        out = flat_shriek(RingMap.identity(QQ0), rc)
        assert out.rigid is rc
        assert out.witness is not None

    def test_flat_shriek_checks_the_source(self, QQ0, Qx):
        with pytest.raises(DomainError):
            flat_shriek(RingMap.identity(Qx), tautological_rigid(QQ0))

    def test_tensor_needs_a_condition(self, QQ0, Qx):
        taut = tautological_rigid(QQ0)
        f = RingMap(QQ0, Qx, [])
        over_line = sharp(f, taut).rigid
        with pytest.raises(CertificateError):
            tensor_rigid(taut, over_line, f, condition=None)
        with pytest.raises(DomainError):
            tensor_rigid(taut, taut, f)

    def test_tensor_of_two_affine_lines(self, QQ0, Qx, Qxy):
        f = RingMap(QQ0, Qx, [])
        g = RingMap.by_names(Qx, Qxy)
        rc_m = sharp(f, tautological_rigid(QQ0)).rigid
        rc_n = sharp(g, tautological_rigid(Qx)).rigid
        out = tensor_rigid(rc_m, rc_n, g)
        assert out.cup.asserted
        assert out.rigid.degree == -2
        assert verify_rigid(out.rigid).ok


def _doubled(rc):
    """The same complex with twice its rigidifier."""
    B = rc.ring
    rho = rc.rho
    cols = [B.vscale(B.const(2), col) for col in rho.columns]
    return dataclasses.replace(rc, rho=InducedMap(rho.degree, rho.source, rho.target, cols))


@pytest.mark.slow
class TestCarriedRigidifiers:
    def test_sharp_follows_the_rigidifier(self, QQ0, Qx):
        taut = tautological_rigid(QQ0)
        f = RingMap(QQ0, Qx, [])
        once = sharp(f, taut).rigid.rho.columns
        twice = sharp(f, _doubled(taut)).rigid.rho.columns
        assert twice != once
        assert twice == [Qx.vscale(Qx.const(2), col) for col in once]

    def test_flat_shriek_follows_the_rigidifier(self, QQ0, dual_numbers):
        f = RingMap(QQ0, dual_numbers, [])
        taut = tautological_rigid(QQ0)
        once = flat_shriek(f, taut)
        twice = flat_shriek(f, _doubled(taut))
        C = dual_numbers
        assert C.is_zero(C.sub(twice.scale, C.mul(C.const(2), once.scale)))
        assert twice.witness is not None

    def test_localization_follows_the_rigidifier(self, QQ0, Qx):
        _, canon = localize(Qx, "x")
        f = RingMap(QQ0, Qx, [])
        taut = tautological_rigid(QQ0)
        once, agrees = q_sharp_rigid(canon, sharp(f, taut).rigid)
        twice, _ = q_sharp_rigid(canon, sharp(f, _doubled(taut)).rigid)
        assert agrees is not False
        assert verify_rigid(once).ok
        L = canon.target
        assert twice.rho.columns == [L.vscale(L.const(2), col) for col in once.rho.columns]

    def test_tensor_follows_the_rigidifier(self, QQ0, Qx, Qxy):
        f = RingMap(QQ0, Qx, [])
        g = RingMap.by_names(Qx, Qxy)
        rc_n = sharp(g, tautological_rigid(Qx)).rigid
        rc_m = sharp(f, tautological_rigid(QQ0)).rigid
        once = tensor_rigid(rc_m, rc_n, g).rigid.rho.columns
        twice = tensor_rigid(_doubled(rc_m), rc_n, g).rigid.rho.columns
        assert twice == [Qxy.vscale(Qxy.const(2), col) for col in once]


@pytest.mark.slow
class TestCoherence:
    def test_sharp_of_a_composite(self, QQ0, Qx, Qxy):
        f = RingMap(QQ0, Qx, [])
        g = RingMap.by_names(Qx, Qxy)
        out = sharp_coherence(f, g, tautological_rigid(QQ0))
        assert out.fractions
        assert out.ok
        assert verify_rigid_morphism(out.map.scale(2), out.once.rigid, out.twice.rigid) is None

    def test_flat_shriek_of_a_composite(self, QQ0):
        B = polynomial_ring(QQ_BASE, ["x"], ["x^4"])
        C = polynomial_ring(QQ_BASE, ["x"], ["x^2"])
        f = RingMap(QQ0, B, [])
        g = RingMap.by_names(B, C)
        out = shriek_coherence(f, g, tautological_rigid(QQ0))
        assert out.ok
        assert verify_rigid_morphism(out.map.scale(2), out.once.rigid, out.twice.rigid) is None

    def test_flat_shriek_coherence_needs_a_surjection(self, QQ0, dual_numbers):
        f = RingMap(QQ0, dual_numbers, [])
        with pytest.raises(UnsupportedRingError):
            shriek_coherence(f, RingMap.identity(dual_numbers), tautological_rigid(QQ0))

    def test_maps_must_compose(self, QQ0, Qx, Qxy):
        with pytest.raises(DomainError):
            sharp_coherence(RingMap(QQ0, Qx, []), RingMap.identity(Qxy), tautological_rigid(QQ0))
