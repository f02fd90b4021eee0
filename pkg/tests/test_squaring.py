"""Sq of objects and morphisms, the exchange map and the cup product."""

import pytest

from py_rigidsq import resolve
from py_rigidsq.dgcore import Complex, QuasiIsoCertificate, module_complex
from py_rigidsq.errors import CertificateError, DomainError, UnsupportedRingError
from py_rigidsq.exactlin import QQ_BASE
from py_rigidsq.polyring import FPModule, RingMap, polynomial_ring
from py_rigidsq.resolve import (
    DEFAULT_DEPTH,
    compare_resolutions,
    redundant_resolution,
    semifree_algebra_resolution,
)
from py_rigidsq.squaring import (
    CUP_CONDITIONS,
    DEFAULT_WINDOW,
    check_flat,
    cup_product,
    cutoff_for,
    exchange_morphism,
    global_dimension,
    identity_law,
    koszul_sq,
    required_depth,
    scalar_law,
    sq_flat,
    sq_model,
    sq_object,
)


def free(ring, name=None):
    return Complex(ring, {0: 1}, name=name)


class TestCutoffs:
    def test_global_dimension(self, QQ0, Z, Qxy):
        assert global_dimension(QQ0) == 0
        assert global_dimension(Z) == 1
        assert global_dimension(Qxy) == 2

    def test_global_dimension_refuses_quotients(self, dual_numbers):
        with pytest.raises(UnsupportedRingError):
            global_dimension(dual_numbers)

    def test_cutoff(self, Z, Z2, Qx):
        assert cutoff_for(Z, [free(Z2)]) == -1
        assert cutoff_for(Qx, [Complex(Qx, {-1: 1, 0: 1})]) == -3
        assert cutoff_for(Qx, []) == -1

    def test_required_depth(self):
        assert required_depth(DEFAULT_WINDOW, -1, 0, 6) == 6
        assert required_depth((-4, 3), -1, 0, 2) == 6
        assert required_depth((-4, 0), -5, 1, 2) == 8


class TestSqObject:
    def test_zero_complex(self, QQ0, dual_numbers):
        u = RingMap(QQ0, dual_numbers, [])
        result = sq_object(u, Complex(dual_numbers, {}), (-2, 0))
        assert result.model is None
        assert result.nonzero_degrees() == []
        assert result.undetermined() == []
        assert [row[1] for row in result.rows()] == ["0", "0", "0"]

    def test_complex_over_the_wrong_ring(self, QQ0, Qx, dual_numbers):
        u = RingMap(QQ0, dual_numbers, [])
        with pytest.raises(DomainError):
            sq_object(u, free(Qx), (-2, 0))

    @pytest.mark.slow
    def test_dual_numbers_square_to_themselves(self, QQ0, dual_numbers):
        u = RingMap(QQ0, dual_numbers, [])
        result = sq_object(u, free(dual_numbers, "B"), (-2, 0))
        assert result.undetermined() == []
        assert result.nonzero_degrees() == [0]
        assert result.cohomology[0].dimension() == 2

    @pytest.mark.slow
    def test_z_mod_two_over_z(self, Z, Z2):
        result = sq_object(RingMap(Z, Z2, []), free(Z2, "B"), (-2, 0))
        assert result.undetermined() == []
        assert result.nonzero_degrees() == [-1]
        assert result.cohomology[-1].invariants().factors == (2,)

    @pytest.mark.slow
    def test_model_records_its_resolutions(self, Z, Z2):
        model = sq_model(RingMap(Z, Z2, []), free(Z2, "B"), (-2, 0))
        assert model.cutoff == -1
        assert model.window == (-1, 0)
        assert model.cohomology(-5).is_zero()
        assert all(cert.ok for cert in model.verify().values())
        assert model.trace_lines()[0] == "cutoff -1, window -1..0"

    @pytest.mark.slow
    def test_model_compares_with_itself(self, Z, Z2):
        model = sq_model(RingMap(Z, Z2, []), free(Z2, "B"), (-1, 0))
        comparison = compare_resolutions(model, model)
        assert comparison.ok
        assert all(row[4] == "yes" for row in comparison.rows())

    @pytest.mark.slow
    def test_model_compares_with_a_redundant_resolution(self, Z, Z2):
        u = RingMap(Z, Z2, [])
        model = sq_model(u, free(Z2, "B"), (-1, 0))
        other = sq_model(u, free(Z2, "B"), (-1, 0),
                         resolution=redundant_resolution(model.resolution))
        assert other.resolution.algebra.nvars == model.resolution.algebra.nvars + 2
        assert compare_resolutions(model, other).ok

    @pytest.mark.slow
    def test_disagreement_reports_both_sides(self, monkeypatch, Z, Z2):
        model = sq_model(RingMap(Z, Z2, []), free(Z2, "B"), (-1, 0))
        certs = iter([
            QuasiIsoCertificate(False, (-1, 0), [(-1, "Z/2", "0", False), (0, "Z/2", "Z/2", True)]),
            QuasiIsoCertificate(False, (-1, 0), [(-1, "Z/2", "Z/2", True), (0, "Z/2", "0", False)]),
        ])
        monkeypatch.setattr(resolve, "is_quasi_iso", lambda *args, **kwargs: next(certs))
        with pytest.raises(CertificateError) as info:
            compare_resolutions(model, model)
        assert info.value.failing == {"post": [-1], "pre": [0]}

    @pytest.mark.slow
    @pytest.mark.parametrize("relations", [[], ["x^2"]])
    def test_generator_sign_does_not_matter(self, QQ0, relations):
        B = polynomial_ring(QQ_BASE, ["x"], relations)
        u = RingMap(QQ0, B, [])
        window = (-1, 0)
        M = free(B, "B")
        depth = required_depth(window, cutoff_for(QQ0, [M]), 0, DEFAULT_DEPTH)
        x = B.var("x")
        models = [sq_model(u, M, window, resolution=semifree_algebra_resolution(u, depth, [g]))
                  for g in (x, B.sub(B.zero, x))]
        comparison = compare_resolutions(*models)
        assert comparison.ok
        assert all(row[4] == "yes" for row in comparison.rows())

    @pytest.mark.slow
    def test_comparison_needs_the_same_ring_map(self, Z, Z2):
        first = sq_model(RingMap(Z, Z2, []), free(Z2), (0, 0))
        second = sq_model(RingMap.identity(Z2), free(Z2), (0, 0))
        with pytest.raises(DomainError):
            compare_resolutions(first, second)


class TestSqFlat:
    def test_refuses_without_flatness(self, Z, Z2):
        with pytest.raises(CertificateError):
            sq_flat(RingMap(Z, Z2, []), free(Z2))

    def test_polynomial_ring_is_flat(self, QQ0, Qx):
        check_flat(RingMap(QQ0, Qx, []), free(Qx))

    @pytest.mark.slow
    def test_polynomial_ring(self, QQ0, Qx):
        u = RingMap(QQ0, Qx, [])
        result = sq_flat(u, free(Qx, "B"), (-1, 2))
        assert result.nonzero_degrees() == [1]
        inv = result.cohomology[1].invariants()
        assert inv.is_free
        assert inv.generators == 1

    @pytest.mark.slow
    def test_agrees_with_the_resolution_path(self, QQ0, Qx):
        u = RingMap(QQ0, Qx, [])
        M = free(Qx, "B")
        assert sq_flat(u, M, (-1, 2)).rows() == sq_object(u, M, (-1, 2)).rows()


@pytest.mark.slow
class TestMorphismLaws:
    @pytest.fixture
    def model(self, QQ0, dual_numbers):
        return sq_model(RingMap(QQ0, dual_numbers, []), free(dual_numbers, "B"), (-1, 0))

    def test_identity(self, model):
        assert identity_law(model)

    @pytest.mark.parametrize("c", ["1", "x + 1", "2", "3*x + 2"])
    def test_scalar_squares(self, model, c):
        assert scalar_law(model, c)


class TestExchange:
    def test_free_complexes(self, Qx):
        X = free(Qx)
        psi = exchange_morphism(X, X, X, (-1, 1))
        assert psi.condition == "perfect source"
        assert psi.asserted

    def test_finite_resolution_of_the_source(self, Qx):
        L = module_complex(FPModule(Qx, 1, [["x"]]))
        N = module_complex(FPModule(Qx, 1, [["x"]]))
        psi = exchange_morphism(L, free(Qx), N, (-2, 2))
        assert psi.condition is not None
        assert psi.asserted
        assert all(row[3] == "yes" for row in psi.rows())

    def test_needs_one_ring(self, Qx, Qxy):
        with pytest.raises(DomainError):
            exchange_morphism(free(Qx), free(Qxy), free(Qx))


class TestKoszulModels:
    def test_polynomial_ring(self, QQ0, Qx):
        S = koszul_sq(RingMap(QQ0, Qx, []), free(Qx, "B"))
        assert S.names == ["x"]
        assert S.cohomology(0).is_zero()
        assert S.cohomology(1).invariants().generators == 1

    def test_refuses_quotients(self, QQ0, dual_numbers):
        with pytest.raises(UnsupportedRingError):
            koszul_sq(RingMap(QQ0, dual_numbers, []), free(dual_numbers))

    def test_unknown_cup_condition(self, QQ0, Qx, Qxy):
        with pytest.raises(CertificateError):
            cup_product(RingMap(QQ0, Qx, []), RingMap.by_names(Qx, Qxy), free(Qx), free(Qxy),
                        condition="proper")

    @pytest.mark.slow
    def test_cup_product_on_a_tower(self, QQ0, Qx, Qxy):
        cup = cup_product(RingMap(QQ0, Qx, []), RingMap.by_names(Qx, Qxy),
                          free(Qx, "M"), free(Qxy, "N"), condition=CUP_CONDITIONS[0])
        assert cup.asserted
        assert cup.naturality("x + 1")
