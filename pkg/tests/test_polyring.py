"""Presented rings, ring maps, submodules and finitely presented modules."""

import pytest

from py_rigidsq.errors import DomainError, UnsupportedRingError
from py_rigidsq.exactlin import QQ_BASE, ZZ_BASE
from py_rigidsq.polyring import (
    FPModule,
    PresentedRing,
    RingMap,
    Submodule,
    buchberger,
    fresh_name,
    localize,
    polynomial_ring,
    syzygies,
    tensor_rings,
)


class TestPresentedRing:
    def test_normal_form_in_dual_numbers(self, dual_numbers):
        R = dual_numbers
        x = R.var("x")
        assert R.is_zero("x^3")
        assert R.to_str(R.mul(x + 1, x + 1)) == "2*x + 1"
        assert R.dimension() == 2
        assert R.monomial_basis == [(0,), (1,)]

    def test_unknown_variable(self, Qx):
        with pytest.raises(DomainError):
            Qx.var("z")
        with pytest.raises(DomainError):
            Qx("z + 1")

    def test_malformed_polynomial(self, Qx):
        with pytest.raises(DomainError):
            Qx("x +")

    def test_repeated_variables(self):
        with pytest.raises(DomainError):
            polynomial_ring(QQ_BASE, ["x", "x"])

    def test_inverse(self, dual_numbers):
        R = dual_numbers
        x = R.var("x")
        assert R.inverse(R.add(R.one, x)) == R.sub(R.one, x)
        assert R.inverse(x) is None

    def test_zero_ring(self, Qx):
        R = polynomial_ring(QQ_BASE, ["x"], ["x", "x - 1"])
        assert R.is_zero_ring
        assert not Qx.is_zero_ring

    def test_multiplication_matrix(self, dual_numbers):
        R = dual_numbers
        M = R.multiplication_matrix(R.var("x"))
        assert M.to_lists() == [["0", "0"], ["1", "0"]]


class TestIntegerRegimes:
    def test_finite_cyclic_group(self, Z6):
        assert Z6.regime == "zz-finite"
        assert Z6.lattice_invariants() == ([6], 0)
        assert Z6.dimension() == 0
        assert Z6.to_str(Z6("7")) == "1"

    def test_monic_relation_gives_free_rank(self):
        R = polynomial_ring(ZZ_BASE, ["x"], ["x^2 - 2"])
        assert R.regime == "zz-finite"
        assert R.lattice_invariants() == ([], 2)
        assert R.dimension() == 2
        assert R.is_zero(R.sub(R.mul(R.var("x"), R.var("x")), R.const(2)))

    def test_free_polynomial_ring(self):
        R = polynomial_ring(ZZ_BASE, ["x"])
        assert R.regime == "zz-free"
        assert R.dimension() is None

    def test_non_monic_relation_is_unsupported(self):
        with pytest.raises(UnsupportedRingError):
            polynomial_ring(ZZ_BASE, ["x"], ["2*x - 1"])

    def test_modules_over_zz_free_ring_are_unsupported(self):
        R = polynomial_ring(ZZ_BASE, ["x"])
        with pytest.raises(UnsupportedRingError):
            Submodule(R, 1, [(R.var("x"),)])


class TestRingMap:
    def test_ideal_must_map_to_zero(self, dual_numbers, Qx):
        with pytest.raises(DomainError):
            RingMap.by_names(dual_numbers, Qx)

    def test_quotient_map_is_surjective(self, Qx, dual_numbers):
        q = RingMap.by_names(Qx, dual_numbers)
        assert q.is_surjective()
        assert q("x^2 + x") == dual_numbers.var("x")

    def test_inclusion_is_not_surjective(self, Qx, Qxy):
        assert not RingMap.by_names(Qx, Qxy).is_surjective()

    def test_kernel_of_cusp_parametrization(self, Qxy):
        T = polynomial_ring(QQ_BASE, ["t"])
        phi = RingMap(Qxy, T, ["t^2", "t^3"])
        gens = phi.kernel_generators()
        assert gens
        assert all(not phi(g) for g in gens)
        quotient = PresentedRing(QQ_BASE, ["x", "y"], gens)
        assert quotient.is_zero("y^2 - x^3")

    def test_compose_and_identity(self, Qx, dual_numbers):
        q = RingMap.by_names(Qx, dual_numbers)
        ident = RingMap.identity(dual_numbers)
        assert ident.is_identity
        assert ident.compose(q).images == q.images

    def test_kernel_between_finite_integer_rings(self, Z6):
        Z3 = polynomial_ring(ZZ_BASE, [], ["3"])
        q = RingMap(Z6, Z3, [])
        (g,) = q.kernel_generators()
        assert Z6.to_str(g) in ("3", "-3")


class TestConstructions:
    def test_fresh_name(self):
        assert fresh_name(["x"]) == "t"
        assert fresh_name(["t", "t1"]) == "t2"

    def test_localize(self):
        R = polynomial_ring(QQ_BASE, ["x"], ["x^2 - x"])
        loc, canon = localize(R, "x")
        assert loc.variables == ("x", "t")
        assert loc.dimension() == 1
        assert loc.is_zero(loc.sub(canon(R.var("x")), loc.one))

    def test_localize_at_nilpotent_is_zero(self, dual_numbers):
        loc, _ = localize(dual_numbers, "x")
        assert loc.is_zero_ring

    def test_tensor_of_dual_numbers(self, QQ0, dual_numbers):
        T = tensor_rings(dual_numbers, dual_numbers, QQ0)
        assert T.ring.variables == ("x1", "x2")
        assert T.ring.dimension() == 4
        assert T.first(dual_numbers.var("x")) == T.ring.var("x1")

    def test_buchberger_default_order(self, Qxy):
        G = buchberger(Qxy, ["x^2 - 1", "x*y - 1"], "lex")
        assert [Qxy.to_str(g) for g in G] == ["x - y", "y^2 - 1"]

    def test_buchberger_needs_field(self):
        with pytest.raises(UnsupportedRingError):
            buchberger(polynomial_ring(ZZ_BASE, ["x"]), ["x"])


class TestModules:
    def test_syzygies_of_two_variables(self, Qxy):
        x, y = Qxy.gens
        (s,) = syzygies(Qxy, [(x,), (y,)])
        assert Qxy.is_zero(Qxy.add(Qxy.mul(s[0], x), Qxy.mul(s[1], y)))
        assert Qxy.to_str(s[0]) in ("y", "-y")

    def test_lift(self, Qxy):
        x, y = Qxy.gens
        sub = Submodule(Qxy, 1, [(x,), (y,)])
        c = sub.lift((Qxy("x*y + y^2"),))
        assert c is not None
        assert Qxy.add(Qxy.mul(c[0], x), Qxy.mul(c[1], y)) == Qxy("x*y + y^2")
        assert sub.lift((Qxy.one,)) is None

    def test_lift_over_integers(self, Z):
        sub = Submodule(Z, 1, [(Z.const(4),), (Z.const(6),)])
        c = sub.lift((Z.const(2),))
        assert c is not None
        assert Z.add(Z.mul(c[0], Z.const(4)), Z.mul(c[1], Z.const(6))) == Z.const(2)
        assert sub.lift((Z.const(1),)) is None

    def test_zero_module(self, Z):
        assert FPModule(Z, 1, [(1,)]).invariants().describe() == "0"
        assert FPModule(Z, 0).is_zero()

    def test_torsion_module(self, Z):
        assert FPModule(Z, 1, [(2,)]).invariants().describe() == "Z/2; 1 gen / 1 rel"

    def test_prune_removes_unit_relations(self, Z):
        pruned = FPModule(Z, 2, [(1, 0)]).prune()
        assert pruned.module.ngens == 1
        assert not pruned.module.relations

    def test_field_invariants(self, dual_numbers):
        x = dual_numbers.var("x")
        M = FPModule(dual_numbers, 1, [(x,)])
        inv = M.invariants()
        assert inv.dimension == 1
        assert inv.describe() == "dim 1; 1 gen / 1 rel"
        assert M.annihilator_contains(x)

    def test_free_module_description(self, dual_numbers):
        assert FPModule(dual_numbers, 1).invariants().describe() == \
            "dim 2; free rank 1; 1 gen / 0 rel"

    def test_base_change(self, Qx, dual_numbers):
        M = FPModule(Qx, 1, [("x - 1",)])
        N = M.base_change(RingMap.by_names(Qx, dual_numbers))
        assert N.is_zero()
