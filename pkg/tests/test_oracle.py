"""Brute-force cross-checks against the pipeline."""

import random

import pytest

from py_rigidsq.dgcore import Complex
from py_rigidsq.errors import DomainError
from py_rigidsq.exactlin import QQ_BASE
from py_rigidsq.oracle import (
    MAX_SNF_SIZE,
    annihilator_dimension,
    compare_groebner,
    compare_snf,
    compare_sq,
    compare_syzygy,
    determinantal_factors,
    hom_expansion,
)
from py_rigidsq.polyring import FPModule, RingMap, polynomial_ring


def random_matrix(seed, size=3, bound=20):
    rng = random.Random(seed)
    return [[rng.randint(-bound, bound) for _ in range(size)] for _ in range(size)]


def random_ideal(seed, degree=3):
    """Two or three nonzero polynomials of degree at most ``degree`` in two or three variables."""
    rng = random.Random(seed)
    R = polynomial_ring(QQ_BASE, ["x", "y", "z"][:rng.randint(2, 3)])
    count = rng.randint(2, 3)
    out = []
    while len(out) < count:
        p = R.zero
        for _ in range(rng.randint(1, 3)):
            term = R.const(rng.choice([-3, -2, -1, 1, 2, 3]))
            for _ in range(rng.randint(0, degree)):
                term = R.mul(term, R.var(rng.choice(R.variables)))
            p = R.add(p, term)
        if p:
            out.append(p)
    return R, out


class TestSnf:
    def test_determinantal_factors(self):
        assert determinantal_factors([[2, 4], [6, 8]]) == [2, 4]
        assert determinantal_factors([[0, 0], [0, 0]]) == []
        assert determinantal_factors([[1, 2, 3]]) == [1]

    def test_size_cap(self):
        big = [[1] * (MAX_SNF_SIZE + 1)]
        with pytest.raises(DomainError):
            determinantal_factors(big)

    @pytest.mark.parametrize("seed", range(50))
    def test_minors_agree_with_elimination(self, seed):
        rows = random_matrix(seed)
        out = compare_snf(rows)
        assert out.agree, (rows, out.rows)

    def test_rank_deficient(self):
        assert compare_snf([[1, 2, 3], [2, 4, 6], [0, 0, 0]]).agree


class TestHomExpansion:
    @pytest.mark.parametrize("n", [2, 3, 6])
    def test_only_degree_minus_one(self, n):
        H = hom_expansion(n, (-3, 3))
        assert H[-1] == ((n,), 0)
        assert all(H[i] == ((), 0) for i in H if i != -1)
        assert sorted(H) == list(range(-3, 4))

    def test_modulus_range(self):
        with pytest.raises(DomainError):
            hom_expansion(1, (-1, 0))


class TestAnnihilator:
    def test_dual_numbers(self, QQ0, dual_numbers):
        u = RingMap(QQ0, dual_numbers, [])
        assert annihilator_dimension(u, FPModule(dual_numbers, 1)) == 2

    def test_cube_truncation(self, QQ0):
        B = polynomial_ring(QQ_BASE, ["x"], ["x^3"])
        assert annihilator_dimension(RingMap(QQ0, B, []), FPModule(B, 1)) == 3

    def test_needs_a_finite_ring(self, QQ0, Qx):
        with pytest.raises(DomainError):
            annihilator_dimension(RingMap(QQ0, Qx, []), FPModule(Qx, 1))

    def test_module_must_live_over_the_target(self, QQ0, dual_numbers):
        other = polynomial_ring(QQ_BASE, ["x"], ["x^2"])
        with pytest.raises(DomainError):
            annihilator_dimension(RingMap(QQ0, dual_numbers, []), FPModule(other, 1))


class TestGroebner:
    @pytest.mark.parametrize("order", ["lex", "grevlex"])
    def test_agrees_with_sympy(self, order):
        R = polynomial_ring(QQ_BASE, ["x", "y"], ["x^2 - y", "x*y - 1"], order)
        out = compare_groebner(R)
        assert out.agree, out.rows

    def test_extra_generators(self, Qxy):
        out = compare_groebner(Qxy, [Qxy.var("x"), Qxy.var("y")])
        assert out.agree

    def test_refusals(self, Z, QQ0):
        with pytest.raises(DomainError):
            compare_groebner(Z)
        with pytest.raises(DomainError):
            compare_groebner(QQ0)

    @pytest.mark.parametrize("seed", range(50))
    def test_random_ideals(self, seed):
        R, gens = random_ideal(seed)
        out = compare_groebner(R, gens)
        assert out.agree, ([R.to_str(g) for g in gens], out.rows)


class TestSyzygy:
    def test_koszul_relation(self, Qxy):
        out = compare_syzygy(Qxy, [Qxy.var("x"), Qxy.var("y")])
        assert out.agree, out.rows

    def test_needs_elements(self, Qxy):
        with pytest.raises(DomainError):
            compare_syzygy(Qxy, [])

    @pytest.mark.slow
    @pytest.mark.parametrize("seed", range(50))
    def test_random_elements(self, seed):
        R, elements = random_ideal(seed)
        out = compare_syzygy(R, elements)
        assert out.agree, ([R.to_str(f) for f in elements], out.rows)


@pytest.mark.slow
class TestSq:
    def test_z_mod_two(self, Z, Z2):
        out = compare_sq(RingMap(Z, Z2, []), Complex(Z2, {0: 1}), (-2, 0))
        assert out.agree, out.rows
        assert out.rows

    def test_dual_numbers(self, QQ0, dual_numbers):
        out = compare_sq(RingMap(QQ0, dual_numbers, []), Complex(dual_numbers, {0: 1}), (-1, 0))
        assert out.agree, out.rows
        assert out.rows == [["dim H^0", "2", "2", "yes"]]

    def test_window_must_contain_zero(self, QQ0, dual_numbers):
        with pytest.raises(DomainError):
            compare_sq(RingMap(QQ0, dual_numbers, []), Complex(dual_numbers, {0: 1}), (-3, -1))
