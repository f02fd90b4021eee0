"""Semi-free DG modules, chain maps, Hom complexes and homotopies."""

import pytest

from py_rigidsq.dgalgebra import DGAlgebra, GradedVariable, trivial_algebra
from py_rigidsq.dgcore import complex_from_matrices
from py_rigidsq.dgmodule import (
    ChainMap,
    HomModule,
    SemiFreeModule,
    generator_values,
    homotopy_solve,
    regular_module,
)
from py_rigidsq.errors import DomainError


@pytest.fixture
def resolution(Qx):
    """QQ[x] --x--> QQ[x] in degrees -1, 0 as a semi-free module."""
    x = Qx.var("x")
    X = complex_from_matrices(Qx, 0, [Qx.matrix(1, 1, [[x]])])
    return SemiFreeModule.from_complex(X)


def test_from_complex_orders_generators_top_down(resolution):
    P = resolution
    assert P.names == ["e0_0", "e-1_0"]
    assert P.degrees == [0, -1]
    assert P.top == 0
    assert P.bottom == -1
    assert P.generator_table()[1] == ["e-1_0", "-1", "(x)*e0_0"]


def test_flatten_recovers_the_complex(resolution):
    C = resolution.flatten()
    assert C.support == (-1, 0)
    assert C.cohomology(0).invariants().dimension == 1
    assert C.cohomology(-1).is_zero()


def test_later_generator_is_rejected(Qx):
    alg = trivial_algebra(Qx)
    with pytest.raises(DomainError):
        SemiFreeModule(alg, [0, -1], [{((), 1): 1}, {}])


def test_chain_map_value_count(resolution, Qx):
    with pytest.raises(DomainError):
        ChainMap(resolution, resolution, [(Qx.one,)])


def test_multiplication_is_a_chain_map(resolution, Qx):
    x = Qx.var("x")
    phi = ChainMap(resolution, resolution, [(x,), (x,)])
    assert phi.failures(-1, 0) == []
    assert generator_values(phi) == [(x,), (x,)]


def test_multiplication_by_x_is_null_homotopic(resolution, Qx):
    x = Qx.var("x")
    phi = ChainMap(resolution, resolution, [(x,), (x,)])
    zero = ChainMap(resolution, resolution, [(Qx.zero,), (Qx.zero,)])
    psi = homotopy_solve(phi, zero)
    assert psi is not None
    assert psi.degree == -1
    assert not psi.is_zero()


def test_identity_is_not_null_homotopic(resolution, Qx):
    ident = ChainMap(resolution, resolution, [(Qx.one,), (Qx.one,)])
    zero = ChainMap(resolution, resolution, [(Qx.zero,), (Qx.zero,)])
    assert homotopy_solve(ident, zero) is None
    assert homotopy_solve(ident, ident).is_zero()


def test_hom_complex_computes_ext(resolution):
    H = HomModule(resolution, resolution).flatten()
    assert H.square_zero_failures() == []
    assert H.cohomology(-1).is_zero()
    assert H.cohomology(0).invariants().dimension == 1
    assert H.cohomology(1).invariants().dimension == 1


def test_regular_module_of_koszul_algebra(Qxy):
    alg = DGAlgebra(Qxy, [GradedVariable("e1", -1), GradedVariable("e2", -1)],
                    [{(0, 0): "x"}, {(0, 0): "y"}])
    R = regular_module(alg)
    assert R.names == ["1"]
    assert R.bottom == -2
    C = R.flatten()
    assert [C.rank(i) for i in (-2, -1, 0)] == [1, 2, 1]
    assert C.cohomology(0).invariants().dimension == 1
    assert C.cohomology(-1).is_zero()
    assert C.cohomology(-2).is_zero()
