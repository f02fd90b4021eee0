"""Complexes of finitely presented modules: cohomology, maps, cones, tensors."""

import math

import pytest

from py_rigidsq.dgcore import (
    Complex,
    ComplexMap,
    FlatCertificate,
    amplitude,
    check_flat_certificate,
    complex_from_matrices,
    cone,
    flat_dimension_bound,
    induced_map,
    is_flat_over,
    is_quasi_iso,
    module_complex,
    restrict_complex,
    tensor_complexes,
    tensor_fp,
)
from py_rigidsq.errors import DomainError, UndeterminedError
from py_rigidsq.polyring import FPModule, RingMap
from py_rigidsq.resolve import koszul


@pytest.fixture
def two(Z):
    """ZZ --2--> ZZ in degrees -1, 0."""
    return complex_from_matrices(Z, 0, [Z.matrix(1, 1, [[2]])])


@pytest.fixture
def dual_chain(dual_numbers):
    """R --x--> R --x--> R in degrees -2..0 over R = QQ[x]/(x^2)."""
    R = dual_numbers
    x = R.var("x")
    return complex_from_matrices(R, 0, [R.matrix(1, 1, [[x]]), R.matrix(1, 1, [[x]])])


def test_cohomology_of_multiplication_by_two(two):
    assert two.support == (-1, 0)
    assert two.cohomology(0).describe() == "Z/2; 1 gen / 1 rel"
    assert two.cohomology(-1).is_zero()
    assert two.cohomology(3).is_zero()


def test_cohomology_over_dual_numbers(dual_chain):
    assert dual_chain.square_zero_failures() == []
    assert dual_chain.cohomology(-2).invariants().dimension == 1
    assert dual_chain.cohomology(-1).is_zero()
    assert dual_chain.cohomology(0).invariants().dimension == 1


def test_square_zero_failure(Qx):
    x = Qx.var("x")
    C = complex_from_matrices(Qx, 0, [Qx.matrix(1, 1, [[x]]), Qx.matrix(1, 1, [[x]])])
    assert C.square_zero_failures() == [-2]


def test_differential_shape_is_checked(Z):
    with pytest.raises(DomainError):
        Complex(Z, {0: 1, 1: 1}, {0: Z.matrix(2, 1, [[1, 1]])})


def test_undetermined_outside_valid_window(Z):
    C = Complex(Z, {-1: 1, 0: 1}, {-1: Z.matrix(1, 1, [[2]])}, valid_lo=-1)
    assert C.is_determined(0)
    assert not C.is_determined(-1)
    assert C.determined_window() == (0, 0)
    with pytest.raises(UndeterminedError) as info:
        C.cohomology(-1)
    assert info.value.degree == -1
    assert C.cohomology_range(-1, 0)[-1] is None


def test_shift_moves_cohomology(two):
    shifted = two.shift(1)
    assert shifted.support == (-2, -1)
    assert shifted.cohomology(-1).describe() == "Z/2; 1 gen / 1 rel"


def test_module_complex(Z):
    C = module_complex(FPModule(Z, 1, [(3,)]), 2)
    assert C.support == (2, 2)
    assert C.cohomology(2).describe() == "Z/3; 1 gen / 1 rel"


def test_identity_is_quasi_iso(two):
    cert = is_quasi_iso(two.identity())
    assert cert.ok
    assert cert.window == (-1, 0)


def test_multiplication_by_two_kills_cohomology(two):
    cert = is_quasi_iso(two.identity().scale(2))
    assert not cert.ok
    assert cert.failing_degrees() == [0]


def test_quasi_iso_needs_degree_zero(two):
    with pytest.raises(DomainError):
        is_quasi_iso(two.zero_map(two, 1))


def test_chain_failures(Z, two):
    F = ComplexMap(two, two, RingMap.identity(Z),
                   {-1: Z.matrix(1, 1, [[1]]), 0: Z.matrix(1, 1, [[0]])})
    assert F.chain_failures() == [-1]
    assert two.identity().chain_failures() == []


def test_induced_map_on_identity(dual_chain):
    H = induced_map(dual_chain.identity(), 0)
    assert H.is_iso()


def test_cone_of_identity_is_acyclic(two):
    C = cone(two.identity())
    assert C.square_zero_failures() == []
    for i in range(-3, 2):
        assert C.cohomology(i).is_zero()


def test_amplitude():
    assert amplitude({}) == 0
    assert amplitude({0: None}) == math.inf
    assert amplitude({-2: 1, 0: 1, 1: 0}) == 2


def test_tensor_of_koszul_complexes(Z):
    K = koszul(Z, [2]).complex()
    T = tensor_complexes(K, K)
    assert T.square_zero_failures() == []
    assert T.cohomology(0).describe() == "Z/2; 1 gen / 1 rel"
    assert T.cohomology(-1).describe() == "Z/2; 1 gen / 1 rel"
    assert T.cohomology(-2).is_zero()


def test_tensor_of_coprime_torsion(Z):
    assert tensor_fp(FPModule(Z, 1, [(2,)]), FPModule(Z, 1, [(3,)])).is_zero()


def test_restriction_to_the_field(QQ0, dual_numbers):
    phi = RingMap(QQ0, dual_numbers, [])
    C = restrict_complex(module_complex(FPModule(dual_numbers, 1)), phi)
    assert C.ring is QQ0
    assert C.rank(0) == 2
    assert C.cohomology(0).invariants().dimension == 2


def test_flatness(Z, Z2, QQ0, Qx):
    assert is_flat_over(FPModule(Qx, 1), RingMap(QQ0, Qx, []))
    assert not is_flat_over(FPModule(Z2, 1), RingMap(Z, Z2, []))
    assert is_flat_over(FPModule(Z, 2), RingMap.identity(Z))


class TestFlatCertificates:
    def test_two_term_resolution(self, Z, two):
        target = module_complex(FPModule(Z, 1, [[2]]))
        cert = FlatCertificate(two, ComplexMap(two, target, RingMap.identity(Z),
                                               {0: Z.identity_matrix(1)}))
        check = check_flat_certificate(cert, RingMap.identity(Z))
        assert check.ok, check.reasons
        assert flat_dimension_bound(cert) == 1

    def test_torsion_piece_is_not_flat(self, Z, Z2):
        X = module_complex(FPModule(Z2, 1))
        check = check_flat_certificate(FlatCertificate(X, X.identity()), RingMap(Z, Z2, []))
        assert not check.ok
        assert check.reasons == [f"piece 0 is not certified flat over {Z}"]

    def test_map_must_start_at_the_certificate(self, Z, two):
        other = module_complex(FPModule(Z, 1))
        check = check_flat_certificate(FlatCertificate(two, other.identity()),
                                       RingMap.identity(Z))
        assert not check.ok
        assert "does not start" in check.reasons[-1]
        assert flat_dimension_bound(FlatCertificate(other, other.identity())) == 0
