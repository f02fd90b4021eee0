"""Rigid complexes, rigid morphisms and the constructions that carry rigidity.

A rigid complex (M, rho) over B relative to A is stored with its cohomology
concentrated in one degree n, so a morphism in the derived category is the
map it induces on H^n. rho is then a B-linear isomorphism

    H^n(M) -> H^n(Sq_{B/A} M)

written in the generators of a pinned chain model of Sq. Rigid morphisms,
traces f^flat, f^sharp, localization maps and the existence pipeline for a
presented algebra are built on that representation.
"""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field
from typing import Any, Sequence

from sympy.polys.rings import PolyElement

from py_rigidsq.dgcore import (
    Complex, ComplexMap, FlatCertificate, InducedMap, check_flat_certificate, induced_map,
    is_flat_over, module_complex, restrict_complex, scalar_restriction,
)
from py_rigidsq.dgmodule import FlatModule, HomModule
from py_rigidsq.errors import (
    CertificateError, DomainError, UnsupportedRingError, WindowError,
)
from py_rigidsq.exactlin import ExactMatrix, kernel_basis, solve_linear
from py_rigidsq.polyring import FPModule, Matrix, PresentedRing, RingMap, Vector, polynomial_ring
from py_rigidsq.resolve import DEFAULT_DEPTH, new_generators, semifree_module_resolution
from py_rigidsq.smoothdiff import (
    Chart, Form, FundamentalIso, GeneralizedFraction, fraction_change_of_sequence,
    exterior_power, fundamental_iso, kaehler, omega_composition, omega_power, wedge, wedge_all,
)
from py_rigidsq.squaring import (
    DEFAULT_WINDOW, CupProduct, KoszulSq, SqModel, SqMorphism, cup_product, global_dimension,
    koszul_sq, morphism_models, sq_model, sq_morphism,
)
from py_rigidsq.utils import memo_on

logger = logging.getLogger(__name__)


@dataclass
class LocalizedSq:
    """B' (x)_B Sq_{B/A} M for a localization B -> B', read off a model over B."""

    model: SqModel | KoszulSq
    map: RingMap

    def cohomology(self, i: int) -> FPModule:
        return self.model.cohomology(i).base_change(self.map)

    def degrees(self) -> list[int]:
        return _model_degrees(self.model)


SqChainModel = SqModel | KoszulSq | LocalizedSq

UNIT_SCAN_LIMIT = 10_000


# -- Chain models of Sq --

def sq_chain_model(u: RingMap, M: Complex, window: tuple[int, int] = DEFAULT_WINDOW,
                   depth: int = DEFAULT_DEPTH) -> SqChainModel:
    """The Koszul model for polynomial extensions over a field, the general model otherwise."""
    if M.is_free():
        try:
            return koszul_sq(u, M)
        except (UnsupportedRingError, DomainError) as exc:
            logger.debug("no Koszul model: %s", exc)
    return sq_model(u, M, window, depth)


def sq_cohomology(model: SqChainModel, i: int) -> FPModule:
    return model.cohomology(i)


def _chain(model: SqChainModel) -> tuple[Complex, RingMap]:
    if isinstance(model, LocalizedSq):
        raise UnsupportedRingError("a localized square has no cochains of its own")
    if isinstance(model, KoszulSq):
        return model.flat, model.multiplication
    return model.flatten(), model.multiplication


def _model_degrees(model: SqChainModel) -> list[int]:
    if isinstance(model, (KoszulSq, LocalizedSq)):
        return model.degrees()
    lo, hi = model.window
    return list(range(lo, hi + 1))


def _lift_coefficient(model: SqChainModel, c: PolyElement) -> PolyElement:
    """c in B as an element of E^0 acting through the first factor."""
    if isinstance(model, KoszulSq):
        return model.rings.first(c)
    aug = model.resolution.augmentation
    pre = c if aug.is_identity else aug.preimage(c)
    if pre is None:
        raise DomainError(f"{model.ring.to_str(c)} does not lift to the resolution")
    return model.algebra.first.ring_map(pre)


def class_cochain(model: SqChainModel, coords: Sequence[Any], n: int) -> Vector:
    """A cocycle representing the class with the given coordinates over B."""
    X, _ = _chain(model)
    H = X.cohomology(n)
    E = X.ring
    out = E.vzero(X.rank(n))
    for c, z in zip(coords, H.cocycles):
        if c:
            out = E.vadd(out, E.vscale(_lift_coefficient(model, c), z))
    return out


def class_coordinates(model: SqChainModel, v: Sequence[Any], n: int) -> Vector:
    X, mult = _chain(model)
    coords = X.cohomology(n).coordinates(v)
    if coords is None:
        raise DomainError(f"degree {n} cochain is not a cocycle")
    return mult.on_vector(coords)


# -- Rigid complexes --

def concentrated_degree(M: Complex) -> int | None:
    """The one degree carrying cohomology, None for an acyclic complex."""
    sup = M.support
    if sup is None:
        return None
    degrees = [i for i in range(sup[0], sup[1] + 1) if not M.cohomology(i).is_zero()]
    if len(degrees) > 1:
        raise DomainError(f"cohomology in degrees {degrees}; rigid complexes here need one")
    return degrees[0] if degrees else None


def _apply(H: InducedMap, v: Sequence[Any]) -> Vector:
    ring = H.target.ring
    out = ring.vzero(H.target.ngens)
    for c, col in zip(v, H.columns):
        if c:
            out = ring.vadd(out, ring.vscale(c, col))
    return out


def is_well_defined(H: InducedMap) -> bool:
    """Every relation of the source goes to zero in the target."""
    return all(H.target.is_zero_element(_apply(H, r)) for r in H.source.relations)


def cyclic_isomorphism(X: FPModule, Y: FPModule, degree: int = 0,
                       scale: Any = 1) -> InducedMap | None:
    """X -> Y sending the pruned generator of X to ``scale`` times that of Y."""
    ring = Y.ring
    if X.is_zero() and Y.is_zero():
        return InducedMap(degree, X, Y, [ring.vzero(Y.ngens) for _ in range(X.ngens)])
    px, py = X.prune(), Y.prune()
    if px.module.ngens != 1 or py.module.ngens != 1:
        return None
    b = ring(scale)
    target = ring.vscale(b, py.section.column(0))
    cols = [ring.vscale(px.projection.entry(0, k), target) for k in range(X.ngens)]
    H = InducedMap(degree, X, Y, cols)
    if not is_well_defined(H) or not H.is_iso():
        return None
    return H


@dataclass
class RigidComplex:
    """(M, rho) over B = structure.target relative to A = structure.source."""

    structure: RingMap
    complex: Complex
    model: SqChainModel
    degree: int
    rho: InducedMap
    flat: FlatCertificate | None = None
    name: str | None = None

    @property
    def ring(self) -> PresentedRing:
        return self.structure.target

    @property
    def base(self) -> PresentedRing:
        return self.structure.source

    def cohomology(self) -> FPModule:
        return self.rho.source

    def describe(self) -> str:
        return (f"{self.name or self.complex.name or 'M'} over {self.ring} in degree "
                f"{self.degree}: {self.cohomology().invariants().describe()}")


class TautologicalRigid(RigidComplex):
    """(A, rho^tau): A in degree 0 with Sq_{A/A} A identified with A."""


def rigidify(u: RingMap, M: Complex, window: tuple[int, int] = DEFAULT_WINDOW,
             depth: int = DEFAULT_DEPTH, model: SqChainModel | None = None,
             scale: Any = 1, flat: FlatCertificate | None = None,
             name: str | None = None) -> RigidComplex:
    """Attach a rigidifying isomorphism sending generator to ``scale`` times generator."""
    B = u.target
    if M.ring is not B:
        raise DomainError(f"{M.name or 'M'} does not live over {B}")
    n = concentrated_degree(M)
    if model is None:
        model = sq_chain_model(u, M, window, depth)
    if n is None:
        sup = M.support
        n = sup[0] if sup is not None else 0
        zero = FPModule(B, 0)
        return RigidComplex(u, M, model, n, InducedMap(n, zero, zero, []), flat, name)
    X = M.cohomology(n).module
    Y = sq_cohomology(model, n)
    rho = cyclic_isomorphism(X, Y, n, scale)
    if rho is None:
        raise CertificateError(f"H^{n} of {M.name or 'M'} and of its square are not "
                               "isomorphic cyclic modules; give rho explicitly")
    logger.info("rigidified %s in degree %d over %s", M.name or "M", n, B)
    return RigidComplex(u, M, model, n, rho, flat, name)


def tautological_rigid(A: PresentedRing, window: tuple[int, int] = DEFAULT_WINDOW) -> TautologicalRigid:
    u = RingMap.identity(A)
    M = module_complex(FPModule(A, 1))
    M.name = str(A)
    rc = rigidify(u, M, window)
    return TautologicalRigid(rc.structure, rc.complex, rc.model, rc.degree, rc.rho,
                             name=f"{A} (tautological)")


# -- Carrying rigidifiers --

def _leading(Y: FPModule, v: Sequence[Any]) -> PolyElement:
    """The coefficient of v on the single pruned generator of a cyclic module."""
    pruned = Y.prune()
    if pruned.module.ngens != 1:
        raise CertificateError("rigidifiers are only carried between cyclic cohomology modules")
    return Y.ring.apply(pruned.projection, v)[0]


def _ratio(Y: FPModule, v: Sequence[Any], w: Sequence[Any]) -> PolyElement:
    """The b with v = b w in a cyclic module, for w a generator."""
    ring = Y.ring
    inv = ring.inverse(_leading(Y, w))
    if inv is None:
        raise CertificateError("the reference class does not generate the square")
    return ring.mul(_leading(Y, v), inv)


def rigidify_through(u: RingMap, M: Complex, model: SqChainModel, cls: Sequence[Any],
                     image: Sequence[Any], flat: FlatCertificate | None = None,
                     name: str | None = None) -> RigidComplex:
    """The rigidifier on ``model`` sending the class ``cls`` of H^n(M) to ``image``."""
    n = concentrated_degree(M)
    if n is None:
        return rigidify(u, M, model=model, flat=flat, name=name)
    X = M.cohomology(n).module
    Y = sq_cohomology(model, n)
    ring = Y.ring
    inv = ring.inverse(_leading(X, cls))
    if inv is None:
        raise CertificateError(f"the carried class does not generate H^{n}")
    b = ring.mul(_leading(Y, image), inv)
    rc = rigidify(u, M, model=model, scale=b, flat=flat, name=name)
    if not Y.is_zero_element(ring.vsub(_apply(rc.rho, cls), image)):
        raise CertificateError(f"the carried rigidifier misses the expected class in degree {n}")
    logger.debug("carried rigidifier onto %s with scale %s", M.name or "M", ring.to_str(b))
    return rc


def _generator_cocycle(M: Complex, degree: int, coords: Sequence[Any]) -> Vector:
    ring = M.ring
    out = ring.vzero(M.rank(degree))
    for c, z in zip(coords, M.cohomology(degree).cocycles):
        if c:
            out = ring.vadd(out, ring.vscale(c, z))
    return out


def _rho_class(rc: RigidComplex) -> tuple[Vector, Vector, Vector]:
    """(g, z, rho(g)): the pruned generator of H^n(M), a cocycle for it and its image."""
    X = rc.cohomology()
    pruned = X.prune()
    if pruned.module.ngens != 1:
        raise CertificateError(f"H^{rc.degree} of {rc.complex.name or 'M'} is not cyclic")
    g = tuple(pruned.section.column(0))
    return g, _generator_cocycle(rc.complex, rc.degree, g), _apply(rc.rho, g)


def _diagonal_cochain(model: SqChainModel, k: int, value: Sequence[Any]) -> Vector:
    """The degree-k cochain sending the one diagonal generator of degree k to ``value``."""
    if isinstance(model, LocalizedSq):
        raise UnsupportedRingError("a localized square has no cochains of its own")
    P = model.diagonal if isinstance(model, KoszulSq) else model.diagonal.module
    H = model.hom
    ring = H.ring
    hits = [j for j, d in enumerate(P.degrees) if d == k]
    if len(hits) != 1:
        raise CertificateError(f"the diagonal resolution has {len(hits)} generators in degree {k}")
    blocks = [list(ring.vzero(H.target.rank(d + k))) for d in P.degrees]
    blocks[hits[0]] = list(value)
    v = H.from_values(blocks, k)
    if not H.is_cocycle(v, k):
        raise CertificateError(f"the diagonal class in degree {k} is not a cocycle")
    return v


def _square_class(model: KoszulSq, k: int) -> Vector:
    """e_k* (x) e (x) e for the generator e of a rank-one complex in degree k."""
    T = model.tensor
    E = model.rings.ring
    value = list(E.vzero(T.complex.rank(2 * k)))
    value[T.index(k, k, 0, 0)] = E.one
    return _diagonal_cochain(model, k, value)


def _unit_class(model: SqChainModel) -> Vector:
    """The class of 1 (x) 1 in H^0 of the square of B in degree 0, as coordinates over B."""
    if isinstance(model, KoszulSq):
        return class_coordinates(model, _square_class(model, 0), 0)
    if not isinstance(model, SqModel):
        raise UnsupportedRingError("a localized square has no unit class of its own")
    Mt = model.module.module
    starts = [j for j, d in enumerate(Mt.degrees) if d == 0]
    if len(starts) != 1:
        raise CertificateError("the unit class needs one generator of M in degree 0")
    x = {(Mt.algebra.unit_mono, starts[0]): Mt.ring.one}
    T = model.tensor
    value = T.vector(T.tensor_elements(x, x), 0)
    return class_coordinates(model, _diagonal_cochain(model, 0, value), 0)


def carry_rigid(rc: RigidComplex, model: SqChainModel) -> RigidComplex:
    """(M, rho) written on another chain model of Sq_{B/A} M.

    Both models identify H^0 with B through the class of 1 (x) 1, so rho moves as
    the multiple of that class it is.
    """
    if model is rc.model:
        return rc
    if rc.cohomology().is_zero():
        return rigidify(rc.structure, rc.complex, model=model, flat=rc.flat, name=rc.name)
    if rc.degree != 0 or rc.complex.support != (0, 0) or rc.complex.rank(0) != 1:
        raise CertificateError("rigidifiers move between chain models only for B in degree 0")
    g, _, y = _rho_class(rc)
    t = _ratio(rc.rho.target, y, _unit_class(rc.model))
    image = rc.ring.vscale(t, _unit_class(model))
    return rigidify_through(rc.structure, rc.complex, model, g, image, rc.flat, rc.name)


# -- Verification --

@dataclass
class RigidityReport:
    """One row per check: (check, status, detail) with status pass, fail or undetermined."""

    checks: list[tuple[str, str, str]] = field(default_factory=list)

    def add(self, check: str, ok: bool | None, detail: str = "") -> None:
        status = "undetermined" if ok is None else ("pass" if ok else "fail")
        self.checks.append((check, status, detail))

    @property
    def ok(self) -> bool:
        return all(status == "pass" for _, status, _ in self.checks)

    def failing(self) -> list[str]:
        return [name for name, status, _ in self.checks if status == "fail"]

    def undetermined(self) -> list[str]:
        return [name for name, status, _ in self.checks if status == "undetermined"]

    def rows(self) -> list[list[str]]:
        return [list(row) for row in self.checks]


def _flat_check(candidate: RigidComplex) -> tuple[bool, str]:
    if candidate.flat is not None:
        check = check_flat_certificate(candidate.flat, candidate.structure)
        return check.ok, "; ".join(check.reasons) or "certificate accepted"
    M = candidate.complex
    sup = M.support
    if sup is None:
        return True, "zero complex"
    for i in range(sup[0], sup[1] + 1):
        if M.rank(i) and not is_flat_over(M.piece(i), candidate.structure):
            return False, f"piece {i} is not certified flat over {candidate.base}"
    return True, "pieces flat over the base"


def verify_rigid(candidate: RigidComplex) -> RigidityReport:
    report = RigidityReport()
    M = candidate.complex
    n = candidate.degree
    try:
        degree = concentrated_degree(M)
        report.add("bounded cohomology", True,
                   "acyclic" if degree is None else f"finitely generated in degree {degree}")
    except DomainError as exc:
        report.add("bounded cohomology", False, str(exc))
        return report
    ok, detail = _flat_check(candidate)
    report.add("finite flat dimension", ok, detail)
    rho = candidate.rho
    report.add("rho well defined", is_well_defined(rho))
    report.add(f"rho iso in degree {n}", rho.is_iso(),
               f"{rho.source.invariants().describe()} -> {rho.target.invariants().describe()}")
    for i in _model_degrees(candidate.model):
        if i == n:
            continue
        try:
            H = sq_cohomology(candidate.model, i)
        except WindowError as exc:
            report.add(f"Sq vanishes in degree {i}", None, str(exc))
            continue
        report.add(f"Sq vanishes in degree {i}", H.is_zero(), H.invariants().describe())
    return report


# -- Rigid morphisms --

@dataclass
class TraceWitness:
    """rho_M o phi and Sq(phi) o rho_N agree on every generator of H^n(N) over B."""

    phi: ComplexMap
    degree: int
    left: list[Vector]
    right: list[Vector]

    def rows(self) -> list[list[str]]:
        ring = self.phi.target.ring
        return [[str(k), ", ".join(ring.to_str(a) for a in l), ", ".join(ring.to_str(a) for a in r)]
                for k, (l, r) in enumerate(zip(self.left, self.right))]


def _sq_of(u: RingMap, phi: ComplexMap, source: SqModel, target: SqModel) -> SqMorphism:
    return memo_on(phi, "sq_morphism", lambda: sq_morphism(u, phi, source, target),
                   source, target, u)


def _tensor_image(source: KoszulSq, target: KoszulSq, phi: ComplexMap, v: Sequence[Any],
                  degree: int) -> Vector:
    """(phi (x) phi)(v) for v in piece ``degree`` of M (x)_A M over E."""
    TS, TT = source.tensor, target.tensor
    rings = target.rings
    E = rings.ring
    out = list(E.vzero(TT.complex.rank(degree)))
    for p, q in TS.pairs(degree):
        F, G = phi.matrix(p), phi.matrix(q)
        for s in range(TS.first.rank(p)):
            for t in range(TS.second.rank(q)):
                a = v[TS.index(p, q, s, t)]
                if not a:
                    continue
                for s2, x in enumerate(F.column(s)):
                    if not x:
                        continue
                    for t2, y in enumerate(G.column(t)):
                        if not y:
                            continue
                        k = TT.index(p, q, s2, t2)
                        term = E.mul(a, E.mul(rings.first(x), rings.second(y)))
                        out[k] = E.add(out[k], term)
    return tuple(out)


def _koszul_square(source: KoszulSq, target: KoszulSq, phi: ComplexMap, v: Sequence[Any],
                   n: int) -> Vector:
    """Post-composition with phi (x) phi on Hom(K, N (x) N) -> Hom(K, M (x) M)."""
    values = source.hom.values(v, n)
    blocks = [_tensor_image(source, target, phi, blk, d + n) if len(blk) else blk
              for d, blk in zip(source.diagonal.degrees, values)]
    return target.hom.from_values(blocks, n)


def square_class(u: RingMap, phi: ComplexMap, source: RigidComplex, target: RigidComplex,
                 coords: Sequence[Any]) -> Vector:
    """Sq_u(phi) on the class with ``coords`` in H^n(Sq_{C/A} N), as coordinates over B."""
    n = target.degree
    if isinstance(source.model, LocalizedSq) or isinstance(target.model, LocalizedSq):
        raise UnsupportedRingError("maps are squared on chain models, not on localized squares")
    if isinstance(source.model, KoszulSq) and isinstance(target.model, KoszulSq):
        if not u.is_identity or source.model.rings is not target.model.rings:
            raise UnsupportedRingError("Koszul models only square maps over one ring")
        v = class_cochain(source.model, coords, n)
        return class_coordinates(target.model, _koszul_square(source.model, target.model, phi, v, n), n)
    if isinstance(source.model, SqModel) and isinstance(target.model, SqModel):
        mor = _sq_of(u, phi, source.model, target.model)
        v = class_cochain(source.model, coords, n)
        restriction = scalar_restriction(mor.iota.ring_map)
        w = mor.complex_map().apply(n, restriction.vector(v))
        return class_coordinates(target.model, w, n)
    raise DomainError("the two rigid complexes use different kinds of chain model")


def _unrestrict(u: RingMap, v: Sequence[Any]) -> Vector:
    """A vector of N|_B back over C."""
    restriction = scalar_restriction(u)
    C = u.target
    if restriction.kind == "identity":
        return tuple(v)
    if restriction.kind == "surjective":
        return u.on_vector(v)
    B = u.source
    one = C.base.domain.one
    basis = [C.normal_form(C.poly.from_dict({m: one})) for m in C.monomial_basis]
    d = len(basis)
    out = []
    for k in range(len(v) // d):
        acc = C.zero
        for t, b in enumerate(basis):
            c = B.constant_value(v[k * d + t])
            if c:
                acc = C.add(acc, C.mul(C.const(c), b))
        out.append(acc)
    return tuple(out)


def verify_rigid_morphism(phi: ComplexMap, target: RigidComplex, source: RigidComplex,
                          u: RingMap | None = None) -> TraceWitness | None:
    """Whether phi : N|_B -> M makes rho_M o phi = Sq_u(phi) o rho_N; a witness if so."""
    B = target.ring
    u = u or RingMap.identity(B)
    if source.ring is not u.target or u.source is not B:
        raise DomainError("the rigid complexes do not sit over the ring map")
    n = target.degree
    if source.degree != n:
        both_zero = target.cohomology().is_zero() and source.cohomology().is_zero()
        return TraceWitness(phi, n, [], []) if both_zero else None
    Hphi = induced_map(phi, n)
    HN = source.complex.cohomology(n)
    C = u.target
    left, right = [], []
    for k, z in enumerate(phi.source.cohomology(n).cocycles):
        left.append(_apply(target.rho, Hphi.columns[k]))
        coords = HN.coordinates(_unrestrict(u, z))
        if coords is None:
            raise DomainError("restricted cocycle does not come from N")
        y = _apply(source.rho, C.vnf(coords))
        right.append(square_class(u, phi, source, target, y))
    Y = target.rho.target
    for l, r in zip(left, right):
        if not Y.is_zero_element(B.vsub(l, r)):
            logger.debug("rigidity square fails for %s", phi.source.name or "phi")
            return None
    return TraceWitness(phi, n, left, right)


def endomorphisms_are_scalars(rc: RigidComplex) -> bool:
    """B -> End(M) is bijective: H^n(M) is free of rank one."""
    pruned = rc.cohomology().prune().module
    return pruned.ngens == 1 and not pruned.relations


def scalar_rigid_check(c: Any, rc: RigidComplex) -> bool:
    """Whether c * 1_M is a rigid automorphism of (M, rho)."""
    B = rc.ring
    c = B(c)
    if B.inverse(c) is None:
        return False
    phi = rc.complex.identity().scale(c)
    return verify_rigid_morphism(phi, rc, rc) is not None


def rigid_auto_scan(rc: RigidComplex, units: Sequence[Any]) -> list[PolyElement]:
    """The candidate units b for which b * 1_M is rigid."""
    if not endomorphisms_are_scalars(rc):
        raise CertificateError("End(M) is not B; the automorphism scan does not apply")
    B = rc.ring
    passing = [B(b) for b in units if scalar_rigid_check(b, rc)]
    logger.info("rigid automorphism scan: %d of %d candidates pass", len(passing), len(units))
    return passing


def unit_candidates(B: PresentedRing, height: int = 1) -> list[PolyElement]:
    """Units of a finite algebra with basis coefficients in [-height, height] (all of GF(p))."""
    basis = B.monomial_basis
    if basis is None or B.regime not in ("field", "zz-finite"):
        raise UnsupportedRingError(f"{B} is not finite over its base")
    if B.base.kind == "GF":
        values = list(range(B.base.prime))
    else:
        values = list(range(-height, height + 1))
    if len(values) ** len(basis) > UNIT_SCAN_LIMIT:
        raise DomainError(f"{len(values) ** len(basis)} candidates exceed the scan limit")
    N = len(basis)
    out = []
    for coords in itertools.product(values, repeat=N):
        if not any(coords):
            continue
        b = B.from_coordinates(coords)
        if B.multiplication_matrix(b).rank() == N and B.inverse(b) is not None:
            out.append(b)
    return out


# -- f^flat and traces --

def _single_piece(rc: RigidComplex) -> tuple[FPModule, int]:
    sup = rc.complex.support
    if sup is None:
        return FPModule(rc.ring, 0), rc.degree
    if sup[0] != sup[1]:
        raise CertificateError("f^flat needs a complex with one nonzero piece")
    return rc.complex.piece(sup[0]), sup[0]


def dual_module(f: RingMap, X: FPModule) -> FPModule:
    """Hom_B(C, X) as a C-module for C free over a base-only B; generator k*m + j is e_k* (x) x_j."""
    B, C = f.source, f.target
    if C.regime == "zz-finite" and C.lattice.rank:
        raise UnsupportedRingError(f"{C} is not free over {B}")
    basis = C.monomial_basis
    r, m = len(basis), X.ngens
    rels = []
    for rel in X.relations:
        for k in range(r):
            v = [C.zero] * (r * m)
            for j, c in enumerate(rel):
                v[k * m + j] = f(c)
            rels.append(v)
    for x in C.gens:
        mult = C.multiplication_matrix(x)
        for k in range(r):
            for j in range(m):
                v = [C.zero] * (r * m)
                v[k * m + j] = C.add(v[k * m + j], x)
                for l in range(r):
                    c = mult[k, l]
                    if c:
                        v[l * m + j] = C.sub(v[l * m + j], C.const(c))
                rels.append(v)
    return FPModule(C, r * m, rels)


def trace_map(f: RingMap, N: Complex, M: Complex, degree: int) -> ComplexMap:
    """Evaluation at 1 from Hom_B(C, M) restricted to B back to M."""
    B, C = f.source, f.target
    r = len(C.monomial_basis)
    m = M.rank(degree)
    NB = restrict_complex(N, f)
    cols = []
    for g in range(N.rank(degree)):
        k, j = divmod(g, m)
        for t in range(r):
            cols.append(B.unit_vector(m, j) if t == k else B.vzero(m))
    mats = {degree: Matrix(m, len(cols), tuple(cols))} if cols else {}
    return ComplexMap(NB, M, RingMap.identity(B), mats)


@dataclass
class ExtShriek:
    """RHom_B(C, X[-degree]) for C = B/I: its one cohomology module over C in degree k.

    ``hom`` is Hom_B(P, X[-degree]) for a resolution P of C; ``cocycles`` are the
    cocycles of its piece k behind the generators of H^k, and ``section`` writes the
    generators of ``complex`` (the pruned base change to C) in them.
    """

    map: RingMap
    complex: Complex
    degree: int
    hom: HomModule | None = None
    resolution: Any = None
    cocycles: list[Vector] = field(default_factory=list)
    section: Matrix | None = None

    def evaluations(self) -> list[Vector]:
        """psi(1) in X for each generator psi of Hom_B(C, X), in the Hom case k = degree."""
        if self.hom is None:
            return []
        g = self.map
        B = g.source
        P = self.resolution.module
        starts = [j for j, d in enumerate(P.degrees) if d == 0]
        if self.complex.support != (self.degree, self.degree) or len(starts) != 1:
            raise UnsupportedRingError("evaluation at 1 needs Hom_B(C, X) in the degree of X")
        j0 = starts[0]
        unit = P.vector({(P.algebra.unit_mono, j0): B.one}, 0)
        if self.resolution.augmentation.apply(0, unit) != (B.one,):
            raise UnsupportedRingError("the resolution of C does not start at 1")
        k = self.degree
        blocks = [self.hom.values(z, k)[j0] for z in self.cocycles]
        out = []
        for t in range(self.section.ncols):
            acc = B.vzero(len(blocks[0]) if blocks else 0)
            for i, c in enumerate(self.section.column(t)):
                if not c:
                    continue
                pre = g.preimage(c)
                if pre is None:
                    raise DomainError(f"{g.target.to_str(c)} has no preimage in {B}")
                acc = B.vadd(acc, B.vscale(pre, blocks[i]))
            out.append(acc)
        return out


def ext_shriek(f: RingMap, X: FPModule, degree: int, depth: int = DEFAULT_DEPTH) -> ExtShriek:
    """g^flat of X[-degree] along a surjection, found where its cohomology sits."""
    B, C = f.source, f.target
    try:
        span = global_dimension(B)
    except UnsupportedRingError:
        span = depth
    Cmod = Complex(B, {0: 1}, {}, {0: [(g,) for g in f.kernel_generators()]}, name=str(C))
    res = semifree_module_resolution(FlatModule(Cmod), -(span + 2), name=f"{C}~")
    hom = HomModule(res.module, FlatModule(module_complex(X, degree)))
    flat = hom.flatten(degree - 1, degree + span + 1)
    found = [(k, flat.cohomology(k)) for k in range(degree, degree + span + 1)]
    found = [(k, H) for k, H in found if not H.is_zero()]
    if len(found) > 1:
        raise DomainError(f"f^flat has cohomology in degrees {[k for k, _ in found]}")
    if not found:
        return ExtShriek(f, Complex(C, {}, name="0"), degree)
    k, H = found[0]
    pruned = H.module.base_change(f).prune()
    return ExtShriek(f, module_complex(pruned.module, k), degree, hom, res,
                     list(H.cocycles), pruned.section)


@dataclass
class ShriekResult:
    """f^flat(M, rho) over C with the trace back to M when it is computable.

    Along a surjection there is no trace to pin the rigidifier, so it is the
    normalized one and ``scale`` stays None.
    """

    map: RingMap
    base: RigidComplex
    rigid: RigidComplex
    trace: ComplexMap | None = None
    witness: TraceWitness | None = None
    scale: PolyElement | None = None
    unique: bool = True


def _project(Y: FPModule, v: Sequence[Any]) -> list[Any]:
    """Coordinates over the base of a class in a module over a ring without variables."""
    pruned = Y.prune()
    if pruned.module.relations:
        raise UnsupportedRingError("the square is not free over the base ring")
    ring = Y.ring
    return [ring.constant_value(c) for c in ring.apply(pruned.projection, v)]


def trace_scale(f: RingMap, trace: ComplexMap, base: RigidComplex,
                source: RigidComplex) -> tuple[PolyElement, bool]:
    """The b in C with rho_M o Tr = Sq(Tr) o (b rho_N), and whether it is the only one.

    Both sides are linear over the base field in b, so the scale is the solution
    of one linear system on the basis of C.
    """
    B, C = f.source, f.target
    n = base.degree
    if source.degree != n or source.cohomology().is_zero():
        return C.one, True
    HN = source.complex.cohomology(n)
    Hphi = induced_map(trace, n)
    Y = base.rho.target
    r = len(C.monomial_basis)
    basis = [C.from_coordinates([1 if k == t else 0 for k in range(r)]) for t in range(r)]
    rows: list[list[Any]] = []
    rhs: list[Any] = []
    for k, z in enumerate(trace.source.cohomology(n).cocycles):
        left = _project(Y, _apply(base.rho, Hphi.columns[k]))
        coords = HN.coordinates(_unrestrict(f, z))
        if coords is None:
            raise DomainError("restricted cocycle does not come from N")
        y = _apply(source.rho, C.vnf(coords))
        cols = [_project(Y, square_class(f, trace, source, base, C.vscale(e, y)))
                for e in basis]
        for i, value in enumerate(left):
            rows.append([col[i] for col in cols])
            rhs.append(value)
    system = ExactMatrix.from_rows(B.base, rows, r)
    solution = solve_linear(system, rhs)
    if solution is None:
        raise CertificateError("no multiple of the rigidifier makes the trace rigid")
    b = C.from_coordinates(solution)
    if C.inverse(b) is None:
        raise CertificateError(f"the trace needs the non-unit multiple {C.to_str(b)}")
    return b, not kernel_basis(system)


def _rigid_trace(f: RingMap, trace: ComplexMap, rc: RigidComplex, N: Complex,
                 window: tuple[int, int], depth: int) -> ShriekResult:
    """The rigidifier on N that makes ``trace`` : N|_B -> M rigid."""
    C = f.target
    composite = f.compose(rc.structure)
    source_model, target_model = morphism_models(rc.structure, f, N, rc.complex, window, depth)
    base = carry_rigid(rc, target_model)
    first = rigidify(composite, N, model=source_model)
    b, unique = trace_scale(f, trace, base, first)
    rigid = first if C.is_zero(C.sub(b, C.one)) else \
        rigidify(composite, N, model=source_model, scale=b)
    witness = verify_rigid_morphism(trace, base, rigid, f)
    if witness is None:
        raise CertificateError("the scaled rigidifier does not make the trace rigid")
    logger.info("trace is rigid for the rigidifier scaled by %s", C.to_str(b))
    return ShriekResult(f, base, rigid, trace, witness, b, unique)


def flat_shriek(f: RingMap, rc: RigidComplex, window: tuple[int, int] = DEFAULT_WINDOW,
                depth: int = DEFAULT_DEPTH) -> ShriekResult:
    """f^flat M = RHom_B(C, M) with the rigidifier that makes the trace rigid."""
    if f.source is not rc.ring:
        raise DomainError("the ring map does not start at the ring of the complex")
    C = f.target
    if f.is_identity:
        phi = rc.complex.identity()
        return ShriekResult(f, rc, rc, phi, verify_rigid_morphism(phi, rc, rc), C.one)
    X, degree = _single_piece(rc)
    try:
        kind = scalar_restriction(f).kind
    except UnsupportedRingError as exc:
        raise CertificateError(f"no finiteness certificate for {f.source} -> {C}") from exc
    if kind == "surjective":
        N = ext_shriek(f, X, degree, depth).complex
        N.name = f"f^flat {rc.complex.name or 'M'}"
        logger.info("f^flat along the surjection onto %s keeps the normalized rigidifier", C)
        return ShriekResult(f, rc, rigidify(f.compose(rc.structure), N, window, depth))
    N = module_complex(dual_module(f, X), degree)
    N.name = f"f^flat {rc.complex.name or 'M'}"
    return _rigid_trace(f, trace_map(f, N, rc.complex, degree), rc, N, window, depth)


def trace_morphism(f: RingMap, rc: RigidComplex, window: tuple[int, int] = DEFAULT_WINDOW,
                   depth: int = DEFAULT_DEPTH) -> ShriekResult:
    """Tr : f^flat M -> M with its rigidity witness; refuses when no trace chain map exists."""
    out = flat_shriek(f, rc, window, depth)
    if out.trace is None:
        raise UnsupportedRingError("the trace is only built for C finite and free over B")
    return out


def trace_scan(shriek: ShriekResult, height: int = 1) -> list[PolyElement]:
    """Units b for which Tr stays rigid after scaling the rigidifier of f^flat M by b."""
    if shriek.trace is None:
        raise UnsupportedRingError("no trace to scan")
    f = shriek.map
    C = f.target
    units = unit_candidates(C, height)
    if shriek.scale is not None and not any(C.is_zero(C.sub(u, C.one)) for u in units):
        units.append(C.one)
    out = []
    for b in units:
        candidate = RigidComplex(shriek.rigid.structure, shriek.rigid.complex, shriek.rigid.model,
                                 shriek.rigid.degree, _scaled(shriek.rigid.rho, b))
        if verify_rigid_morphism(shriek.trace, shriek.base, candidate, f) is not None:
            out.append(b)
    return out


def _scaled(H: InducedMap, b: PolyElement) -> InducedMap:
    ring = H.target.ring
    return InducedMap(H.degree, H.source, H.target, [ring.vscale(b, c) for c in H.columns])


@dataclass
class ShriekCoherence:
    """(g o f)^flat M against g^flat f^flat M, compared through their traces to M.

    ``twice`` carries the rigidifier that makes Tr_f o Tr_g rigid; ``map`` is
    n -> (c -> Tr_f Tr_g(c n)) onto Hom_A(C, M).
    """

    once: ShriekResult
    twice: ShriekResult
    map: ComplexMap
    witness: TraceWitness | None

    @property
    def ok(self) -> bool:
        return self.witness is not None


def _composite_trace(f: RingMap, g: RingMap, gf: RingMap, inner: ShriekResult, ext: ExtShriek,
                     degree: int) -> ComplexMap:
    """Tr_f o Tr_g on g^flat f^flat M restricted along g o f."""
    B = f.target
    M = inner.trace.target
    restriction = scalar_restriction(f)
    elements = [v[0] for v in scalar_restriction(gf).basis(1)]
    cols = []
    for psi in ext.evaluations():
        for c in elements:
            pre = g.preimage(c)
            if pre is None:
                raise DomainError(f"{g.target.to_str(c)} has no preimage in {B}")
            cols.append(inner.trace.apply(degree, restriction.vector(B.vscale(pre, psi))))
    source = restrict_complex(ext.complex, gf)
    m = M.rank(degree)
    return ComplexMap(source, M, RingMap.identity(f.source),
                      {degree: Matrix(m, len(cols), tuple(cols))})


def _trace_identification(gf: RingMap, trace: ComplexMap, N: Complex, target: Complex,
                          degree: int) -> ComplexMap:
    C = gf.target
    r = scalar_restriction(gf).dim
    m = trace.target.rank(degree)
    F = trace.matrix(degree)
    cols = []
    for n in range(N.rank(degree)):
        v = [C.zero] * (r * m)
        for t in range(r):
            for j, x in enumerate(F.column(n * r + t)):
                v[t * m + j] = gf(x)
        cols.append(C.vnf(v))
    return ComplexMap(N, target, RingMap.identity(C),
                      {degree: Matrix(r * m, len(cols), tuple(cols))})


def shriek_coherence(f: RingMap, g: RingMap, rc: RigidComplex,
                     window: tuple[int, int] = DEFAULT_WINDOW,
                     depth: int = DEFAULT_DEPTH) -> ShriekCoherence:
    """(g o f)^flat M = g^flat f^flat M as rigid complexes, for f finite free and g onto."""
    if g.source is not f.target:
        raise DomainError("the ring maps do not compose")
    gf = g.compose(f)
    kinds = (scalar_restriction(f).kind, scalar_restriction(g).kind)
    if kinds != ("finite", "surjective"):
        raise UnsupportedRingError(f"f^flat coherence needs a finite f and an onto g, not {kinds}")
    once = flat_shriek(gf, rc, window, depth)
    inner = flat_shriek(f, rc, window, depth)
    X, degree = _single_piece(inner.rigid)
    ext = ext_shriek(g, X, degree, depth)
    N = ext.complex
    N.name = f"g^flat f^flat {rc.complex.name or 'M'}"
    trace = _composite_trace(f, g, gf, inner, ext, degree)
    twice = _rigid_trace(gf, trace, rc, N, window, depth)
    phi = _trace_identification(gf, trace, N, once.rigid.complex, degree)
    H = induced_map(phi, degree)
    if not is_well_defined(H) or not H.is_iso():
        raise CertificateError("the trace pairing does not identify the two complexes")
    witness = verify_rigid_morphism(phi, once.rigid, twice.rigid)
    logger.info("f^flat coherence over %s: %s", gf.target, "rigid" if witness else "not rigid")
    return ShriekCoherence(once, twice, phi, witness)


@dataclass
class CoalgebraCheck:
    """The dual of a finite algebra as a coalgebra with counit the trace."""

    coassociative: bool
    cocommutative: bool
    counit: bool

    @property
    def ok(self) -> bool:
        return self.coassociative and self.cocommutative and self.counit


def coalgebra_check(C: PresentedRing) -> CoalgebraCheck:
    """Comultiplication on C* dual to the product, checked on a basis."""
    basis = C.monomial_basis
    if basis is None or C.regime != "field":
        raise UnsupportedRingError(f"{C} is not finite over a field")
    N = len(basis)
    dom = C.base.domain
    elems = [C.from_coordinates([dom.one if k == j else dom.zero for k in range(N)])
             for j in range(N)]
    # m[i][j][k]: coefficient of e_k in e_i e_j
    m = [[C.coordinates(C.mul(a, b)) for b in elems] for a in elems]
    unit = C.coordinates(C.one)
    coassoc = all(
        sum((m[i][j][l] * m[l][k][p] for l in range(N)), dom.zero)
        == sum((m[j][k][l] * m[i][l][p] for l in range(N)), dom.zero)
        for i in range(N) for j in range(N) for k in range(N) for p in range(N))
    cocomm = all(m[i][j] == m[j][i] for i in range(N) for j in range(N))
    counit = all(
        sum((unit[i] * m[i][j][k] for i in range(N)), dom.zero) == (dom.one if j == k else dom.zero)
        for j in range(N) for k in range(N))
    return CoalgebraCheck(coassoc, cocomm, counit)


# -- f^sharp and localization --

@dataclass
class SharpResult:
    map: RingMap
    base: RigidComplex
    rigid: RigidComplex
    fundamental: FundamentalIso | None = None
    cup: CupProduct | None = None


def _omega_complex(f: RingMap, n: int) -> Complex:
    module = omega_power(f, n).prune().module
    out = module_complex(module, -n)
    out.name = f"Omega^{n}[{n}]"
    return out


def _cyclic_generator(X: FPModule) -> Vector:
    pruned = X.prune()
    if pruned.module.ngens != 1:
        raise CertificateError("the cohomology is not cyclic")
    return tuple(pruned.section.column(0))


def _rho_cochain(rc: RigidComplex) -> tuple[int, Vector, Vector] | None:
    """(n, z, alpha): a generating cocycle of M and a cochain for rho of its class."""
    if rc.cohomology().is_zero():
        return None
    _, z, y = _rho_class(rc)
    return rc.degree, z, class_cochain(rc.model, y, rc.degree)


def _product_rigid(u: RingMap, cup: CupProduct, left: tuple[int, Vector, Vector] | None,
                   right: tuple[int, Vector, Vector] | None, name: str) -> RigidComplex:
    """rho on M (x) N sending [z_M (x) z_N] to the cup product of the two rho classes.

    ``left`` lives in the first model of ``cup`` over B, ``right`` in the second over C.
    """
    L = cup.product.complex
    L.name = name
    if left is None or right is None:
        return rigidify(u, L, model=cup.target, name=name)
    p, zM, alpha = left
    q, zN, beta = right
    f = cup.structure
    C = f.target
    T = cup.product
    v = list(C.vzero(L.rank(p + q)))
    for s, a in enumerate(zM):
        if not a:
            continue
        for t, b in enumerate(zN):
            if b:
                k = T.index(p, q, s, t)
                v[k] = C.add(v[k], C.mul(f(a), b))
    cls = L.cohomology(p + q).coordinates(v)
    if cls is None:
        raise DomainError("the product of the generating cocycles is not a cocycle")
    image = class_coordinates(cup.target, cup.apply(alpha, p, beta, q), p + q)
    return rigidify_through(u, L, cup.target, C.vnf(cls), image, name=name)


def sharp(f: RingMap, rc: RigidComplex, chart: Chart | None = None,
          window: tuple[int, int] = DEFAULT_WINDOW, depth: int = DEFAULT_DEPTH) -> SharpResult:
    """f^sharp L = L (x)_B Omega^n_{C/B}[n] with rho_L (x) rho_Omega through the cup product.

    rho_Omega sends the generator of Omega^n[n] to the class of the top Koszul
    generator, which the fundamental isomorphism certifies as a generator.
    """
    if f.source is not rc.ring:
        raise DomainError("the ring map does not start at the ring of the complex")
    if not isinstance(rc.model, KoszulSq):
        raise CertificateError("f^sharp carries rho from a Koszul model of Sq only")
    n = kaehler(f).rank()
    if n is None:
        raise CertificateError("Omega is not free of constant rank; give a chart")
    fundamental = None
    if n:
        fundamental = fundamental_iso(f, chart)
        if not fundamental.is_iso():
            raise CertificateError("the chart does not give an isomorphism onto Ext")
    omega = _omega_complex(f, n)
    cup = cup_product(rc.structure, f, rc.complex, omega, condition="smooth", first=rc.model)
    if not cup.asserted:
        raise CertificateError(f"cup product fails in degrees {cup.certificate.failing_degrees()}")
    z = _generator_cocycle(omega, -n, _cyclic_generator(omega.cohomology(-n).module))
    right = (-n, z, _square_class(cup.second, -n))
    rigid = _product_rigid(f.compose(rc.structure), cup, _rho_cochain(rc), right,
                           f"f^sharp {rc.complex.name or 'L'}")
    return SharpResult(f, rc, rigid, fundamental, cup)


@dataclass
class SharpCoherence:
    """(g o f)^sharp L against g^sharp f^sharp L through f*beta ^ gamma.

    ``fractions`` records that the generalized fraction of f*beta ^ gamma is the
    product of the fractions of beta and gamma, up to (-1)^(mn), on basis forms.
    """

    once: SharpResult
    twice: SharpResult
    map: ComplexMap
    witness: TraceWitness | None
    fractions: bool

    @property
    def ok(self) -> bool:
        return self.witness is not None and self.fractions


def _wedge_map(f: RingMap, g: RingMap, rc: RigidComplex, first: SharpResult,
               second: SharpResult, once: SharpResult) -> ComplexMap:
    """(l (x) beta) (x) gamma -> l (x) f*beta ^ gamma on the pruned forms."""
    C = g.target
    m, n = kaehler(f).rank(), kaehler(g).rank()
    comp = omega_composition(f, g)
    pb, pcb = omega_power(f, m).prune(), omega_power(g, n).prune()
    pc = omega_power(g.compose(f), m + n).prune()
    X, p = _single_piece(rc)
    inner, outer, whole = first.cup.product, second.cup.product, once.cup.product
    L1, L2 = once.rigid.complex, second.rigid.complex
    D = p - m - n
    cols = [list(C.vzero(L1.rank(D))) for _ in range(L2.rank(D))]
    for a in range(pb.module.ngens):
        sa = pb.section.column(a)
        for c in range(pcb.module.ngens):
            sc = pcb.section.column(c)
            w = C.vzero(comp.target.ngens)
            for i, x in enumerate(sa):
                if not x:
                    continue
                for j, y in enumerate(sc):
                    if y:
                        w = C.vadd(w, C.vscale(C.mul(g(x), y), comp.columns[i * len(sc) + j]))
            eps = C.apply(pc.projection, w)
            for s in range(X.ngens):
                col = cols[outer.index(p - m, -n, inner.index(p, -m, s, a), c)]
                for k, e in enumerate(eps):
                    if e:
                        row = whole.index(p, -(m + n), s, k)
                        col[row] = C.add(col[row], e)
    F = Matrix(L1.rank(D), L2.rank(D), tuple(C.vnf(col) for col in cols))
    return ComplexMap(L2, L1, RingMap.identity(C), {D: F})


def _pulled_form(ring: PresentedRing, one_form: Any, gens: Sequence[Any], form: Form,
                 coefficient: Any = None) -> Form:
    """sum c_S dg_S for form = {S: c_S}, with dg_i = one_form(gens[i])."""
    out: Form = {}
    for S, c in form.items():
        scale = coefficient(c) if coefficient is not None else c
        for T, a in wedge_all(ring, [one_form(gens[i]) for i in S]).items():
            out[T] = ring.add(out.get(T, ring.zero), ring.mul(scale, a))
    return {k: v for k, v in out.items() if v}


def _fractions_agree(f: RingMap, g: RingMap) -> bool:
    """|dt ^ p2*(f*beta ^ gamma) / t| = (-1)^(mn) |dt_B ^ p2*beta ^ dt_CB ^ p2*gamma / t_B, t_CB|."""
    B, C = f.target, g.target
    gf = g.compose(f)
    m, n = kaehler(f).rank(), kaehler(g).rank()
    iso = fundamental_iso(gf)
    rings = iso.rings
    E = rings.ring
    omega_e = iso.top.kaehler
    omega_c = kaehler(gf)
    lam_b, lam_cb = exterior_power(kaehler(f), m), exterior_power(kaehler(g), n)
    pb, pcb = lam_b.module.prune(), lam_cb.module.prune()
    t_b = [E.sub(rings.first(g(x)), rings.second(g(x))) for x in new_generators(f)]
    t_cb = [E.sub(rings.first(x), rings.second(x)) for x in new_generators(g)]
    keys = [E.to_str(t) for t in t_b + t_cb]
    rows = []
    for t in iso.sequence:
        key = E.to_str(t)
        if key not in keys:
            raise CertificateError("the composite chart is not made of the two charts")
        rows.append([1 if k == keys.index(key) else 0 for k in range(len(keys))])
    dt_b = [omega_e.one_form(t) for t in t_b]
    dt_cb = [omega_e.one_form(t) for t in t_cb]
    dt = [omega_e.one_form(t) for t in iso.sequence]
    second = [rings.second(x) for x in C.gens]
    gens_b = [g(x) for x in B.gens]
    second_b = [rings.second(x) for x in gens_b]
    H = iso.dual.ext(m + n)
    sign = E.const(-1 if (m * n) % 2 else 1)
    for a in range(pb.module.ngens):
        beta = {S: g(x) for S, x in zip(lam_b.subsets, pb.section.column(a)) if x}
        p2_beta = _pulled_form(E, omega_e.one_form, second_b, beta, rings.second)
        pulled = _pulled_form(C, omega_c.one_form, gens_b, beta)
        for c in range(pcb.module.ngens):
            gamma = {T: y for T, y in zip(lam_cb.subsets, pcb.section.column(c)) if y}
            p2_gamma = _pulled_form(E, omega_e.one_form, second, gamma, rings.second)
            mu = iso.top.vector(wedge_all(E, dt_b + [p2_beta] + dt_cb + [p2_gamma]))
            split = fraction_change_of_sequence(
                GeneralizedFraction(E, mu, tuple(t_b + t_cb)), rows)
            form = wedge(C, pulled, gamma)
            p2_form = _pulled_form(E, omega_e.one_form, second, form, rings.second)
            whole = GeneralizedFraction(E, iso.top.vector(wedge_all(E, dt + [p2_form])),
                                        iso.sequence)
            lhs = E.vnf(split.coordinates(iso.dual))
            rhs = E.vscale(sign, E.vnf(whole.coordinates(iso.dual)))
            if not H.module.is_zero_element(E.vsub(lhs, rhs)):
                logger.debug("fractions disagree on forms %d, %d", a, c)
                return False
    return True


def sharp_coherence(f: RingMap, g: RingMap, rc: RigidComplex,
                    window: tuple[int, int] = DEFAULT_WINDOW,
                    depth: int = DEFAULT_DEPTH) -> SharpCoherence:
    """(g o f)^sharp L = g^sharp f^sharp L as rigid complexes along f*beta ^ gamma."""
    if g.source is not f.target:
        raise DomainError("the ring maps do not compose")
    once = sharp(g.compose(f), rc, window=window, depth=depth)
    first = sharp(f, rc, window=window, depth=depth)
    second = sharp(g, first.rigid, window=window, depth=depth)
    phi = _wedge_map(f, g, rc, first, second, once)
    H = induced_map(phi, once.rigid.degree)
    if not is_well_defined(H) or not H.is_iso():
        raise CertificateError("the wedge of forms does not identify the two complexes")
    witness = verify_rigid_morphism(phi, once.rigid, second.rigid)
    fractions = _fractions_agree(f, g)
    logger.info("f^sharp coherence over %s: rigid %s, fractions %s", g.target,
                witness is not None, fractions)
    return SharpCoherence(once, second, phi, witness, fractions)


@dataclass
class LocalizationMorphism:
    """q : M -> A' (x)_A M, m -> 1 (x) m, for an etale A -> A'."""

    map: ComplexMap
    nondegenerate: bool


def _base_change_iso(f: RingMap, M: Complex, target: Complex) -> bool:
    """1 (x) H^i(q) : A' (x)_A H^i(M) -> H^i(A' (x)_A M) is bijective in every degree."""
    sup = M.support
    if sup is None:
        return True
    for i in range(sup[0], sup[1] + 1):
        HX, HY = M.cohomology(i), target.cohomology(i)
        cols = []
        for z in HX.cocycles:
            c = HY.coordinates(f.on_vector(z))
            if c is None:
                return False
            cols.append(tuple(c))
        if not InducedMap(i, HX.module.base_change(f), HY.module, cols).is_iso():
            return False
    return True


def q_sharp(f: RingMap, M: Complex) -> LocalizationMorphism:
    if not kaehler(f).module.is_zero():
        raise CertificateError(f"{f.source} -> {f.target} is not etale")
    if M.ring is not f.source:
        raise DomainError("the complex does not live over the source ring")
    target = M.base_change(f)
    sup = M.support
    mats = {} if sup is None else {
        i: f.target.identity_matrix(M.rank(i)) for i in range(sup[0], sup[1] + 1)}
    q = ComplexMap(M, target, f, mats)
    return LocalizationMorphism(q, _base_change_iso(f, M, target))


def q_sharp_rigid(f: RingMap, rc: RigidComplex, window: tuple[int, int] = DEFAULT_WINDOW,
                  depth: int = DEFAULT_DEPTH) -> tuple[RigidComplex, bool | None]:
    """(A' (x) M, 1 (x) rho) and whether Sq commutes with the base change in degree n.

    rho' lands in A' (x) Sq_{B/A} M; the flag compares that module with a square
    computed directly over A', and is None when the window cannot decide.
    """
    q = q_sharp(f, rc.complex)
    target = q.map.target
    target.name = f"{f.target} (x) {rc.complex.name or 'M'}"
    u = f.compose(rc.structure)
    model = LocalizedSq(rc.model, f)
    if rc.cohomology().is_zero():
        rigid = rigidify(u, target, model=model)
    else:
        _, z, y = _rho_class(rc)
        cls = target.cohomology(rc.degree).coordinates(f.on_vector(z))
        if cls is None:
            raise DomainError("the localized generating cocycle is not a cocycle")
        rigid = rigidify_through(u, target, model, f.target.vnf(cls), f.on_vector(y))
    try:
        direct = sq_cohomology(sq_chain_model(u, target, window, depth), rc.degree)
    except (WindowError, UnsupportedRingError) as exc:
        logger.warning("no direct square over %s: %s", f.target, exc)
        return rigid, None if q.nondegenerate else False
    expected = model.cohomology(rc.degree)
    agrees = direct.prune().module.invariants() == expected.prune().module.invariants()
    return rigid, agrees and q.nondegenerate


# -- Tensor products of rigid complexes --

@dataclass
class TensorRigid:
    rigid: RigidComplex
    cup: CupProduct


def tensor_rigid(rc_m: RigidComplex, rc_n: RigidComplex, f: RingMap,
                 condition: str | None = "smooth", window: tuple[int, int] = DEFAULT_WINDOW,
                 depth: int = DEFAULT_DEPTH) -> TensorRigid:
    """(M (x)^L_B N, rho_M (x) rho_N) over C relative to A, gated on the cup product."""
    if rc_m.ring is not f.source or rc_n.ring is not f.target or rc_n.structure.source is not f.source:
        raise DomainError("the rigid complexes do not sit over the ring maps")
    if condition is None:
        raise CertificateError("no condition certificate for the cup product")
    M, N = rc_m.complex, rc_n.complex
    if not (M.is_free() or N.is_free()):
        raise DomainError("the derived tensor product needs a free factor")
    if not isinstance(rc_m.model, KoszulSq) or not isinstance(rc_n.model, KoszulSq):
        raise CertificateError("rho_M (x) rho_N is formed on Koszul models of both squares")
    cup = cup_product(rc_m.structure, f, M, N, condition, first=rc_m.model, second=rc_n.model)
    if not cup.asserted:
        raise CertificateError(f"cup product fails in degrees {cup.certificate.failing_degrees()}")
    rigid = _product_rigid(f.compose(rc_m.structure), cup, _rho_cochain(rc_m),
                           _rho_cochain(rc_n), f"{M.name or 'M'}.{N.name or 'N'}")
    return TensorRigid(rigid, cup)


# -- Existence --

@dataclass
class ExistenceResult:
    ring: PresentedRing
    complex: Complex | None
    rigid: RigidComplex | None = None
    report: RigidityReport | None = None
    end_check: bool | None = None
    notes: list[str] = field(default_factory=list)

    @property
    def partial(self) -> bool:
        return self.rigid is None or self.report is None or bool(self.report.undetermined())

    @property
    def ok(self) -> bool:
        return not self.partial and self.report.ok and bool(self.end_check)


def _existence_rigid(A: PresentedRing, taut: RigidComplex, notes: list[str],
                     window: tuple[int, int], depth: int) -> RigidComplex:
    K = taut.ring
    if A.localization is not None:
        parent = A.localization.parent
        inner = _existence_rigid(parent, taut, notes, window, depth)
        h = RingMap(parent, A, [A.var(v) for v in parent.variables])
        rigid, agrees = q_sharp_rigid(h, inner, window, depth)
        notes.append(f"localized at {parent.to_str(A.localization.element)}")
        if agrees is None:
            notes.append("window too small to compare with the square over the localization")
        elif not agrees:
            notes.append("the localized square differs from the one computed over the localization")
        return rigid
    if not A.nvars and not A.ideal_gens:
        notes.append("tautological over the base")
        return tautological_rigid(A, window)
    f = RingMap(K, A, [])
    if not A.ideal_gens:
        notes.append(f"f^sharp K = Omega^{A.nvars}[{A.nvars}] over {A}")
        return sharp(f, taut, window=window, depth=depth).rigid
    if A.monomial_basis is not None and A.regime == "field":
        notes.append(f"f^flat K along the finite {K} -> {A}")
        return flat_shriek(f, taut, window, depth).rigid
    B = polynomial_ring(A.base, A.variables)
    line = sharp(RingMap(K, B, []), taut, window=window, depth=depth).rigid
    notes.append(f"f^sharp K = Omega^{B.nvars}[{B.nvars}] over {B}")
    out = flat_shriek(RingMap(B, A, list(A.gens)), line, window, depth)
    notes.append(f"g^flat onto {A}, normalized along the surjection")
    return out.rigid


def rigid_existence(A: PresentedRing, window: tuple[int, int] = DEFAULT_WINDOW,
                    depth: int = DEFAULT_DEPTH) -> ExistenceResult:
    """A rigid complex over A relative to its base, carried along K -> K[t] -> A."""
    K = polynomial_ring(A.base, [])
    out = ExistenceResult(A, None)
    try:
        out.rigid = _existence_rigid(A, tautological_rigid(K, window), out.notes, window, depth)
    except WindowError as exc:
        out.notes.append(f"window exhausted: {exc}")
        return out
    except (CertificateError, UnsupportedRingError) as exc:
        out.notes.append(str(exc))
        return out
    out.complex = out.rigid.complex
    out.complex.name = f"R({A})"
    out.report = verify_rigid(out.rigid)
    out.end_check = endomorphisms_are_scalars(out.rigid)
    logger.info("rigid complex over %s: %s", A, "ok" if out.ok else "incomplete")
    return out
