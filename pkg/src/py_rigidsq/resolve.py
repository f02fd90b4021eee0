"""Constructive resolutions.

Koszul complexes; semi-free DG algebra resolutions A -> B~ -> B built stage by
stage (degree-0 generators, then odd and even variables killing the kernel and
the negative cohomology); semi-free DG module resolutions built by killing the
cohomology of a mapping cone from the top degree down; lifting of DG algebra
maps between two resolutions; and the comparison of two Sq chain models.

Every construction keeps a generator log; ``trace_lines`` renders it.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Any, Sequence

from sympy.polys.rings import PolyElement

from py_rigidsq.dgalgebra import (
    DGAlgebra, DGAlgebraMap, Element, GradedVariable, augmentation, tensor_algebra_map,
    trivial_algebra,
)
from py_rigidsq.dgcore import Complex, ComplexMap, QuasiIsoCertificate, cone, is_quasi_iso
from py_rigidsq.dgmodule import (
    ChainMap, ComposedMap, DGModule, HomModule, MatrixMap, ModuleMap, PostComposition,
    PreComposition, SemiFreeModule, TruncatedModule, element_vector, lift_chain_map,
    regular_module, tensor_chain_maps, truncated_map, vector_element,
)
from py_rigidsq.errors import CertificateError, DomainError, LiftError, UnsupportedRingError
from py_rigidsq.polyring import PresentedRing, RingMap, Submodule, Vector, fresh_name

if TYPE_CHECKING:
    from py_rigidsq.squaring import SqModel

logger = logging.getLogger(__name__)

DEFAULT_DEPTH = 6


# -- Generator logs --

@dataclass(frozen=True)
class TraceEntry:
    stage: int
    name: str
    degree: int
    differential: str

    def line(self) -> str:
        return f"stage {self.stage}: {self.name} [{self.degree}] d = {self.differential}"


def render_trace(entries: Sequence[TraceEntry]) -> list[str]:
    return [e.line() for e in entries]


# -- Koszul complexes --

@dataclass
class KoszulComplex:
    """K(R, a) = R[a~1..a~n] with odd generators of degree -1 and d(a~i) = ai."""

    ring: PresentedRing
    sequence: tuple[PolyElement, ...]
    algebra: DGAlgebra

    @property
    def length(self) -> int:
        return len(self.sequence)

    def complex(self) -> Complex:
        return regular_module(self.algebra).flatten(-self.length, 0)

    def cohomology(self, i: int):
        return self.complex().cohomology(i)

    def is_acyclic(self) -> bool:
        """H^i = 0 for -n <= i <= -1."""
        C = self.complex()
        return all(C.cohomology(i).is_zero() for i in range(-self.length, 0))

    def quotient(self) -> tuple[PresentedRing, RingMap]:
        """R/(a) with the canonical surjection."""
        R = self.ring
        Q = PresentedRing(R.base, R.variables, list(R.ideal_gens) + list(self.sequence),
                          R.order)
        return Q, RingMap(R, Q, Q.gens)

    def augmentation_check(self) -> QuasiIsoCertificate:
        """Whether K(R, a) -> R/(a) is a quasi-isomorphism."""
        Q, q = self.quotient()
        X = self.complex()
        Y = Complex(Q, {0: 1}, name=str(Q))
        F = ComplexMap(X, Y, q, {0: Q.identity_matrix(1)})
        return is_quasi_iso(F, (-self.length, 0), report=(q, RingMap.identity(Q)))


def koszul(ring: PresentedRing, sequence: Sequence[Any],
           names: Sequence[str] | None = None) -> KoszulComplex:
    seq = tuple(ring.normal_form(a) for a in sequence)
    n = len(seq)
    names = list(names) if names else trivial_algebra(ring).fresh_names("a", n)
    if len(names) != n:
        raise DomainError(f"{len(names)} names for a sequence of length {n}")
    unit = (0,) * n
    alg = DGAlgebra(ring, [GradedVariable(v, -1) for v in names], [{unit: a} for a in seq],
                    name=f"K({ring}; {', '.join(ring.to_str(a) for a in seq)})")
    logger.debug("Koszul algebra on %d odd generators over %s", n, ring)
    return KoszulComplex(ring, seq, alg)


# -- Semi-free algebra resolutions --

@dataclass
class SemifreeResolution:
    """A -> B~ -> B with B~ semi-free over A and B~ -> B a quasi-isomorphism.

    ``algebra.valid_lo`` is the lowest degree in which B~ agrees with the full
    resolution; None means B~ is exact and bounded.
    """

    structure: RingMap
    algebra: DGAlgebra
    base_map: RingMap
    augmentation: RingMap
    depth: int
    finite: bool = False
    trace: list[TraceEntry] = field(default_factory=list)

    @property
    def source(self) -> PresentedRing:
        return self.structure.source

    @property
    def target(self) -> PresentedRing:
        return self.structure.target

    @property
    def exact(self) -> bool:
        return self.algebra.valid_lo is None

    def augmentation_map(self) -> DGAlgebraMap:
        return augmentation(self.algebra, self.augmentation)

    def structure_map(self) -> DGAlgebraMap:
        return DGAlgebraMap(trivial_algebra(self.source), self.algebra, self.base_map, [])

    def window(self) -> tuple[int, int]:
        """Degrees in which H(B~) -> B is certified."""
        if self.algebra.valid_lo is not None:
            return (self.algebra.valid_lo + 1, 0)
        return (sum(v.degree for v in self.algebra.variables), 0)

    def verify(self) -> QuasiIsoCertificate:
        B = self.target
        lo, hi = self.window()
        X = regular_module(self.algebra).flatten(lo - 1, 1)
        Y = Complex(B, {0: 1}, name=str(B))
        F = ComplexMap(X, Y, self.augmentation, {0: B.identity_matrix(1)})
        return is_quasi_iso(F, (lo, hi), report=(self.augmentation, RingMap.identity(B)))

    def trace_lines(self) -> list[str]:
        return render_trace(self.trace)


def new_generators(u: RingMap) -> list[PolyElement]:
    """The variables of B that are not already images of variables of A."""
    B = u.target
    hit = {B.to_str(img) for img in u.images}
    return [B.var(v) for v in B.variables if v not in hit]


def _coefficient_list(p: PolyElement, index: int) -> list[int]:
    deg = max(m[index] for m in p.keys())
    coeffs = [0] * (deg + 1)
    for m, c in p.items():
        coeffs[m[index]] = int(c)
    return coeffs


def _own_certificates(u: RingMap) -> tuple[list[PolyElement], list[list[Any]]]:
    """Generators and monic certificates read off the monic relations of B."""
    B = u.target
    if u.source.nvars:
        raise CertificateError("monic certificates must be supplied over a base with variables")
    gens = new_generators(u)
    rels = B.monic_relations
    monic = []
    for g in gens:
        name = B.to_str(g)
        if name not in rels:
            raise CertificateError(f"no monic relation for {name}; supply a certificate")
        monic.append(_coefficient_list(rels[name], B.variables.index(name)))
    return gens, monic


def _degree_zero(u: RingMap, gens: Sequence[PolyElement],
                 monic: Sequence[Sequence[Any]] | None,
                 ) -> tuple[PresentedRing, RingMap, RingMap, list[TraceEntry]]:
    """B~^0 = A[y1..ym] (modulo the monic certificates), its map from A and to B."""
    A, B = u.source, u.target
    taken = set(A.variables)
    names = []
    for g in gens:
        s = B.to_str(g)
        cand = s if s in B.variables and s not in taken else fresh_name(taken, "y")
        taken.add(cand)
        names.append(cand)
    ideal = [A.to_str(g) for g in A.ideal_gens]
    if monic is not None:
        for name, coeffs in zip(names, monic):
            terms = [f"({A.to_str(A.normal_form(c))})*{name}^{k}" for k, c in enumerate(coeffs)]
            ideal.append(" + ".join(terms))
    R0 = PresentedRing(A.base, list(A.variables) + names, ideal)
    base_map = RingMap(A, R0, [R0.var(v) for v in A.variables])
    v0 = RingMap(R0, B, list(u.images) + list(gens))
    trace = [TraceEntry(0, n, 0, f"0, maps to {B.to_str(g)}") for n, g in zip(names, gens)]
    return R0, base_map, v0, trace


def _check_certificates(u: RingMap, gens: Sequence[PolyElement],
                        monic: Sequence[Sequence[Any]]) -> None:
    A, B = u.source, u.target
    if len(monic) != len(gens):
        raise CertificateError(f"{len(monic)} certificates for {len(gens)} generators")
    for g, coeffs in zip(gens, monic):
        if not coeffs or A.normal_form(coeffs[-1]) != A.one:
            raise CertificateError(f"certificate for {B.to_str(g)} is not monic")
        value = B.zero
        power = B.one
        for c in coeffs:
            value = B.add(value, B.mul(u(c), power))
            power = B.mul(power, g)
        if value:
            raise CertificateError(f"certificate does not annihilate {B.to_str(g)}: "
                                   f"p({B.to_str(g)}) = {B.to_str(value)}")


def _cohomology(alg: DGAlgebra, i: int):
    return regular_module(alg).flatten(i - 1, i + 1).cohomology(i, check=False)


def _adjoin(alg: DGAlgebra, stage: int, cycles: Sequence[Element],
            trace: list[TraceEntry]) -> DGAlgebra:
    names = alg.fresh_names(f"t{stage}_", len(cycles))
    variables = [GradedVariable(n, -stage) for n in names]
    new = alg.adjoin(variables, [alg.pad(z, len(cycles)) for z in cycles])
    for n, z in zip(names, cycles):
        trace.append(TraceEntry(stage, n, -stage, alg.to_str(z)))
    logger.info("stage %d: %d generators of degree %d", stage, len(cycles), -stage)
    return new


def _kill_from(alg: DGAlgebra, first_stage: int, depth: int,
               trace: list[TraceEntry]) -> DGAlgebra:
    """Adjoin variables in degrees -first_stage .. -depth killing H^{<0}."""
    for stage in range(first_stage, depth + 1):
        H = _cohomology(alg, 1 - stage)
        if H.cocycles:
            alg = _adjoin(alg, stage, [vector_element(alg, z, 1 - stage) for z in H.cocycles],
                          trace)
    return alg


def _finish(u: RingMap, alg: DGAlgebra, base_map: RingMap, v0: RingMap, depth: int,
            finite: bool, trace: list[TraceEntry], name: str | None) -> SemifreeResolution:
    R0 = alg.ring
    valid_lo: int | None = -depth
    if all(v.exterior for v in alg.variables):
        bottom = sum(v.degree for v in alg.variables)
        if all(_cohomology(alg, i).is_zero() for i in range(bottom, 1 - depth)):
            valid_lo = None
    if alg.variables:
        alg = DGAlgebra(R0, alg.variables, alg.differentials, name or f"{u.target}~", valid_lo)
    else:
        alg = trivial_algebra(R0)
    logger.info("resolution of %s over %s: %d graded variables, %s", u.target, u.source,
                alg.nvars, "exact" if valid_lo is None else f"complete from degree {valid_lo}")
    return SemifreeResolution(u, alg, base_map, v0, depth, finite, trace)


def _build(u: RingMap, R0: PresentedRing, base_map: RingMap, v0: RingMap, depth: int,
           finite: bool, trace: list[TraceEntry], name: str | None) -> SemifreeResolution:
    if depth < 1:
        raise DomainError("resolutions need depth at least 1")
    alg = DGAlgebra(R0, (), (), name)
    kernel = v0.kernel_generators()
    if kernel:
        alg = _adjoin(alg, 1, [{(): g} for g in kernel], trace)
    alg = _kill_from(alg, 2, depth, trace)
    return _finish(u, alg, base_map, v0, depth, finite, trace, name)


def semifree_algebra_resolution(u: RingMap, depth: int = DEFAULT_DEPTH,
                                generators: Sequence[Any] | None = None,
                                monic: Sequence[Sequence[Any]] | None = None,
                                name: str | None = None) -> SemifreeResolution:
    """A semi-free resolution of u : A -> B complete down to degree -depth.

    Over a field base B~^0 is a polynomial ring A[y] on the chosen generators of
    B; over ZZ the module-finite route is taken, with certificates read from the
    monic relations of B unless supplied.
    """
    B = u.target
    if monic is not None or not B.base.is_field:
        return finite_kprojective_resolution(u, generators, monic, depth, name)
    gens = new_generators(u) if generators is None else [B.normal_form(g) for g in generators]
    R0, base_map, v0, trace = _degree_zero(u, gens, None)
    return _build(u, R0, base_map, v0, depth, False, trace, name)


def finite_kprojective_resolution(u: RingMap, generators: Sequence[Any] | None = None,
                                  monic: Sequence[Sequence[Any]] | None = None,
                                  depth: int = DEFAULT_DEPTH,
                                  name: str | None = None) -> SemifreeResolution:
    """The resolution with B~^0 = A[y1..ym]/(p1(y1), .., pm(ym)) free of finite rank over A.

    ``monic[i]`` lists the coefficients of p_i from the constant term up; the last
    one must be 1 and p_i(generator_i) must vanish in B.
    """
    B = u.target
    if generators is None:
        if monic is not None:
            raise CertificateError("monic certificates need their generators")
        gens, monic = _own_certificates(u)
    else:
        gens = [B.normal_form(g) for g in generators]
        if monic is None:
            raise CertificateError("every generator needs a monic annihilating polynomial")
    _check_certificates(u, gens, monic)
    R0, base_map, v0, trace = _degree_zero(u, gens, monic)
    return _build(u, R0, base_map, v0, depth, True, trace, name)


def redundant_resolution(res: SemifreeResolution, degree: int = -1) -> SemifreeResolution:
    """The same resolution with a contractible pair z, w adjoined: d z = 0, d w = z."""
    if degree > -1:
        raise DomainError("redundant generators need negative degree")
    alg = res.algebra
    z, w = alg.fresh_names("r", 2)
    variables = [GradedVariable(z, degree), GradedVariable(w, degree - 1)]
    n = alg.nvars
    zmono = (0,) * n + (1, 0)
    # w is even, so the algebra is no longer bounded below
    valid_lo = alg.valid_lo if alg.valid_lo is not None else min(degree - 1, -res.depth)
    new = DGAlgebra(alg.ring, list(alg.variables) + variables,
                    [alg.pad(dv, 2) for dv in alg.differentials] + [{}, {zmono: alg.ring.one}],
                    f"{alg.name}+{z}{w}", valid_lo)
    trace = list(res.trace) + [TraceEntry(-degree, z, degree, "0"),
                               TraceEntry(1 - degree, w, degree - 1, z)]
    return SemifreeResolution(res.structure, new, res.base_map, res.augmentation, res.depth,
                              res.finite, trace)


def flat_resolution(u: RingMap) -> SemifreeResolution:
    """B itself, concentrated in degree 0, as a resolution of u (valid when B is flat over A)."""
    B = u.target
    return SemifreeResolution(u, trivial_algebra(B), u, RingMap.identity(B), 0, False,
                              [TraceEntry(0, str(B), 0, "0")])


def extend_resolution(res: SemifreeResolution, u: RingMap, depth: int | None = None,
                      name: str | None = None) -> SemifreeResolution:
    """A resolution of u o structure : A -> C made by adjoining variables to B~.

    u : B -> C must be onto. The degree-0 ring and the base map are kept, so the
    result is semi-free over ``res.algebra`` on the new variables.
    """
    if u.source is not res.target:
        raise DomainError("the map does not start at the resolved ring")
    if not u.is_surjective():
        raise UnsupportedRingError(f"resolutions are only extended along surjections, "
                                   f"not {u.source} -> {u.target}")
    depth = max(depth or res.depth, 1)
    alg = res.algebra
    v = u.compose(res.augmentation)
    trace = list(res.trace)
    boundaries = Submodule(alg.ring, 1, list(regular_module(alg).differential(-1).cols))
    missing = [g for g in v.kernel_generators() if not boundaries.contains((g,))]
    if missing:
        alg = _adjoin(alg, 1, [{alg.unit_mono: g} for g in missing], trace)
    alg = _kill_from(alg, 2, depth, trace)
    structure = u.compose(res.structure)
    if alg is res.algebra and depth <= res.depth:
        logger.info("%s already resolves %s", alg, u.target)
        return SemifreeResolution(structure, alg, res.base_map, v, res.depth, res.finite, trace)
    return _finish(structure, alg, res.base_map, v, depth, res.finite, trace, name)


# -- Semi-free module resolutions --

@dataclass
class ModuleResolution:
    """pi : P -> M with P semi-free; the pieces of P are complete from ``lo`` up."""

    target: DGModule
    module: SemiFreeModule
    augmentation: ChainMap
    lo: int
    trace: list[TraceEntry] = field(default_factory=list)

    def window(self) -> tuple[int, int] | None:
        top = self.target.top
        if top is None:
            return None
        lows = [v for v in (self.lo, self.module.valid_lo, self.target.valid_lo) if v is not None]
        lo = max(lows) + 1
        return (lo, top) if lo <= top else None

    def verify(self, window: tuple[int, int] | None = None) -> QuasiIsoCertificate:
        window = window or self.window()
        if window is None:
            return QuasiIsoCertificate(True, None)
        F = self.augmentation.flatten(window[0] - 1, window[1] + 1)
        return is_quasi_iso(F, window)

    def trace_lines(self) -> list[str]:
        return render_trace(self.trace)


def _cone_window(pi: ChainMap, i: int) -> Complex:
    """The part of cone(pi) needed for its cohomology in degree i."""
    P, M = pi.source, pi.target
    X = P.flatten(i, i + 2)
    Y = M.flatten(i - 1, i + 2)
    F = ComplexMap(X, Y, RingMap.identity(M.ring), {j: pi.matrix(j) for j in range(i, i + 3)})
    return cone(F)


def _uncovered(pi: ChainMap, i: int) -> list[int]:
    """Unit vectors of M^i outside the image of pi, greedily."""
    M = pi.target
    n = M.rank(i)
    if not n:
        return []
    ring = M.ring
    gens = list(pi.matrix(i).cols) + M.relations(i)
    out = []
    for k in range(n):
        e = ring.unit_vector(n, k)
        if not Submodule(ring, n, gens).contains(e):
            out.append(k)
            gens.append(e)
    return out


def semifree_module_resolution(M: DGModule, lo: int, name: str | None = None,
                               surjective: bool = True) -> ModuleResolution:
    """A semi-free P -> M, built from the top degree of M down to ``lo``.

    In each degree i the generators of H^i(cone(pi)) are pairs (p, m); each gets a
    new generator e of degree i with d e = p and pi(e) = m. With ``surjective``
    contractible pairs are added until pi is onto in every degree.
    """
    alg = M.algebra
    ring = alg.ring
    if M.valid_lo is not None and lo < M.valid_lo:
        logger.info("resolution of %s stops at degree %d, the lowest genuine piece", M, M.valid_lo)
        lo = M.valid_lo
    P = SemiFreeModule(alg, [], [], [], complete_lo=lo, name=name or f"{M.name or 'M'}~")
    values: list[Vector] = []
    trace: list[TraceEntry] = []
    top = M.top
    if top is None or top < lo:
        return ModuleResolution(M, P, ChainMap(P, M, []), lo, trace)
    for i in range(top, lo - 1, -1):
        pi = ChainMap(P, M, values)
        H = _cone_window(pi, i).cohomology(i, check=False)
        p_rank = P.rank(i + 1)
        degrees: list[int] = []
        diffs: list[dict] = []
        for z in H.cocycles:
            degrees.append(i)
            diffs.append(P.element(z[:p_rank], i + 1))
            values.append(ring.vnf(z[p_rank:]))
        if surjective:
            missing = _uncovered(ChainMap(P.extend(degrees, diffs, complete_lo=lo), M,
                                          values), i) if degrees else _uncovered(pi, i)
            D = M.differential(i)
            for k in missing:
                # e' in degree i+1 with d e' = 0, then e in degree i with d e = e'
                partner = P.ngens + len(degrees)
                degrees += [i + 1, i]
                diffs += [{}, {(alg.unit_mono, partner): ring.one}]
                values += [D.column(k), ring.unit_vector(M.rank(i), k)]
        if degrees:
            start = P.ngens
            names = [f"e{start + k}" for k in range(len(degrees))]
            P = P.extend(degrees, diffs, names, complete_lo=lo)
            for k, (deg, dv) in enumerate(zip(degrees, diffs)):
                trace.append(TraceEntry(top - i, names[k], deg, P.element_str(P._clean(dv))))
            logger.debug("degree %d: %d new generators for %s", i, len(degrees), M)
    pi = ChainMap(P, M, values)
    logger.info("resolution of %s: %d generators down to degree %d", M, P.ngens, lo)
    return ModuleResolution(M, P, pi, lo, trace)


# -- Lifting DG algebra maps --

def lift_dg_morphism(source: SemifreeResolution, target: SemifreeResolution) -> DGAlgebraMap:
    """w : B~ -> B~' over A with v' o w = v, built variable by variable.

    The degree-0 part sends each generator y to a preimage of v(y) under v'; it
    exists as a ring map when B~^0 is free over A. A graded variable x goes to a
    solution c of d c = w(d x).
    """
    if source.source is not target.source or source.target is not target.target:
        raise DomainError("resolutions of different ring maps")
    if source is target:
        return DGAlgebraMap.identity(source.algebra)
    src, tgt = source.algebra, target.algebra
    nA = source.source.nvars
    images = list(target.base_map.images)
    for k, b in enumerate(source.augmentation.images[nA:]):
        pre = target.augmentation.preimage(b)
        if pre is None:
            raise LiftError(f"generator {src.ring.variables[nA + k]} has no preimage in {tgt.ring}")
        images.append(pre)
    try:
        w0 = RingMap(src.ring, tgt.ring, images)
    except DomainError as exc:
        raise LiftError(f"degree-0 part {src.ring} is not free over {source.source}; "
                        "no lift with these choices") from exc
    reg = regular_module(tgt)
    graded: list[Element] = []
    for k, (v, dv) in enumerate(zip(src.variables, src.differentials)):
        partial = DGAlgebraMap(src, tgt, w0, graded + [{}] * (src.nvars - k))
        rhs = partial(dv)
        if not rhs:
            graded.append({})
            continue
        D = reg.differential(v.degree)
        sol = None
        if D.ncols:
            sol = Submodule(tgt.ring, reg.rank(v.degree + 1), D.cols).lift(
                element_vector(tgt, rhs, v.degree + 1))
        if sol is None:
            raise LiftError(f"no image for {v.name} in degree {v.degree}")
        graded.append(vector_element(tgt, sol[:D.ncols], v.degree))
    w = DGAlgebraMap(src, tgt, w0, graded)
    logger.debug("lifted %s -> %s", src, tgt)
    return w


# -- Comparing two Sq models --

@dataclass
class ResolutionComparison:
    """The zig-zag Hom(P, tT) -> Hom(P, tT') <- Hom(P', tT') between two Sq models."""

    algebra_map: DGAlgebraMap
    module_map: ChainMap
    diagonal_map: ChainMap
    post: QuasiIsoCertificate
    pre: QuasiIsoCertificate

    @property
    def ok(self) -> bool:
        return self.post.ok and self.pre.ok

    def rows(self) -> list[list[str]]:
        """(degree, first model, middle, second model, iso) per degree."""
        out = []
        pre = {d[0]: d for d in self.pre.degrees}
        for i, left, mid, good in self.post.degrees:
            right = pre[i][1] if i in pre else "?"
            ok = good and (pre[i][3] if i in pre else False)
            out.append([str(i), left, mid, right, "yes" if ok else "NO"])
        return out


def identity_along(source: DGModule, target: DGModule, alg_map: DGAlgebraMap) -> ModuleMap:
    ring = target.ring

    def matrices(i: int):
        return ring.identity_matrix(source.rank(i))
    return MatrixMap(source, target, matrices, 0, alg_map)


def compare_resolutions(first: SqModel, second: SqModel) -> ResolutionComparison:
    """Certify that two Sq models of the same (A, B, M) have isomorphic cohomology.

    Raises CertificateError with the failing degrees of both comparisons otherwise.
    """
    if first.structure.source is not second.structure.source \
            or first.structure.target is not second.structure.target:
        raise DomainError("Sq models of different ring maps")
    w = lift_dg_morphism(first.resolution, second.resolution)
    Mt, Mt2 = first.module, second.module
    along = ComposedMap(Mt.augmentation, identity_along(Mt.target, Mt2.target, w))
    gM = lift_chain_map(Mt.module, Mt2.module, Mt2.augmentation, along, w)
    ww = tensor_algebra_map(first.tensor.tensor, second.tensor.tensor, w, w)
    tmap = tensor_chain_maps(gM, gM, first.tensor, second.tensor, ww)
    if isinstance(first.truncated, TruncatedModule):
        tmap = truncated_map(tmap, first.truncated, second.truncated)
    P, P2 = first.diagonal, second.diagonal
    along_p = ComposedMap(P.augmentation, identity_along(P.target, P2.target, ww))
    gP = lift_chain_map(P.module, P2.module, P2.augmentation, along_p, ww)
    middle = HomModule(P.module, second.truncated, ww, name="Hom(P, tT')")
    post = PostComposition(tmap, first.hom, middle)
    pre = PreComposition(gP, second.hom, middle)
    lo, hi = first.window
    cert_post = is_quasi_iso(post.flatten(lo - 1, hi + 1), (lo, hi),
                             report=(first.multiplication, second.multiplication))
    cert_pre = is_quasi_iso(pre.flatten(lo - 1, hi + 1), (lo, hi),
                            report=(second.multiplication, second.multiplication))
    out = ResolutionComparison(w, gM, gP, cert_post, cert_pre)
    if not out.ok:
        failing = {"post": cert_post.failing_degrees(), "pre": cert_pre.failing_degrees()}
        logger.error("Sq models disagree in degrees %s / %s", failing["post"], failing["pre"])
        raise CertificateError(f"Sq models disagree: post-composition fails in degrees "
                               f"{failing['post']}, pre-composition in {failing['pre']}",
                               failing)
    return out
