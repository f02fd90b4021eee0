"""Differential forms, regular sequences and the diagonal of a smooth algebra.

Kaehler differentials of a presented algebra A -> B, their exterior powers,
Ext computed through Koszul complexes of regular sequences, generalized
fractions, the comparison between top forms and Ext over the enveloping
algebra, and the idempotent splitting of an etale diagonal.
"""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field
from functools import cached_property
from typing import Any, Sequence

from sympy.polys.matrices import DomainMatrix
from sympy.polys.rings import PolyElement

from py_rigidsq.dgalgebra import cached_tensor_rings
from py_rigidsq.dgcore import Cohomology, Complex, InducedMap, module_complex, tensor_fp
from py_rigidsq.dgmodule import FlatModule, HomModule, SemiFreeModule
from py_rigidsq.errors import CertificateError, DomainError, UnsupportedRingError
from py_rigidsq.exactlin import ExactMatrix, solve_linear
from py_rigidsq.polyring import (
    FPModule,
    PresentedRing,
    RingMap,
    Submodule,
    TensorRing,
    Vector,
    localize,
    syzygies,
)
from py_rigidsq.resolve import KoszulComplex, koszul, new_generators

logger = logging.getLogger(__name__)

# A differential form: sorted generator indices -> coefficient.
Form = dict[tuple[int, ...], PolyElement]


# -- Forms --

def _merge_sign(S: Sequence[int], T: Sequence[int]) -> int | None:
    """Sign of e_S ^ e_T against e_{S u T}, or None when they overlap."""
    if set(S) & set(T):
        return None
    inversions = sum(1 for i in S for j in T if i > j)
    return -1 if inversions % 2 else 1


def wedge(ring: PresentedRing, first: Form, second: Form) -> Form:
    out: Form = {}
    for S, a in first.items():
        for T, b in second.items():
            sign = _merge_sign(S, T)
            if sign is None:
                continue
            key = tuple(sorted(S + T))
            term = ring.mul(ring.const(sign), ring.mul(a, b))
            out[key] = ring.add(out.get(key, ring.zero), term)
    return {k: v for k, v in out.items() if v}


def wedge_all(ring: PresentedRing, forms: Sequence[Form]) -> Form:
    acc: Form = {(): ring.one}
    for f in forms:
        acc = wedge(ring, acc, f)
    return acc


# -- Kaehler differentials --

@dataclass
class KaehlerModule:
    """Omega_{B/A}: generators dx for the variables of B."""

    structure: RingMap
    module: FPModule

    @property
    def ring(self) -> PresentedRing:
        return self.structure.target

    @property
    def names(self) -> list[str]:
        return [f"d{v}" for v in self.ring.variables]

    def differential(self, f: Any) -> Vector:
        """df as a vector on the generators dx."""
        B = self.ring
        if not isinstance(f, PolyElement):
            f = B.normal_form(f)
        return tuple(B.normal_form(f.diff(x)) for x in B.poly.gens)

    def one_form(self, f: Any) -> Form:
        return {(i,): c for i, c in enumerate(self.differential(f)) if c}

    def rank(self) -> int | None:
        """Free rank after pruning, or None when the pruned module keeps relations."""
        pruned = self.module.prune().module
        if pruned.is_zero():
            return 0
        if not pruned.relations:
            return pruned.ngens
        return None


def kaehler(u: RingMap) -> KaehlerModule:
    B = u.target
    stub = KaehlerModule(u, FPModule(B, B.nvars))
    rels = [stub.differential(g) for g in B.ideal_gens]
    rels += [stub.differential(img) for img in u.images]
    logger.debug("Omega of %s over %s: %d generators, %d relations",
                 B, u.source, B.nvars, len(rels))
    return KaehlerModule(u, FPModule(B, B.nvars, rels))


@dataclass
class ExteriorPower:
    """Lambda^n of a Kaehler module, on the n-subsets of its generators."""

    kaehler: KaehlerModule
    degree: int
    subsets: list[tuple[int, ...]]
    module: FPModule
    index: dict[tuple[int, ...], int] = field(init=False, repr=False)

    def __post_init__(self) -> None:
        self.index = {S: k for k, S in enumerate(self.subsets)}

    @property
    def ring(self) -> PresentedRing:
        return self.kaehler.ring

    def vector(self, form: Form) -> Vector:
        ring = self.ring
        out = list(ring.vzero(len(self.subsets)))
        for S, c in form.items():
            if len(S) != self.degree:
                raise DomainError(f"form of degree {len(S)} in Lambda^{self.degree}")
            out[self.index[S]] = ring.add(out[self.index[S]], c)
        return tuple(out)

    def form(self, v: Sequence[Any]) -> Form:
        return {S: c for S, c in zip(self.subsets, v) if c}

    def generator(self, k: int) -> Form:
        return {self.subsets[k]: self.ring.one}

    def describe(self, k: int) -> str:
        names = self.kaehler.names
        return "^".join(names[i] for i in self.subsets[k]) or "1"


def exterior_power(omega: KaehlerModule, n: int) -> ExteriorPower:
    if n < 0:
        raise DomainError(f"exterior power of negative degree {n}")
    B = omega.ring
    k = omega.module.ngens
    if n > k:
        return ExteriorPower(omega, n, [], FPModule(B, 0))
    subsets = list(itertools.combinations(range(k), n))
    index = {S: j for j, S in enumerate(subsets)}
    rels = []
    if n > 0:
        for r in omega.module.relations:
            for T in itertools.combinations(range(k), n - 1):
                v = list(B.vzero(len(subsets)))
                for i, c in enumerate(r):
                    sign = _merge_sign((i,), T)
                    if not c or sign is None:
                        continue
                    j = index[tuple(sorted((i,) + T))]
                    v[j] = B.add(v[j], B.mul(B.const(sign), c))
                rels.append(v)
    return ExteriorPower(omega, n, subsets, FPModule(B, len(subsets), rels))


def omega_power(u: RingMap, n: int) -> FPModule:
    """Omega^n_{B/A} as a finitely presented B-module."""
    return exterior_power(kaehler(u), n).module


# -- Regular sequences and Ext --

def is_regular_sequence(R: PresentedRing, sequence: Sequence[Any]) -> bool:
    """Koszul-regular: K(R, a) has no cohomology below degree 0."""
    if not sequence:
        return True
    return koszul(R, sequence).is_acyclic()


@dataclass
class KoszulDual:
    """Hom_R(K(R, a), M): its H^p is Ext^p_R(R/(a), M) for a regular sequence a."""

    koszul: KoszulComplex
    target: FPModule
    hom: HomModule

    @property
    def ring(self) -> PresentedRing:
        return self.koszul.ring

    @property
    def length(self) -> int:
        return self.koszul.length

    @cached_property
    def complex(self) -> Complex:
        return self.hom.flatten(0, self.length)

    def ext(self, p: int) -> Cohomology:
        return self.complex.cohomology(p)

    def top_cochain(self, numerator: Sequence[Any]) -> Vector:
        """The degree-n cochain sending the top Koszul generator to ``numerator``."""
        if len(numerator) != self.target.ngens:
            raise DomainError(f"numerator of length {len(numerator)} for "
                              f"{self.target.ngens} generators")
        return self.ring.vnf(numerator)


def koszul_dual(R: PresentedRing, sequence: Sequence[Any], M: FPModule) -> KoszulDual:
    K = koszul(R, sequence)
    P = SemiFreeModule.from_complex(K.complex(), name="K")
    return KoszulDual(K, M, HomModule(P, FlatModule(module_complex(M), name="M")))


def ext_via_koszul(R: PresentedRing, sequence: Sequence[Any], M: FPModule, p: int) -> FPModule:
    """Ext^p_R(R/(a), M) from the Koszul complex of a regular sequence a."""
    if not is_regular_sequence(R, sequence):
        raise CertificateError("sequence is not regular; Koszul does not compute Ext")
    if p < 0 or p > len(sequence):
        return FPModule(R, 0)
    return koszul_dual(R, sequence, M).ext(p).module


# -- Generalized fractions --

@dataclass(frozen=True)
class GeneralizedFraction:
    """The class |mu / a1..an| in Ext^n_R(R/(a), M)."""

    ring: PresentedRing
    numerator: Vector
    sequence: tuple[PolyElement, ...]

    @property
    def degree(self) -> int:
        return len(self.sequence)

    def dual(self, M: FPModule) -> KoszulDual:
        return koszul_dual(self.ring, self.sequence, M)

    def coordinates(self, dual: KoszulDual) -> list[PolyElement]:
        H = dual.ext(self.degree)
        coords = H.coordinates(dual.top_cochain(self.numerator))
        if coords is None:
            raise DomainError("top cochain is not a cocycle")
        return coords

    def is_zero(self, dual: KoszulDual) -> bool:
        H = dual.ext(self.degree)
        return H.module.is_zero_element(self.coordinates(dual))

    def describe(self) -> str:
        R = self.ring
        num = ", ".join(R.to_str(c) for c in self.numerator)
        den = ", ".join(R.to_str(a) for a in self.sequence)
        return f"|({num}) / {den}|"


def matrix_determinant(R: PresentedRing, rows: Sequence[Sequence[Any]]) -> PolyElement:
    n = len(rows)
    if n == 0:
        return R.one
    entries = [[R.normal_form(x) for x in row] for row in rows]
    if any(len(row) != n for row in entries):
        raise DomainError("determinant of a non-square matrix")
    dm = DomainMatrix(entries, (n, n), R.poly.to_domain())
    return R.normal_form(dm.det())


def fraction_change_of_sequence(fraction: GeneralizedFraction,
                                rows: Sequence[Sequence[Any]]) -> GeneralizedFraction:
    """Rewrite |mu/a| over a' = g a as |det(g) mu / a'|, the same class."""
    R = fraction.ring
    n = fraction.degree
    g = [[R.normal_form(x) for x in row] for row in rows]
    if len(g) != n or any(len(row) != n for row in g):
        raise DomainError(f"change of sequence needs a {n}x{n} matrix")
    det = matrix_determinant(R, g)
    if R.inverse(det) is None:
        raise DomainError(f"det = {R.to_str(det)} is not a unit; sequences differ")
    new_seq = tuple(
        R.normal_form(sum((g[i][j] * fraction.sequence[j] for j in range(n)), R.zero))
        for i in range(n))
    return GeneralizedFraction(R, R.vscale(det, fraction.numerator), new_seq)


# -- Top forms and Ext over the enveloping algebra --

@dataclass(frozen=True)
class Chart:
    """A localizing element s of B and a sequence in (B_s)^e cutting out the diagonal."""

    element: Any = 1
    sequence: tuple[Any, ...] = ()


@dataclass
class FundamentalIso:
    """Omega^n_{B/A} -> Ext^n_{B^e}(B, Omega^{2n}_{B^e/A}) tensored down to B."""

    structure: RingMap
    chart: Chart
    ring: PresentedRing
    localization: RingMap
    rings: TensorRing
    sequence: tuple[PolyElement, ...]
    forms: ExteriorPower
    top: ExteriorPower
    dual: KoszulDual
    diagonal: RingMap
    fractions: list[GeneralizedFraction]
    map: InducedMap

    @property
    def degree(self) -> int:
        return len(self.sequence)

    def is_iso(self) -> bool:
        return self.map.is_iso()

    def vanishing_degrees(self) -> dict[int, bool]:
        """Whether Ext^p vanishes for each p != n in [0, n]."""
        return {p: self.dual.ext(p).is_zero() for p in range(self.degree)}

    def pulls_back(self) -> bool:
        """Restricting p2*(beta) to the diagonal gives back beta for every basis form."""
        nb = self.ring.nvars
        for k in range(len(self.forms.subsets)):
            S = self.forms.subsets[k]
            lifted = {tuple(nb + i for i in S): self.rings.ring.one}
            back = restrict_to_diagonal(self.ring, self.diagonal, lifted)
            if back != self.forms.generator(k):
                return False
        return True

    def rows(self) -> list[list[str]]:
        out = []
        for k, fr in enumerate(self.fractions):
            out.append([self.forms.describe(k), fr.describe(),
                        ", ".join(self.ring.to_str(c) for c in self.map.columns[k])])
        return out


def restrict_to_diagonal(B: PresentedRing, diagonal: RingMap, form: Form) -> Form:
    """Delta* of a form on B^e whose generators are the two copies of B's variables."""
    nb = B.nvars
    out: Form = {}
    for S, c in form.items():
        acc: Form = {(): B.one}
        for i in S:
            acc = wedge(B, acc, {(i % nb,): B.one})
        for T, a in acc.items():
            out[T] = B.add(out.get(T, B.zero), B.mul(a, diagonal(c)))
    return {k: v for k, v in out.items() if v}


def _diagonal_map(rings: TensorRing, B: PresentedRing) -> RingMap:
    E = rings.ring
    return RingMap(E, B, list(B.gens) + list(B.gens))


def _default_chart(u: RingMap, rings: TensorRing) -> tuple[PolyElement, ...]:
    B = u.target
    if B.ideal_gens:
        raise CertificateError(f"{B} has relations; give the diagonal chart explicitly")
    E = rings.ring
    out = []
    for x in new_generators(u):
        out.append(E.sub(rings.first(x), rings.second(x)))
    return tuple(out)


def _check_chart(rings: TensorRing, B: PresentedRing, sequence: Sequence[PolyElement]) -> None:
    E = rings.ring
    diag = _diagonal_map(rings, B)
    for b in sequence:
        if diag(b):
            raise CertificateError(f"{E.to_str(b)} does not vanish on the diagonal")
    ideal = Submodule(E, 1, [(b,) for b in sequence])
    for x in B.gens:
        g = E.sub(rings.first(x), rings.second(x))
        if not ideal.contains((g,)):
            raise CertificateError(f"{E.to_str(g)} is not in the ideal of the chart")
    if not is_regular_sequence(E, sequence):
        raise CertificateError("chart sequence is not regular")


def fundamental_iso(u: RingMap, chart: Chart | None = None) -> FundamentalIso:
    """Send beta to |db_1 ^ ... ^ db_n ^ p2*(beta) / b| and test bijectivity on the diagonal."""
    chart = chart or Chart()
    B0 = u.target
    s = B0.normal_form(chart.element)
    if B0.is_constant_unit(s):
        B, canon = B0, RingMap.identity(B0)
    else:
        B, canon = localize(B0, s)
    v = canon.compose(u)
    rings = cached_tensor_rings(B, B, u.source, v, v)
    E = rings.ring
    if chart.sequence:
        seq = tuple(E.normal_form(b) for b in chart.sequence)
    else:
        seq = _default_chart(v, rings)
    _check_chart(rings, B, seq)
    n = len(seq)
    diag = _diagonal_map(rings, B)
    forms = exterior_power(kaehler(v), n)
    omega_e = kaehler(rings.first.compose(v))
    top = exterior_power(omega_e, 2 * n)
    dual = koszul_dual(E, seq, top.module)
    H = dual.ext(n)
    db = [omega_e.one_form(b) for b in seq]
    fractions = []
    columns = []
    for S in forms.subsets:
        p2 = [omega_e.one_form(rings.second(B.gens[i])) for i in S]
        mu = top.vector(wedge_all(E, db + p2))
        fr = GeneralizedFraction(E, mu, seq)
        fractions.append(fr)
        columns.append(diag.on_vector(fr.coordinates(dual)))
    target = H.module.base_change(diag)
    logger.info("fundamental map in degree %d: %d forms into %d Ext generators",
                n, len(columns), target.ngens)
    induced = InducedMap(n, forms.module, target, columns)
    return FundamentalIso(u, chart, B, canon, rings, seq, forms, top, dual, diag,
                          fractions, induced)


def chart_independence(iso: FundamentalIso, rows: Sequence[Sequence[Any]]) -> bool:
    """Recompute with the chart g b and compare classes over b after the change of sequence."""
    E = iso.rings.ring
    g = [[E.normal_form(x) for x in row] for row in rows]
    n = iso.degree
    new_seq = tuple(E.normal_form(sum((g[i][j] * iso.sequence[j] for j in range(n)), E.zero))
                    for i in range(n))
    other = fundamental_iso(iso.structure, Chart(iso.chart.element, new_seq))
    det = matrix_determinant(E, g)
    inv = E.inverse(det)
    if inv is None:
        raise DomainError(f"det = {E.to_str(det)} is not a unit")
    H = iso.dual.ext(n)
    for first, second in zip(iso.fractions, other.fractions):
        back = GeneralizedFraction(E, E.vscale(inv, second.numerator), iso.sequence)
        diff = E.vsub(first.coordinates(iso.dual), back.coordinates(iso.dual))
        if not H.module.is_zero_element(diff):
            return False
    return True


# -- Diagonal comparisons --

@dataclass
class DiagonalSquare:
    """Omega^n (x) Omega^n -> Delta* Omega^{2n}_{B^e} by beta (x) gamma -> p1*beta ^ p2*gamma."""

    forms: ExteriorPower
    top: ExteriorPower
    map: InducedMap

    def is_iso(self) -> bool:
        return self.map.is_iso()


def diagonal_square_check(u: RingMap, n: int | None = None) -> DiagonalSquare:
    B = u.target
    omega = kaehler(u)
    if n is None:
        n = omega.rank()
        if n is None:
            raise CertificateError("Omega is not free of constant rank; give the degree")
    rings = cached_tensor_rings(B, B, u.source, u, u)
    E = rings.ring
    diag = _diagonal_map(rings, B)
    forms = exterior_power(omega, n)
    omega_e = kaehler(rings.first.compose(u))
    top = exterior_power(omega_e, 2 * n)
    columns = []
    for S in forms.subsets:
        left = [omega_e.one_form(rings.first(B.gens[i])) for i in S]
        for T in forms.subsets:
            right = [omega_e.one_form(rings.second(B.gens[i])) for i in T]
            columns.append(diag.on_vector(top.vector(wedge_all(E, left + right))))
    source = tensor_fp(forms.module, forms.module)
    return DiagonalSquare(forms, top, InducedMap(2 * n, source, top.module.base_change(diag),
                                                 columns))


def conormal_iso(u: RingMap) -> InducedMap:
    """Omega^1_{B/A} -> J/J^2 sending dx to the class of x (x) 1 - 1 (x) x."""
    B = u.target
    rings = cached_tensor_rings(B, B, u.source, u, u)
    E = rings.ring
    diag = _diagonal_map(rings, B)
    gens = [E.sub(rings.first(x), rings.second(x)) for x in B.gens]
    rels = [diag.on_vector(s) for s in syzygies(E, [(g,) for g in gens])]
    conormal = FPModule(B, len(gens), rels)
    omega = kaehler(u)
    columns = [B.unit_vector(B.nvars, k) for k in range(B.nvars)]
    return InducedMap(1, omega.module, conormal, columns)


def omega_composition(f: RingMap, g: RingMap) -> InducedMap:
    """Omega^m_{B/A} (x) Omega^n_{C/B} -> Omega^{m+n}_{C/A} by beta (x) gamma -> f*beta ^ gamma."""
    B, C = f.target, g.target
    if g.source is not B:
        raise DomainError("ring maps do not compose")
    omega_b, omega_cb = kaehler(f), kaehler(g)
    m, n = omega_b.rank(), omega_cb.rank()
    if m is None or n is None:
        raise CertificateError("differentials are not free of constant rank")
    omega_c = kaehler(g.compose(f))
    lam_b = exterior_power(omega_b, m)
    lam_cb = exterior_power(omega_cb, n)
    lam_c = exterior_power(omega_c, m + n)
    columns = []
    for S in lam_b.subsets:
        pulled = wedge_all(C, [omega_c.one_form(g(B.gens[i])) for i in S])
        for T in lam_cb.subsets:
            columns.append(lam_c.vector(wedge(C, pulled, {T: C.one})))
    source = tensor_fp(lam_b.module.base_change(g), lam_cb.module)
    return InducedMap(m + n, source, lam_c.module, columns)


@dataclass
class LocalizedDiagonal:
    """B^e[s^-1] -> B; an isomorphism exactly when the diagonal is open there."""

    structure: RingMap
    element: PolyElement
    ring: PresentedRing
    diagonal: RingMap
    is_iso: bool
    dimension: int | None
    tensor_dimension: int | None


def localized_diagonal(u: RingMap, s: Any) -> LocalizedDiagonal:
    B = u.target
    rings = cached_tensor_rings(B, B, u.source, u, u)
    E = rings.ring
    s = E.normal_form(s)
    diag = _diagonal_map(rings, B)
    inv = B.inverse(diag(s))
    if inv is None:
        raise DomainError(f"{E.to_str(s)} does not become a unit on the diagonal")
    loc, _ = localize(E, s)
    to_b = RingMap(loc, B, list(diag.images) + [inv])
    iso = to_b.is_surjective() and not to_b.kernel_generators()
    return LocalizedDiagonal(u, s, loc, to_b, iso, loc.dimension(), E.dimension())


# -- Etale splitting --

@dataclass
class EtaleDecomposition:
    """B^e = B x B' through an idempotent e with J e = 0 and Delta*(e) = 1."""

    structure: RingMap
    rings: TensorRing
    idempotent: PolyElement
    diagonal: RingMap
    complement: PresentedRing
    quotient: RingMap
    annihilator_dimension: int

    @property
    def ring(self) -> PresentedRing:
        return self.rings.ring

    def split(self, z: Any) -> tuple[PolyElement, PolyElement]:
        z = self.ring.normal_form(z)
        return self.diagonal(z), self.quotient(z)

    def combine(self, b: Any, other: Any) -> PolyElement:
        """e p1*(b) + (1 - e) c for any lift c of the second component."""
        E = self.ring
        e = self.idempotent
        left = E.mul(e, self.rings.first(b))
        right = E.mul(E.sub(E.one, e), E.normal_form(self.complement.normal_form(other)))
        return E.add(left, right)

    def round_trip(self, z: Any) -> bool:
        return self.combine(*self.split(z)) == self.ring.normal_form(z)

    def checks(self) -> dict[str, bool]:
        E = self.ring
        e = self.idempotent
        B = self.structure.target
        gens = [E.sub(self.rings.first(x), self.rings.second(x)) for x in B.gens]
        span = E.multiplication_matrix(e).rank()
        return {
            "idempotent": E.mul(e, e) == e,
            "kills diagonal ideal": all(not E.mul(e, g) for g in gens),
            "augmentation": self.diagonal(e) == B.one,
            "annihilator is eB^e": span == self.annihilator_dimension == B.dimension(),
        }


def etale_decomposition(u: RingMap) -> EtaleDecomposition:
    B = u.target
    if not kaehler(u).module.is_zero():
        raise CertificateError("Omega does not vanish; the map is not unramified")
    rings = cached_tensor_rings(B, B, u.source, u, u)
    E = rings.ring
    if E.regime != "field" or E.monomial_basis is None:
        raise UnsupportedRingError(f"{E} is not finite over a field")
    diag = _diagonal_map(rings, B)
    N = len(E.monomial_basis)
    dom = E.base.domain
    ann_rows: list[list[Any]] = []
    for x in B.gens:
        g = E.sub(rings.first(x), rings.second(x))
        ann_rows.extend(list(r) for r in E.multiplication_matrix(g).entries)
    basis = [E.from_coordinates([dom.one if k == j else dom.zero for k in range(N)])
             for j in range(N)]
    images = [B.coordinates(diag(b)) for b in basis]
    dim_b = len(images[0]) if images else 0
    rows = ann_rows + [[images[j][i] for j in range(N)] for i in range(dim_b)]
    rhs = [dom.zero] * len(ann_rows) + B.coordinates(B.one)
    sol = solve_linear(ExactMatrix.from_rows(E.base, rows, N), rhs)
    if sol is None:
        raise CertificateError("no idempotent separates the diagonal; the map is not etale")
    e = E.from_coordinates(sol)
    if E.mul(e, e) != e:
        raise CertificateError("the diagonal idempotent is not idempotent")
    ann = N - (ExactMatrix.from_rows(E.base, ann_rows, N).rank() if ann_rows else 0)
    complement = PresentedRing(E.base, E.variables, list(E.ideal_gens) + [e], E.order)
    quotient = RingMap(E, complement, complement.gens)
    logger.info("etale idempotent %s", E.to_str(e))
    return EtaleDecomposition(u, rings, e, diag, complement, quotient, ann)
