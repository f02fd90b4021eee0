"""Flattened complexes of finitely presented modules and the maps between them.

A ``Complex`` is a bounded sequence of pieces R^n_i / N_i over one presented ring
with differentials D_i : piece i -> piece i+1 (cohomological indexing). Each
complex records the window [valid_lo, valid_hi] of pieces that are known to be
complete; H^i is only reported when pieces i-1, i and i+1 all lie in it.

Everything derived (Sq models, Hom complexes, Koszul complexes) is flattened to
this form before cohomology or quasi-isomorphism questions are asked.
"""

from __future__ import annotations

import logging
import math
import weakref
from dataclasses import dataclass, field
from functools import cached_property
from typing import Any, Iterable, Mapping, Sequence

from sympy.polys.rings import PolyElement

from py_rigidsq.errors import DomainError, UndeterminedError, UnsupportedRingError
from py_rigidsq.polyring import (
    FPModule, Matrix, ModuleInvariants, PresentedRing, RingMap, Submodule, TensorRing, Vector,
)
from py_rigidsq.utils import memo_on

logger = logging.getLogger(__name__)


def _within(i: int, lo: int | None, hi: int | None) -> bool:
    return (lo is None or i >= lo) and (hi is None or i <= hi)


# -- Cohomology --

@dataclass
class Cohomology:
    """H^i as an FP module whose generators are the listed cocycles."""

    complex: "Complex"
    degree: int
    cocycles: list[Vector]
    module: FPModule

    @cached_property
    def _span(self) -> Submodule:
        C = self.complex
        gens = list(self.cocycles) + C.boundary_generators(self.degree)
        return Submodule(C.ring, C.rank(self.degree), gens)

    def coordinates(self, z: Sequence[Any]) -> list[PolyElement] | None:
        """Coefficients of a cocycle on the generators, modulo boundaries and relations."""
        coeffs = self._span.lift(z)
        return None if coeffs is None else coeffs[:len(self.cocycles)]

    def is_zero(self) -> bool:
        return self.module.is_zero()

    def invariants(self) -> ModuleInvariants:
        return self.module.invariants()

    def describe(self) -> str:
        return self.invariants().describe()


# -- Complexes --

class Complex:
    """A bounded complex of finitely presented modules over ``ring``."""

    def __init__(self, ring: PresentedRing, ranks: Mapping[int, int],
                 differentials: Mapping[int, Matrix] | None = None,
                 relations: Mapping[int, Iterable[Sequence[Any]]] | None = None,
                 valid_lo: int | None = None, valid_hi: int | None = None,
                 name: str | None = None) -> None:
        self.ring = ring
        self.ranks = {i: n for i, n in ranks.items() if n}
        self.diffs: dict[int, Matrix] = {}
        for i, D in (differentials or {}).items():
            if D.ncols != self.rank(i) or D.nrows != self.rank(i + 1):
                raise DomainError(f"differential {i}: {D.nrows}x{D.ncols} does not fit "
                                  f"ranks {self.rank(i)} -> {self.rank(i + 1)}")
            if D.ncols and D.nrows:
                self.diffs[i] = D
        self.rels: dict[int, list[Vector]] = {}
        for i, rs in (relations or {}).items():
            kept = [ring.vnf(r) for r in rs]
            kept = [r for r in kept if any(r)]
            if kept and self.rank(i):
                self.rels[i] = kept
        self.valid_lo = valid_lo
        self.valid_hi = valid_hi
        self.name = name
        self._cohomology: dict[int, Cohomology] = {}

    # -- Pieces --

    def rank(self, i: int) -> int:
        return self.ranks.get(i, 0)

    def relations(self, i: int) -> list[Vector]:
        return self.rels.get(i, [])

    def differential(self, i: int) -> Matrix:
        D = self.diffs.get(i)
        if D is None:
            return self.ring.zero_matrix(self.rank(i + 1), self.rank(i))
        return D

    def piece(self, i: int) -> FPModule:
        return FPModule(self.ring, self.rank(i), self.relations(i))

    @property
    def support(self) -> tuple[int, int] | None:
        """Lowest and highest degree with a nonzero rank."""
        if not self.ranks:
            return None
        return min(self.ranks), max(self.ranks)

    def is_free(self) -> bool:
        return not self.rels

    def is_genuine(self, i: int) -> bool:
        return _within(i, self.valid_lo, self.valid_hi)

    def is_determined(self, i: int) -> bool:
        return self.is_genuine(i - 1) and self.is_genuine(i) and self.is_genuine(i + 1)

    def determined_window(self) -> tuple[int, int] | None:
        """The degrees whose cohomology can be decided and may be nonzero."""
        sup = self.support
        if sup is None:
            return None
        lo, hi = sup
        if self.valid_lo is not None:
            lo = max(lo, self.valid_lo + 1)
        if self.valid_hi is not None:
            hi = min(hi, self.valid_hi - 1)
        return (lo, hi) if lo <= hi else None

    # -- Checks --

    def square_zero_failures(self) -> list[int]:
        """Degrees i with D_{i+1} D_i not landing in the relations of piece i+2."""
        out = []
        for i in sorted(self.diffs):
            if i + 1 not in self.diffs:
                continue
            DD = self.ring.compose(self.diffs[i + 1], self.diffs[i])
            target = self.piece(i + 2)
            if any(not target.is_zero_element(c) for c in DD.cols):
                out.append(i)
        return out

    def well_defined_failures(self) -> list[int]:
        """Degrees whose differential does not respect the relations."""
        out = []
        for i, D in sorted(self.diffs.items()):
            target = self.piece(i + 1)
            if any(not target.is_zero_element(self.ring.apply(D, r)) for r in self.relations(i)):
                out.append(i)
        return out

    # -- Cycles and cohomology --

    def boundary_generators(self, i: int) -> list[Vector]:
        return list(self.differential(i - 1).cols) + self.relations(i)

    def cycles(self, i: int) -> list[Vector]:
        """Generators of {z in R^n_i : D_i z lies in N_{i+1}}."""
        n = self.rank(i)
        if n == 0:
            return []
        ring = self.ring
        m = self.rank(i + 1)
        D = self.differential(i)
        if m == 0 or D.is_zero():
            return [ring.unit_vector(n, k) for k in range(n)]
        gens = list(D.cols) + self.relations(i + 1)
        out = []
        for s in Submodule(ring, m, gens).syzygies():
            z = ring.vnf(s[:n])
            if any(z):
                out.append(z)
        return out

    def cohomology(self, i: int, check: bool = True) -> Cohomology:
        if check and not self.is_determined(i):
            logger.info("H^%d of %s is undetermined in window [%s, %s]",
                        i, self.name or "complex", self.valid_lo, self.valid_hi)
            raise UndeterminedError(f"H^{i} is undetermined", degree=i,
                                    window=(self.valid_lo, self.valid_hi))
        if i in self._cohomology:
            return self._cohomology[i]
        ring = self.ring
        n = self.rank(i)
        kept: list[Vector] = []
        if n:
            base = self.boundary_generators(i)
            for z in self.cycles(i):
                if not Submodule(ring, n, base + kept).contains(z):
                    kept.append(z)
        rels: list[Vector] = []
        if kept:
            gens = kept + self.boundary_generators(i)
            for s in Submodule(ring, n, gens).syzygies():
                r = ring.vnf(s[:len(kept)])
                if any(r):
                    rels.append(r)
        H = Cohomology(self, i, kept, FPModule(ring, len(kept), rels))
        self._cohomology[i] = H
        logger.debug("H^%d: %d generators, %d relations", i, len(kept), len(rels))
        return H

    def cohomology_range(self, lo: int, hi: int) -> dict[int, Cohomology | None]:
        """H^i for lo <= i <= hi; undetermined degrees map to None."""
        out: dict[int, Cohomology | None] = {}
        for i in range(lo, hi + 1):
            out[i] = self.cohomology(i) if self.is_determined(i) else None
        return out

    # -- Constructions --

    def shift(self, n: int) -> Complex:
        """X[n] with (X[n])^i = X^{i+n} and differential (-1)^n D."""
        sign = self.ring.const(-1 if n % 2 else 1)
        return Complex(self.ring, {i - n: r for i, r in self.ranks.items()},
                       {i - n: self.ring.mscale(sign, D) for i, D in self.diffs.items()},
                       {i - n: rs for i, rs in self.rels.items()},
                       None if self.valid_lo is None else self.valid_lo - n,
                       None if self.valid_hi is None else self.valid_hi - n)

    def base_change(self, phi: RingMap) -> Complex:
        """S (x)_R X degreewise along phi : R -> S."""
        if phi.source is not self.ring:
            raise DomainError("base change along a map that does not start at the ring")
        return Complex(phi.target, self.ranks,
                       {i: phi.on_matrix(D) for i, D in self.diffs.items()},
                       {i: [phi.on_vector(r) for r in rs] for i, rs in self.rels.items()},
                       self.valid_lo, self.valid_hi)

    def restrict_scalars(self, phi: RingMap) -> Complex:
        """This complex viewed over phi.source (phi finite or surjective)."""
        if phi.target is not self.ring:
            raise DomainError("restriction along a map that does not end at the ring")
        return restrict_complex(self, phi)

    def restrict(self, lo: int | None, hi: int | None) -> Complex:
        """Keep pieces in [lo, hi] (brutal truncation on both sides)."""
        keep = {i: r for i, r in self.ranks.items() if _within(i, lo, hi)}
        return Complex(self.ring, keep,
                       {i: D for i, D in self.diffs.items() if i in keep and i + 1 in keep},
                       {i: rs for i, rs in self.rels.items() if i in keep},
                       self.valid_lo, self.valid_hi, self.name)

    def identity(self) -> ComplexMap:
        sup = self.support
        mats = {} if sup is None else {
            i: self.ring.identity_matrix(self.rank(i)) for i in range(sup[0], sup[1] + 1)}
        return ComplexMap(self, self, RingMap.identity(self.ring), mats)

    def zero_map(self, target: Complex, degree: int = 0) -> ComplexMap:
        return ComplexMap(self, target, RingMap.identity(self.ring), {}, degree)

    def describe(self) -> list[str]:
        sup = self.support
        if sup is None:
            return ["0"]
        out = []
        for i in range(sup[0], sup[1] + 1):
            out.append(f"{i}: {self.ring}^{self.rank(i)} / {len(self.relations(i))} relations")
        return out

    def __repr__(self) -> str:
        return f"Complex({self.ring}, ranks={dict(sorted(self.ranks.items()))})"


def complex_from_matrices(ring: PresentedRing, top: int, matrices: Sequence[Matrix],
                          relations: Mapping[int, Iterable[Sequence[Any]]] | None = None) -> Complex:
    """A complex whose last piece sits in degree ``top``; ``matrices`` go left to right."""
    lo = top - len(matrices)
    ranks: dict[int, int] = {}
    diffs = {}
    for k, D in enumerate(matrices):
        ranks[lo + k] = D.ncols
        ranks[lo + k + 1] = D.nrows
        diffs[lo + k] = D
    return Complex(ring, ranks, diffs, relations)


def module_complex(M: FPModule, degree: int = 0) -> Complex:
    """A single finitely presented module placed in one degree."""
    return Complex(M.ring, {degree: M.ngens}, {}, {degree: M.relations})


# -- Maps of complexes --

class ComplexMap:
    """Degreewise matrices X^i -> Y^{i+degree}, semilinear along ``ring_map``."""

    def __init__(self, source: Complex, target: Complex, ring_map: RingMap,
                 matrices: Mapping[int, Matrix], degree: int = 0) -> None:
        if ring_map.source is not source.ring or ring_map.target is not target.ring:
            raise DomainError("ring map does not match the complexes")
        self.source = source
        self.target = target
        self.ring_map = ring_map
        self.degree = degree
        self.mats: dict[int, Matrix] = {}
        for i, F in matrices.items():
            if F.ncols != source.rank(i) or F.nrows != target.rank(i + degree):
                raise DomainError(f"map in degree {i} has shape {F.nrows}x{F.ncols}")
            if F.ncols and F.nrows:
                self.mats[i] = F

    def matrix(self, i: int) -> Matrix:
        F = self.mats.get(i)
        if F is None:
            return self.target.ring.zero_matrix(self.target.rank(i + self.degree),
                                                self.source.rank(i))
        return F

    def apply(self, i: int, v: Sequence[Any]) -> Vector:
        return self.target.ring.apply(self.matrix(i), self.ring_map.on_vector(v))

    def compose(self, first: ComplexMap) -> ComplexMap:
        """self after first."""
        if first.target is not self.source:
            raise DomainError("complex maps do not compose")
        ring = self.target.ring
        mats = {}
        for i in first.mats:
            F1 = first.matrix(i)
            F2 = self.matrix(i + first.degree)
            mats[i] = ring.compose(F2, self.ring_map.on_matrix(F1))
        return ComplexMap(first.source, self.target, self.ring_map.compose(first.ring_map),
                          mats, self.degree + first.degree)

    def scale(self, c: Any) -> ComplexMap:
        ring = self.target.ring
        return ComplexMap(self.source, self.target, self.ring_map,
                          {i: ring.mscale(ring(c), F) for i, F in self.mats.items()}, self.degree)

    def combine(self, other: ComplexMap, sign: int = 1) -> ComplexMap:
        """self + sign * other for parallel maps."""
        ring = self.target.ring
        mats = {}
        for i in set(self.mats) | set(other.mats):
            B = other.matrix(i)
            mats[i] = ring.madd(self.matrix(i), B if sign > 0 else ring.mscale(ring(-1), B))
        return ComplexMap(self.source, self.target, self.ring_map, mats, self.degree)

    def chain_failures(self) -> list[int]:
        """Degrees where D F != (-1)^deg F D modulo the target relations."""
        ring = self.target.ring
        sign = -1 if self.degree % 2 else 1
        out = []
        sup = self.source.support
        if sup is None:
            return out
        for i in range(sup[0] - 1, sup[1] + 1):
            n = self.source.rank(i)
            if not n:
                continue
            target = self.target.piece(i + self.degree + 1)
            for k in range(n):
                e = self.source.ring.unit_vector(n, k)
                lhs = ring.apply(self.target.differential(i + self.degree), self.apply(i, e))
                rhs = self.apply(i + 1, self.source.ring.apply(self.source.differential(i), e))
                diff = ring.vsub(lhs, ring.vscale(ring.const(sign), rhs))
                if not target.is_zero_element(diff):
                    out.append(i)
                    break
        return out

    def is_zero(self) -> bool:
        """Every column of every degree vanishes modulo the target relations."""
        for i, F in self.mats.items():
            target = self.target.piece(i + self.degree)
            if any(not target.is_zero_element(c) for c in F.cols):
                return False
        return True


# -- Induced maps and quasi-isomorphisms --

@dataclass
class InducedMap:
    """H^i(F) : H^i(X) -> H^{i+deg}(Y) written over a common report ring."""

    degree: int
    source: FPModule
    target: FPModule
    columns: list[Vector]

    def is_surjective(self) -> bool:
        gens = self.columns + self.target.relations
        if self.target.ngens == 0:
            return True
        return Submodule(self.target.ring, self.target.ngens, gens).is_everything()

    def is_injective(self) -> bool:
        ring = self.source.ring
        a = self.source.ngens
        if a == 0:
            return True
        if self.target.ngens == 0:
            return self.source.is_zero()
        gens = self.columns + self.target.relations
        for s in Submodule(ring, self.target.ngens, gens).syzygies():
            if not self.source.is_zero_element(s[:a]):
                return False
        return True

    def is_iso(self) -> bool:
        return self.is_surjective() and self.is_injective()


def induced_map(F: ComplexMap, i: int,
                report: tuple[RingMap, RingMap] | None = None) -> InducedMap:
    """H^i(F); ``report`` = (eps_X, eps_Y) pushes both sides to a common ring.

    The push is exact when the kernels of eps_X and eps_Y act by zero on the
    cohomology, which is the situation for Sq models reported over B.
    """
    HX = F.source.cohomology(i)
    HY = F.target.cohomology(i + F.degree)
    cols = []
    for z in HX.cocycles:
        c = HY.coordinates(F.apply(i, z))
        if c is None:
            raise DomainError(f"image of a cocycle in degree {i} is not a cocycle")
        cols.append(tuple(c))
    if report is None:
        if F.ring_map.is_identity:
            return InducedMap(i, HX.module, HY.module, cols)
        raise DomainError("maps between different rings need a report ring")
    eps_x, eps_y = report
    return InducedMap(i, HX.module.base_change(eps_x), HY.module.base_change(eps_y),
                      [eps_y.on_vector(c) for c in cols])


@dataclass
class QuasiIsoCertificate:
    """Per-degree record of H^i(F): invariants on both sides and the matrix."""

    ok: bool
    window: tuple[int, int] | None
    degrees: list[tuple[int, str, str, bool]] = field(default_factory=list)
    maps: dict[int, InducedMap] = field(default_factory=dict)

    def failing_degrees(self) -> list[int]:
        return [i for i, _, _, good in self.degrees if not good]


def _default_window(F: ComplexMap) -> tuple[int, int] | None:
    spans = [w for w in (F.source.support, F.target.support) if w is not None]
    if not spans:
        return None
    lo = min(w[0] for w in spans)
    hi = max(w[1] for w in spans)
    for C in (F.source, F.target):
        if C.valid_lo is not None:
            lo = max(lo, C.valid_lo + 1)
        if C.valid_hi is not None:
            hi = min(hi, C.valid_hi - 1)
    return (lo, hi) if lo <= hi else None


def is_quasi_iso(F: ComplexMap, window: tuple[int, int] | None = None,
                 report: tuple[RingMap, RingMap] | None = None) -> QuasiIsoCertificate:
    """Decide whether H^i(F) is bijective for every i in the window."""
    if F.degree:
        raise DomainError("quasi-isomorphisms have degree 0")
    if window is None:
        window = _default_window(F)
    cert = QuasiIsoCertificate(True, window)
    if window is None:
        return cert
    for i in range(window[0], window[1] + 1):
        for C in (F.source, F.target):
            if not C.is_determined(i):
                raise UndeterminedError(f"H^{i} is undetermined", degree=i,
                                        window=(C.valid_lo, C.valid_hi))
        H = induced_map(F, i, report)
        good = H.is_iso()
        cert.maps[i] = H
        cert.degrees.append((i, H.source.invariants().describe(),
                             H.target.invariants().describe(), good))
        cert.ok = cert.ok and good
    logger.debug("quasi-iso check on %s: %s", window, "pass" if cert.ok else "fail")
    return cert


def cone(F: ComplexMap) -> Complex:
    """cone^i = X^{i+1} + Y^i with d(x, y) = (D x, F x - D y)."""
    if not F.ring_map.is_identity or F.degree:
        raise DomainError("cones need a degree-0 map over one ring")
    X, Y = F.source, F.target
    ring = Y.ring
    degrees = set()
    for C, off in ((X, -1), (Y, 0)):
        if C.support is not None:
            degrees.update(range(C.support[0] + off, C.support[1] + off + 1))
    ranks = {i: X.rank(i + 1) + Y.rank(i) for i in degrees}
    diffs = {}
    rels = {}
    minus = ring.const(-1)
    for i in degrees:
        rs = [tuple(r) + ring.vzero(Y.rank(i)) for r in X.relations(i + 1)]
        rs += [ring.vzero(X.rank(i + 1)) + tuple(r) for r in Y.relations(i)]
        rels[i] = rs
        diffs[i] = ring.block([[X.differential(i + 1), None],
                               [F.matrix(i + 1), ring.mscale(minus, Y.differential(i))]],
                              [X.rank(i + 2), Y.rank(i + 1)], [X.rank(i + 1), Y.rank(i)])
    lo = [v for v in (None if X.valid_lo is None else X.valid_lo - 1, Y.valid_lo) if v is not None]
    hi = [v for v in (None if X.valid_hi is None else X.valid_hi - 1, Y.valid_hi) if v is not None]
    return Complex(ring, ranks, diffs, rels, max(lo) if lo else None, min(hi) if hi else None)


def amplitude(H: Mapping[int, Any]) -> int | float:
    """max - min of the nonzero degrees; 0 for zero; inf if some degree is undetermined."""
    nonzero = []
    for i, h in H.items():
        if h is None:
            return math.inf
        zero = h.is_zero() if hasattr(h, "is_zero") else not h
        if not zero:
            nonzero.append(i)
    return max(nonzero) - min(nonzero) if nonzero else 0


# -- Tensor products of flattened complexes --

@dataclass
class ComplexTensor:
    """X (x) Y with the position of each basis tensor x_s (x) y_t of X^p (x) Y^q."""

    complex: Complex
    first: Complex
    second: Complex
    offsets: dict[tuple[int, int], int]

    def index(self, p: int, q: int, s: int, t: int) -> int:
        return self.offsets[(p, q)] + s * self.second.rank(q) + t

    def pairs(self, n: int) -> list[tuple[int, int]]:
        return [pq for pq in self.offsets if pq[0] + pq[1] == n]


def tensor_product(X: Complex, Y: Complex, rings: TensorRing | None = None) -> ComplexTensor:
    """Total complex of X (x) Y with d(x(x)y) = dx(x)y + (-1)^p x(x)dy.

    Without ``rings`` both complexes live over one ring and the tensor is over it.
    """
    if rings is None:
        if X.ring is not Y.ring:
            raise DomainError("complexes over different rings need a tensor ring")
        T = X.ring
        p1 = p2 = RingMap.identity(T)
    else:
        T, p1, p2 = rings.ring, rings.first, rings.second
        if p1.source is not X.ring or p2.source is not Y.ring:
            raise DomainError("tensor ring does not match the factors")
    offsets: dict[tuple[int, int], int] = {}
    if X.support is None or Y.support is None:
        return ComplexTensor(Complex(T, {}), X, Y, offsets)
    xs = range(X.support[0], X.support[1] + 1)
    ys = range(Y.support[0], Y.support[1] + 1)
    blocks: dict[int, list[tuple[int, int]]] = {}
    for p in xs:
        for q in ys:
            if X.rank(p) and Y.rank(q):
                blocks.setdefault(p + q, []).append((p, q))
    ranks = {}
    for i, pairs in blocks.items():
        off = 0
        for pq in pairs:
            offsets[pq] = off
            off += X.rank(pq[0]) * Y.rank(pq[1])
        ranks[i] = off

    def index(p: int, q: int, s: int, t: int) -> int:
        return offsets[(p, q)] + s * Y.rank(q) + t

    rels: dict[int, list[Vector]] = {}
    for i, pairs in blocks.items():
        out = []
        for p, q in pairs:
            a, b = X.rank(p), Y.rank(q)
            for r in X.relations(p):
                for t in range(b):
                    v = [T.zero] * ranks[i]
                    for s in range(a):
                        v[index(p, q, s, t)] = p1(r[s])
                    out.append(tuple(v))
            for r in Y.relations(q):
                for s in range(a):
                    v = [T.zero] * ranks[i]
                    for t in range(b):
                        v[index(p, q, s, t)] = p2(r[t])
                    out.append(tuple(v))
        rels[i] = out
    diffs = {}
    for i, pairs in blocks.items():
        if i + 1 not in ranks:
            continue
        cols = []
        for p, q in pairs:
            DX, DY = X.differential(p), Y.differential(q)
            sign = -1 if p % 2 else 1
            for s in range(X.rank(p)):
                for t in range(Y.rank(q)):
                    v = [T.zero] * ranks[i + 1]
                    if (p + 1, q) in offsets:
                        for s2 in range(X.rank(p + 1)):
                            v[index(p + 1, q, s2, t)] += p1(DX.entry(s2, s))
                    if (p, q + 1) in offsets:
                        for t2 in range(Y.rank(q + 1)):
                            v[index(p, q + 1, s, t2)] += sign * p2(DY.entry(t2, t))
                    cols.append(T.vnf(v))
        diffs[i] = Matrix(ranks[i + 1], ranks[i], tuple(cols))
    # a wrong piece X^a spoils every total degree a + b it meets
    lows = [v for v in (None if X.valid_lo is None else X.valid_lo + Y.support[1],
                        None if Y.valid_lo is None else Y.valid_lo + X.support[1])
            if v is not None]
    highs = [v for v in (None if X.valid_hi is None else X.valid_hi + Y.support[0],
                         None if Y.valid_hi is None else Y.valid_hi + X.support[0])
             if v is not None]
    out = Complex(T, ranks, diffs, rels, max(lows) if lows else None,
                  min(highs) if highs else None)
    return ComplexTensor(out, X, Y, offsets)


def tensor_complexes(X: Complex, Y: Complex, rings: TensorRing | None = None) -> Complex:
    return tensor_product(X, Y, rings).complex


def tensor_fp(X: FPModule, Y: FPModule) -> FPModule:
    """X (x) Y over their common ring, on generators x_s (x) y_t (index s * |Y| + t)."""
    if X.ring is not Y.ring:
        raise DomainError("FP modules over different rings")
    ring = X.ring
    a, b = X.ngens, Y.ngens
    rels = []
    for r in X.relations:
        for t in range(b):
            v = [ring.zero] * (a * b)
            for s in range(a):
                v[s * b + t] = r[s]
            rels.append(v)
    for r in Y.relations:
        for s in range(a):
            v = [ring.zero] * (a * b)
            for t in range(b):
                v[s * b + t] = r[t]
            rels.append(v)
    return FPModule(ring, a * b, rels)


# -- Restriction of scalars --

class ScalarRestriction:
    """Complexes over S viewed over R along phi : R -> S.

    kind "finite": R has no variables and S is finite over it; a vector of S^n
    becomes its coordinates on the monomial basis (index k * dim + t).
    kind "surjective": phi is onto; vectors are lifted entrywise and ker(phi)
    joins the relations.
    """

    def __init__(self, phi: RingMap) -> None:
        R, S = phi.source, phi.target
        self.phi = phi
        if phi.is_identity:
            self.kind = "identity"
        elif not R.nvars and not R.ideal_gens and S.monomial_basis is not None:
            self.kind = "finite"
        elif phi.is_surjective():
            self.kind = "surjective"
        else:
            raise UnsupportedRingError(f"cannot restrict scalars from {S} to {R}")
        self._complexes: weakref.WeakKeyDictionary = weakref.WeakKeyDictionary()

    @cached_property
    def dim(self) -> int:
        basis = self.phi.target.monomial_basis
        return len(basis) if self.kind == "finite" else 1

    @cached_property
    def _basis_elements(self) -> list[PolyElement]:
        S = self.phi.target
        one = S.base.domain.one
        return [S.normal_form(S.poly.from_dict({m: one})) for m in S.monomial_basis]

    @cached_property
    def _kernel(self) -> list[PolyElement]:
        return self.phi.kernel_generators()

    def rank(self, n: int) -> int:
        return n * self.dim

    def basis(self, n: int) -> list[Vector]:
        """The S-vectors that form the R-basis of S^n."""
        S = self.phi.target
        if self.kind != "finite":
            return [S.unit_vector(n, k) for k in range(n)]
        out = []
        for k in range(n):
            for b in self._basis_elements:
                v = [S.zero] * n
                v[k] = b
                out.append(tuple(v))
        return out

    def vector(self, v: Sequence[Any]) -> Vector:
        R, S = self.phi.source, self.phi.target
        if self.kind == "identity":
            return tuple(v)
        if self.kind == "surjective":
            out = []
            for x in v:
                pre = self.phi.preimage(x)
                if pre is None:
                    raise DomainError(f"{S.to_str(x)} has no preimage in {R}")
                out.append(pre)
            return R.vnf(out)
        out = []
        for x in v:
            out.extend(R.const(c) for c in S.coordinates(S.normal_form(x)))
        return R.vnf(out)

    def relations(self, n: int, rels: Iterable[Sequence[Any]]) -> list[Vector]:
        R, S = self.phi.source, self.phi.target
        rels = list(rels)
        if self.kind == "identity":
            return [tuple(r) for r in rels]
        if self.kind == "surjective":
            out = [self.vector(r) for r in rels]
            for g in self._kernel:
                out.extend(R.vscale(g, R.unit_vector(n, k)) for k in range(n))
            return out
        out = [self.vector(S.vscale(b, r)) for r in rels for b in self._basis_elements]
        if S.regime == "zz-finite":
            d = self.dim
            for w in S.lattice.basis:
                for k in range(n):
                    v = [R.zero] * (n * d)
                    for t, x in enumerate(w):
                        v[k * d + t] = R.const(x)
                    out.append(tuple(v))
        return out

    def complex(self, X: Complex) -> Complex:
        """X over R; the same object is returned for repeated calls."""
        if self.kind == "identity":
            return X
        hit = self._complexes.get(X)
        if hit is not None:
            return hit
        R, S = self.phi.source, self.phi.target
        ranks = {i: self.rank(n) for i, n in X.ranks.items()}
        diffs = {}
        for i, D in X.diffs.items():
            cols = [self.vector(S.apply(D, e)) for e in self.basis(X.rank(i))]
            diffs[i] = Matrix(self.rank(X.rank(i + 1)), len(cols), tuple(cols))
        rels = {i: self.relations(n, X.relations(i)) for i, n in X.ranks.items()}
        out = Complex(R, ranks, diffs, rels, X.valid_lo, X.valid_hi, X.name)
        self._complexes[X] = out
        return out

    def complex_map(self, F: ComplexMap) -> ComplexMap:
        """An S-linear map of complexes over S as an R-linear map."""
        if not F.ring_map.is_identity:
            raise DomainError("only maps over one ring are restricted")
        if self.kind == "identity":
            return F
        X, Y = self.complex(F.source), self.complex(F.target)
        mats = {}
        for i in F.mats:
            cols = [self.vector(F.apply(i, e)) for e in self.basis(F.source.rank(i))]
            mats[i] = Matrix(Y.rank(i + F.degree), len(cols), tuple(cols))
        return ComplexMap(X, Y, RingMap.identity(self.phi.source), mats, F.degree)


def scalar_restriction(phi: RingMap) -> ScalarRestriction:
    """The restriction along phi, memoized on phi."""
    return memo_on(phi, "restriction", lambda: ScalarRestriction(phi))


def restrict_complex(X: Complex, phi: RingMap) -> Complex:
    return scalar_restriction(phi).complex(X)


# -- Flat certificates --

@dataclass
class FlatCertificate:
    """A bounded complex of flat modules with a quasi-isomorphism to M."""

    complex: Complex
    to_target: ComplexMap

    def length(self) -> int:
        sup = self.complex.support
        return 0 if sup is None else sup[1] - sup[0]


@dataclass
class FlatCheck:
    ok: bool
    reasons: list[str] = field(default_factory=list)


def is_flat_over(M: FPModule, base: RingMap) -> bool:
    """Sufficient flatness test for an FP module over ``base.target`` viewed over ``base.source``.

    Accepted cases: the base is a field; the module is free over the target ring and
    the target is the base itself, a localization of it, or a free ZZ-module.
    """
    A, B = base.source, base.target
    if A.base.is_field and A.nvars == 0 and not A.ideal_gens:
        return True
    pruned = M.prune().module
    if pruned.relations and not pruned.is_zero():
        if B.regime == "zz-finite" and A.nvars == 0 and not A.ideal_gens:
            return not pruned.invariants().factors
        return False
    if B is A or (B.localization is not None and B.localization.parent is A):
        return True
    if B.regime == "zz-finite" and A.nvars == 0 and not A.ideal_gens:
        factors, _ = B.lattice_invariants()
        return not factors
    if B.regime == "field" and not B.ideal_gens and set(A.variables) <= set(B.variables) \
            and not A.ideal_gens:
        return True
    return False


def check_flat_certificate(cert: FlatCertificate, base: RingMap) -> FlatCheck:
    """Degreewise flatness over the base plus a quasi-isomorphism to the target."""
    out = FlatCheck(True)
    Q = cert.complex
    sup = Q.support
    if sup is not None:
        for i in range(sup[0], sup[1] + 1):
            if not is_flat_over(Q.piece(i), base):
                out.ok = False
                out.reasons.append(f"piece {i} is not certified flat over {base.source}")
    if cert.to_target.source is not Q:
        out.ok = False
        out.reasons.append("certificate map does not start at the certificate complex")
        return out
    if cert.to_target.chain_failures():
        out.ok = False
        out.reasons.append("certificate map is not a chain map")
        return out
    qi = is_quasi_iso(cert.to_target)
    if not qi.ok:
        out.ok = False
        out.reasons.append(f"certificate map fails in degrees {qi.failing_degrees()}")
    return out


def flat_dimension_bound(cert: FlatCertificate) -> int:
    """Length of the certificate complex, an upper bound read off the certificate."""
    return cert.length()
