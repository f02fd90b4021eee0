"""Non-positive super-commutative DG algebras R[X] over a presented ring R.

An element is a dict mapping an exponent tuple over the graded variables to a
nonzero element of the degree-0 ring. A monomial is the ordered product
x_1^e_1 ... x_n^e_n; multiplying two monomials reorders the odd factors and
picks up the Koszul sign. Odd variables are square-zero unless explicitly
declared otherwise, which ``dg_validate`` reports as a defect.

The differential is zero on R and determined on monomials by the Leibniz rule
d(x m') = d(x) m' + (-1)^|x| x d(m'), peeling off the first variable.
"""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field
from typing import Any, Iterable, Mapping, Sequence

from sympy.polys.rings import PolyElement

from py_rigidsq.errors import DomainError
from py_rigidsq.polyring import PresentedRing, RingMap, TensorRing, renamed, tensor_rings
from py_rigidsq.utils import memo_on

logger = logging.getLogger(__name__)

Mono = tuple[int, ...]
Element = dict[Mono, PolyElement]


@dataclass(frozen=True)
class GradedVariable:
    name: str
    degree: int
    square_zero: bool | None = None

    @property
    def odd(self) -> bool:
        return self.degree % 2 != 0

    @property
    def exterior(self) -> bool:
        return self.odd if self.square_zero is None else self.square_zero


@dataclass
class DGReport:
    """Outcome of ``dg_validate``: one line per failed identity."""

    failures: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.failures


class DGAlgebra:
    """R[X] with a degree +1 derivation; graded variables have degree <= -1 when valid."""

    def __init__(self, ring: PresentedRing, variables: Sequence[GradedVariable] = (),
                 differentials: Sequence[Mapping[Mono, Any]] = (), name: str | None = None,
                 valid_lo: int | None = None) -> None:
        names = [v.name for v in variables]
        if len(set(names)) != len(names) or set(names) & set(ring.variables):
            raise DomainError(f"graded variable names {names} clash")
        if len(differentials) != len(variables):
            raise DomainError("one differential value is needed per graded variable")
        self.ring = ring
        self.variables = tuple(variables)
        self.nvars = len(self.variables)
        self.name = name
        # lowest degree in which the algebra is known to be complete; None = exact
        self.valid_lo = valid_lo
        self.unit_mono: Mono = (0,) * self.nvars
        self.differentials = tuple(self._clean(dict(d)) for d in differentials)
        self._d_cache: dict[Mono, Element] = {}
        self._mono_cache: dict[int, list[Mono]] = {}

    # -- Elements --

    def _clean(self, elem: Mapping[Mono, Any]) -> Element:
        out: Element = {}
        for m, c in elem.items():
            if len(m) != self.nvars:
                raise DomainError(f"monomial {m} has the wrong length for {self}")
            c = self.ring.normal_form(c)
            if c and self._admissible(m):
                out[m] = c
        return out

    def _admissible(self, m: Mono) -> bool:
        return all(e <= 1 or not v.exterior for v, e in zip(self.variables, m))

    def element(self, terms: Mapping[Mono, Any]) -> Element:
        return self._clean(terms)

    def zero(self) -> Element:
        return {}

    def one(self) -> Element:
        return self.scalar(self.ring.one)

    def scalar(self, r: Any) -> Element:
        r = self.ring.normal_form(r)
        return {self.unit_mono: r} if r else {}

    def monomial(self, m: Mono, coeff: Any = None) -> Element:
        c = self.ring.one if coeff is None else coeff
        return self._clean({m: c})

    def var(self, name: str) -> Element:
        k = self.index(name)
        return {tuple(1 if i == k else 0 for i in range(self.nvars)): self.ring.one}

    def index(self, name: str) -> int:
        for k, v in enumerate(self.variables):
            if v.name == name:
                return k
        raise DomainError(f"{name!r} is not a graded variable of {self}")

    def mono_degree(self, m: Mono) -> int:
        return sum(e * v.degree for e, v in zip(m, self.variables))

    def degrees(self, a: Element) -> set[int]:
        return {self.mono_degree(m) for m in a}

    def is_homogeneous(self, a: Element, degree: int | None = None) -> bool:
        degs = self.degrees(a)
        if not degs:
            return True
        return len(degs) == 1 and (degree is None or degs == {degree})

    def degree_zero_part(self, a: Element) -> PolyElement:
        return a.get(self.unit_mono, self.ring.zero)

    def add(self, a: Element, b: Element) -> Element:
        out = dict(a)
        for m, c in b.items():
            s = self.ring.add(out.get(m, self.ring.zero), c)
            if s:
                out[m] = s
            else:
                out.pop(m, None)
        return out

    def neg(self, a: Element) -> Element:
        return {m: -c for m, c in a.items()}

    def sub(self, a: Element, b: Element) -> Element:
        return self.add(a, self.neg(b))

    def scale(self, r: Any, a: Element) -> Element:
        r = self.ring.normal_form(r)
        if not r:
            return {}
        return self._clean({m: self.ring.mul(r, c) for m, c in a.items()})

    def mono_mul(self, m1: Mono, m2: Mono) -> tuple[int, Mono] | None:
        """Sign and exponent of m1*m2, or None if an exterior square appears."""
        out = tuple(x + y for x, y in zip(m1, m2))
        if not self._admissible(out):
            return None
        odd = [v.odd for v in self.variables]
        parity = 0
        later = 0
        for j in range(self.nvars - 1, -1, -1):
            if odd[j]:
                parity += m2[j] * later
                later += m1[j]
        return (-1 if parity % 2 else 1), out

    def mul(self, a: Element, b: Element) -> Element:
        acc: dict[Mono, PolyElement] = {}
        for m1, c1 in a.items():
            for m2, c2 in b.items():
                res = self.mono_mul(m1, m2)
                if res is None:
                    continue
                sign, m = res
                term = c1 * c2 if sign > 0 else -(c1 * c2)
                acc[m] = acc.get(m, self.ring.zero) + term
        return self._clean(acc)

    def power(self, a: Element, e: int) -> Element:
        out = self.one()
        for _ in range(e):
            out = self.mul(out, a)
        return out

    def equal(self, a: Element, b: Element) -> bool:
        return not self.sub(a, b)

    # -- Differential --

    def d_mono(self, m: Mono) -> Element:
        if m in self._d_cache:
            return self._d_cache[m]
        k = next((i for i, e in enumerate(m) if e), None)
        if k is None:
            out: Element = {}
        else:
            rest = tuple(e - 1 if i == k else e for i, e in enumerate(m))
            xk = tuple(1 if i == k else 0 for i in range(self.nvars))
            first = self.mul(self.differentials[k], self.monomial(rest))
            second = self.mul({xk: self.ring.one}, self.d_mono(rest))
            if self.variables[k].odd:
                second = self.neg(second)
            out = self.add(first, second)
        self._d_cache[m] = out
        return out

    def d(self, a: Element) -> Element:
        out: Element = {}
        for m, c in a.items():
            dm = self.d_mono(m)
            if dm:
                out = self.add(out, self.scale(c, dm))
        return out

    # -- Graded pieces --

    def monomials(self, degree: int) -> list[Mono]:
        """All admissible monomials of the given degree, in a fixed order."""
        if degree in self._mono_cache:
            return self._mono_cache[degree]
        if degree > 0:
            return []
        if any(v.degree >= 0 for v in self.variables):
            raise DomainError(f"{self} has graded variables of non-negative degree")
        out: list[Mono] = []

        def rec(k: int, remaining: int, prefix: list[int]) -> None:
            if k == self.nvars:
                if remaining == 0:
                    out.append(tuple(prefix))
                return
            v = self.variables[k]
            top = 1 if v.exterior else remaining // v.degree
            for e in range(min(top, remaining // v.degree) + 1):
                rec(k + 1, remaining - e * v.degree, prefix + [e])

        rec(0, degree, [])
        self._mono_cache[degree] = out
        return out

    def graded_set(self) -> dict[int, list[str]]:
        out: dict[int, list[str]] = {}
        for v in self.variables:
            out.setdefault(v.degree, []).append(v.name)
        return out

    def lowest_variable_degree(self) -> int:
        return min((v.degree for v in self.variables), default=0)

    # -- Extensions --

    def pad(self, a: Element, extra: int) -> Element:
        """Embed an element into an algebra with ``extra`` variables appended."""
        return {m + (0,) * extra: c for m, c in a.items()}

    def adjoin(self, variables: Sequence[GradedVariable],
               differentials: Sequence[Element], name: str | None = None) -> DGAlgebra:
        """A new algebra with ``variables`` appended; differentials are given in the new algebra."""
        n = len(variables)
        old = [self.pad(dv, n) for dv in self.differentials]
        return DGAlgebra(self.ring, list(self.variables) + list(variables),
                         old + list(differentials), name or self.name, self.valid_lo)

    def over_ring(self, phi: RingMap) -> DGAlgebra:
        """The same graded variables over phi.target, coefficients pushed along phi."""
        if phi.source is not self.ring:
            raise DomainError("ring map does not start at the degree-0 ring")
        diffs = [{m: phi(c) for m, c in dv.items()} for dv in self.differentials]
        return DGAlgebra(phi.target, self.variables, diffs, self.name, self.valid_lo)

    def fresh_names(self, stem: str, count: int) -> list[str]:
        taken = set(self.ring.variables) | {v.name for v in self.variables}
        out = []
        k = 0
        while len(out) < count:
            cand = f"{stem}{k}"
            if cand not in taken:
                out.append(cand)
                taken.add(cand)
            k += 1
        return out

    # -- Output --

    def mono_str(self, m: Mono) -> str:
        parts = []
        for v, e in zip(self.variables, m):
            if e == 1:
                parts.append(v.name)
            elif e > 1:
                parts.append(f"{v.name}^{e}")
        return "*".join(parts)

    def to_str(self, a: Element) -> str:
        if not a:
            return "0"
        terms = []
        for m in sorted(a, key=lambda m: (self.mono_degree(m), m), reverse=True):
            c = self.ring.to_str(a[m])
            mono = self.mono_str(m)
            if not mono:
                terms.append(c)
            elif c == "1":
                terms.append(mono)
            elif c == "-1":
                terms.append(f"-{mono}")
            else:
                terms.append(f"({c})*{mono}")
        return " + ".join(terms).replace("+ -", "- ")

    def describe(self) -> str:
        body = ", ".join(f"{v.name}[{v.degree}] -> {self.to_str(dv)}"
                         for v, dv in zip(self.variables, self.differentials))
        return f"{self.ring}<{body}>" if body else str(self.ring)

    def __str__(self) -> str:
        return self.name or self.describe()

    __repr__ = __str__


def trivial_algebra(ring: PresentedRing) -> DGAlgebra:
    """The ring viewed as a DG algebra concentrated in degree 0 (one object per ring)."""
    return memo_on(ring, "trivial_algebra", lambda: DGAlgebra(ring, (), (), name=str(ring)))


def dg_validate(alg: DGAlgebra) -> DGReport:
    """Check degrees, the exterior relation, d^2 = 0 and Leibniz on generator pairs."""
    report = DGReport()
    for v, dv in zip(alg.variables, alg.differentials):
        if v.degree >= 0:
            report.failures.append(f"{v.name}: degree {v.degree} is not negative")
            continue
        if v.odd and v.square_zero is False:
            report.failures.append(f"{v.name}: odd variable with {v.name}^2 retained")
        if not alg.is_homogeneous(dv, v.degree + 1):
            report.failures.append(
                f"{v.name}: d({v.name}) = {alg.to_str(dv)} is not of degree {v.degree + 1}")
    if report.failures:
        return report
    for k, v in enumerate(alg.variables):
        dd = alg.d(alg.differentials[k])
        if dd:
            report.failures.append(f"{v.name}: d(d({v.name})) = {alg.to_str(dd)}")
    gens = [alg.var(v.name) for v in alg.variables]
    for (i, a), (j, b) in itertools.combinations_with_replacement(list(enumerate(gens)), 2):
        da = alg.differentials[i]
        db = alg.differentials[j]
        lhs = alg.d(alg.mul(b, a))
        sign_b = -1 if alg.variables[j].odd else 1
        rhs = alg.add(alg.mul(db, a), alg.scale(sign_b, alg.mul(b, da)))
        if not alg.equal(lhs, rhs):
            report.failures.append(
                f"Leibniz fails on {alg.variables[j].name}*{alg.variables[i].name}")
    logger.debug("dg_validate %s: %d failures", alg, len(report.failures))
    return report


# -- Algebra maps --

class DGAlgebraMap:
    """A degree-0 map of DG algebras: a ring map in degree 0 plus images of graded variables."""

    def __init__(self, source: DGAlgebra, target: DGAlgebra, ring_map: RingMap,
                 images: Sequence[Element]) -> None:
        if ring_map.source is not source.ring or ring_map.target is not target.ring:
            raise DomainError("ring map does not match the degree-0 rings")
        if len(images) != source.nvars:
            raise DomainError(f"{len(images)} images for {source.nvars} graded variables")
        self.source = source
        self.target = target
        self.ring_map = ring_map
        self.images = tuple(target.element(a) for a in images)
        self._cache: dict[Mono, Element] = {}

    @classmethod
    def identity(cls, alg: DGAlgebra) -> DGAlgebraMap:
        return cls(alg, alg, RingMap.identity(alg.ring), [alg.var(v.name) for v in alg.variables])

    @classmethod
    def inclusion(cls, source: DGAlgebra, target: DGAlgebra, ring_map: RingMap) -> DGAlgebraMap:
        """Send each graded variable to the target variable of the same name."""
        return cls(source, target, ring_map, [target.var(v.name) for v in source.variables])

    def on_mono(self, m: Mono) -> Element:
        if m not in self._cache:
            out = self.target.one()
            for img, e in zip(self.images, m):
                for _ in range(e):
                    out = self.target.mul(out, img)
            self._cache[m] = out
        return self._cache[m]

    def __call__(self, a: Element) -> Element:
        out: Element = {}
        for m, c in a.items():
            out = self.target.add(out, self.target.scale(self.ring_map(c), self.on_mono(m)))
        return out

    def compose(self, first: DGAlgebraMap) -> DGAlgebraMap:
        """self after first."""
        if first.target is not self.source:
            raise DomainError("DG algebra maps do not compose")
        return DGAlgebraMap(first.source, self.target, self.ring_map.compose(first.ring_map),
                            [self(a) for a in first.images])

    def failures(self) -> list[str]:
        """Generators on which the map fails to commute with d or to preserve degree."""
        out = []
        for v, img, dv in zip(self.source.variables, self.images, self.source.differentials):
            if not self.target.is_homogeneous(img, v.degree):
                out.append(f"{v.name}: image {self.target.to_str(img)} has the wrong degree")
            elif not self.target.equal(self.target.d(img), self(dv)):
                out.append(f"{v.name}: d(w({v.name})) != w(d({v.name}))")
        return out

    def __repr__(self) -> str:
        return f"DGAlgebraMap({self.source} -> {self.target})"


def augmentation(alg: DGAlgebra, phi: RingMap) -> DGAlgebraMap:
    """alg -> phi.target (trivial algebra): phi in degree 0, every graded variable to 0."""
    target = trivial_algebra(phi.target)
    return DGAlgebraMap(alg, target, phi, [{} for _ in alg.variables])


# -- Tensor products --

@dataclass
class TensorAlgebra:
    algebra: DGAlgebra
    first: DGAlgebraMap
    second: DGAlgebraMap
    rings: TensorRing


def _images(phi: RingMap | None) -> tuple[str, ...] | None:
    return None if phi is None else tuple(phi.target.to_str(x) for x in phi.images)


def cached_tensor_rings(R: PresentedRing, S: PresentedRing, A: PresentedRing,
                        to_r: RingMap | None = None, to_s: RingMap | None = None) -> TensorRing:
    """tensor_rings, memoized on the rings and on the images of the structure maps."""
    return memo_on(R, ("tensor_rings", _images(to_r), _images(to_s)),
                   lambda: tensor_rings(R, S, A, to_r, to_s), S, A)


def tensor_algebras(X: DGAlgebra, Y: DGAlgebra, A: PresentedRing,
                    to_x: RingMap | None = None, to_y: RingMap | None = None) -> TensorAlgebra:
    """X (x)_A Y for DG algebras whose degree-0 rings are A-algebras."""
    return memo_on(X, ("tensor_algebra", _images(to_x), _images(to_y)),
                   lambda: _tensor_algebras(X, Y, A, to_x, to_y), Y, A)


def _tensor_algebras(X: DGAlgebra, Y: DGAlgebra, A: PresentedRing,
                     to_x: RingMap | None, to_y: RingMap | None) -> TensorAlgebra:
    rings = cached_tensor_rings(X.ring, Y.ring, A, to_x, to_y)
    T = rings.ring
    taken = set(T.variables)
    x_names = renamed([v.name for v in X.variables], "1", taken)
    y_names = renamed([v.name for v in Y.variables], "2", taken)
    variables = [GradedVariable(n, v.degree, v.square_zero) for n, v in zip(x_names, X.variables)]
    variables += [GradedVariable(n, v.degree, v.square_zero) for n, v in zip(y_names, Y.variables)]
    nx, ny = X.nvars, Y.nvars

    def from_x(a: Element) -> Element:
        return {m + (0,) * ny: rings.first(c) for m, c in a.items()}

    def from_y(a: Element) -> Element:
        return {(0,) * nx + m: rings.second(c) for m, c in a.items()}

    diffs = [from_x(dv) for dv in X.differentials] + [from_y(dv) for dv in Y.differentials]
    lows = [v for v in (X.valid_lo, Y.valid_lo) if v is not None]
    alg = DGAlgebra(T, variables, diffs, valid_lo=max(lows) if lows else None)
    first = DGAlgebraMap(X, alg, rings.first, [alg.var(n) for n in x_names])
    second = DGAlgebraMap(Y, alg, rings.second, [alg.var(n) for n in y_names])
    out = TensorAlgebra(alg, first, second, rings)
    logger.debug("tensor algebra on %d graded variables over %s", alg.nvars, T)
    return out


def multiplication_map(tensor: TensorAlgebra, target: DGAlgebra,
                       left: DGAlgebraMap, right: DGAlgebraMap) -> DGAlgebraMap:
    """The map X (x) Y -> target induced by ``left`` on X and ``right`` on Y."""
    T = tensor.algebra
    R = T.ring
    n_first = tensor.rings.first.source.nvars
    images = list(left.ring_map.images) + list(right.ring_map.images)
    if len(images) != R.nvars or n_first != left.ring_map.source.nvars:
        raise DomainError("tensor ring does not match the factor maps")
    phi = RingMap(R, target.ring, images)
    return DGAlgebraMap(T, target, phi, list(left.images) + list(right.images))


def tensor_algebra_map(source: TensorAlgebra, target: TensorAlgebra,
                       left: DGAlgebraMap, right: DGAlgebraMap) -> DGAlgebraMap:
    """left (x) right : X (x) Y -> X' (x) Y' between two tensor algebras."""
    if left.source is not source.first.source or right.source is not source.second.source \
            or left.target is not target.first.source or right.target is not target.second.source:
        raise DomainError("factor maps do not match the tensor algebras")
    rings = target.rings
    images = [rings.first(g) for g in left.ring_map.images]
    images += [rings.second(g) for g in right.ring_map.images]
    phi = RingMap(source.algebra.ring, target.algebra.ring, images)
    graded = [target.first(a) for a in left.images] + [target.second(a) for a in right.images]
    return DGAlgebraMap(source.algebra, target.algebra, phi, graded)
