"""DG modules over the DG algebras of ``dgalgebra`` and the maps between them.

Every DG module answers the same questions degree by degree: the rank and
relations of its piece in degree i (a finitely presented module over the
degree-0 ring), the differential into degree i+1, and the action of an algebra
monomial. ``flatten`` turns any window of a module into a ``Complex``.

Semi-free modules are stored through their semi-basis: generator degrees and
the differential of each generator as a module element, i.e. a dict mapping
(algebra monomial, generator index) to a coefficient. Generators are listed in
filtration order, so d(e_j) only involves earlier generators.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from functools import cached_property
from typing import Any, Callable, Iterable, Mapping, Sequence

from sympy.polys.rings import PolyElement

from py_rigidsq.dgalgebra import (
    DGAlgebra, DGAlgebraMap, Element, Mono, TensorAlgebra, trivial_algebra,
)
from py_rigidsq.dgcore import Complex, ComplexMap
from py_rigidsq.errors import DomainError, LiftError, UnsupportedRingError, WindowError
from py_rigidsq.polyring import Matrix, PresentedRing, RingMap, Submodule, Vector
from py_rigidsq.utils import memo_on

logger = logging.getLogger(__name__)

Key = tuple[Mono, int]
ModElement = dict[Key, PolyElement]


def _min_opt(*values: int | None) -> int | None:
    vals = [v for v in values if v is not None]
    return min(vals) if vals else None


def _max_opt(*values: int | None) -> int | None:
    vals = [v for v in values if v is not None]
    return max(vals) if vals else None


# -- The module protocol --

class DGModule:
    """Base class: subclasses provide ranks, relations, differentials and the action."""

    algebra: DGAlgebra
    valid_lo: int | None = None
    valid_hi: int | None = None
    name: str | None = None

    @property
    def ring(self) -> PresentedRing:
        return self.algebra.ring

    def rank(self, i: int) -> int:
        raise NotImplementedError

    def relations(self, i: int) -> list[Vector]:
        return []

    def differential(self, i: int) -> Matrix:
        raise NotImplementedError

    def act(self, mono: Mono, i: int) -> Matrix:
        """Left multiplication by an algebra monomial: piece i -> piece i + |mono|."""
        raise NotImplementedError

    @property
    def top(self) -> int | None:
        """Highest degree that may be nonzero (None for the zero module)."""
        raise NotImplementedError

    @property
    def bottom(self) -> int | None:
        """Lowest degree that may be nonzero; None when unbounded below."""
        raise NotImplementedError

    def is_genuine(self, i: int) -> bool:
        return (self.valid_lo is None or i >= self.valid_lo) and \
            (self.valid_hi is None or i <= self.valid_hi)

    def act_element(self, a: Element, i: int, degree: int | None = None) -> Matrix:
        """Left multiplication by a homogeneous algebra element of the given degree."""
        degs = self.algebra.degrees(a)
        if len(degs) > 1 or (degree is not None and degs and degs != {degree}):
            raise DomainError("acting by an inhomogeneous element")
        shift = degree if degree is not None else (degs.pop() if degs else 0)
        ring = self.ring
        out = ring.zero_matrix(self.rank(i + shift), self.rank(i))
        for m, c in a.items():
            out = ring.madd(out, ring.mscale(c, self.act(m, i)))
        return out

    def flatten(self, lo: int | None = None, hi: int | None = None) -> Complex:
        """The pieces in [lo, hi] as a Complex; lo defaults to the bottom degree."""
        if lo is None:
            lo = self.bottom
            if lo is None:
                raise WindowError(f"{self} is unbounded below; give a lower degree")
        if hi is None:
            hi = self.top if self.top is not None else lo - 1
        key = (lo, hi)
        cache = self.__dict__.setdefault("_flat", {})
        if key not in cache:
            ranks = {i: self.rank(i) for i in range(lo, hi + 1)}
            diffs = {i: self.differential(i) for i in range(lo, hi)}
            rels = {i: self.relations(i) for i in range(lo, hi + 1)}
            valid_lo = self.valid_lo
            if lo > (self.bottom if self.bottom is not None else lo - 1):
                valid_lo = _max_opt(valid_lo, lo)
            valid_hi = self.valid_hi
            if self.top is None or hi < self.top:
                valid_hi = _min_opt(valid_hi, hi)
            cache[key] = Complex(self.ring, ranks, diffs, rels, valid_lo, valid_hi, self.name)
        return cache[key]

    def __repr__(self) -> str:
        return f"{type(self).__name__}({self.name or self.algebra})"


class FlatModule(DGModule):
    """A Complex viewed as a DG module over its degree-0 ring."""

    def __init__(self, complex_: Complex, name: str | None = None) -> None:
        self.complex = complex_
        self.algebra = trivial_algebra(complex_.ring)
        self.valid_lo = complex_.valid_lo
        self.valid_hi = complex_.valid_hi
        self.name = name or complex_.name

    def rank(self, i: int) -> int:
        return self.complex.rank(i)

    def relations(self, i: int) -> list[Vector]:
        return self.complex.relations(i)

    def differential(self, i: int) -> Matrix:
        return self.complex.differential(i)

    def act(self, mono: Mono, i: int) -> Matrix:
        return self.ring.identity_matrix(self.rank(i))

    @property
    def top(self) -> int | None:
        sup = self.complex.support
        return None if sup is None else sup[1]

    @property
    def bottom(self) -> int | None:
        sup = self.complex.support
        return 0 if sup is None else sup[0]

    def flatten(self, lo: int | None = None, hi: int | None = None) -> Complex:
        sup = self.complex.support
        if sup is not None and (lo is None or lo <= sup[0]) and (hi is None or hi >= sup[1]):
            return self.complex
        return super().flatten(lo, hi)


# -- Semi-free modules --

class SemiFreeModule(DGModule):
    """A semi-free DG module: free over the algebra on generators e_j of degree d_j."""

    def __init__(self, algebra: DGAlgebra, degrees: Sequence[int],
                 differentials: Sequence[Mapping[Key, Any]], names: Sequence[str] | None = None,
                 complete_lo: int | None = None, name: str | None = None) -> None:
        if len(degrees) != len(differentials):
            raise DomainError("one differential value is needed per generator")
        self.algebra = algebra
        self.degrees = list(degrees)
        self.ngens = len(self.degrees)
        self.names = list(names) if names is not None else [f"e{j}" for j in range(self.ngens)]
        self.complete_lo = complete_lo
        self.name = name
        self.dgens = [self._clean(d) for d in differentials]
        for j, dv in enumerate(self.dgens):
            for (m, k), _ in dv.items():
                if k >= j:
                    raise DomainError(f"d({self.names[j]}) uses a later generator")
                if algebra.mono_degree(m) + self.degrees[k] != self.degrees[j] + 1:
                    raise DomainError(f"d({self.names[j]}) is not homogeneous of degree "
                                      f"{self.degrees[j] + 1}")
        low_alg = None
        if algebra.valid_lo is not None and self.degrees:
            low_alg = algebra.valid_lo + max(self.degrees)
        self.valid_lo = _max_opt(complete_lo, low_alg)
        self.valid_hi = None
        self._basis: dict[int, list[Key]] = {}
        self._index: dict[int, dict[Key, int]] = {}
        self._diff: dict[int, Matrix] = {}
        self._act: dict[tuple[Mono, int], Matrix] = {}

    def _clean(self, elem: Mapping[Key, Any]) -> ModElement:
        ring = self.algebra.ring
        out: ModElement = {}
        for key, c in elem.items():
            c = ring.normal_form(c)
            if c and self.algebra._admissible(key[0]):
                out[key] = c
        return out

    # -- Bases --

    def basis(self, i: int) -> list[Key]:
        if i not in self._basis:
            keys = []
            for j, dj in enumerate(self.degrees):
                if i - dj <= 0:
                    keys.extend((m, j) for m in self.algebra.monomials(i - dj))
            self._basis[i] = keys
            self._index[i] = {k: n for n, k in enumerate(keys)}
        return self._basis[i]

    def index(self, i: int) -> dict[Key, int]:
        self.basis(i)
        return self._index[i]

    def rank(self, i: int) -> int:
        return len(self.basis(i))

    @property
    def top(self) -> int | None:
        return max(self.degrees) if self.degrees else None

    @property
    def bottom(self) -> int | None:
        if not self.degrees:
            return 0
        if any(not v.exterior for v in self.algebra.variables):
            return None
        return min(self.degrees) + sum(v.degree for v in self.algebra.variables)

    def generator_degree(self, j: int) -> int:
        return self.degrees[j]

    # -- Elements --

    def vector(self, elem: Mapping[Key, Any], i: int) -> Vector:
        ring = self.ring
        idx = self.index(i)
        out = [ring.zero] * len(idx)
        for key, c in elem.items():
            if key not in idx:
                raise DomainError(f"term {key} does not live in degree {i}")
            out[idx[key]] = out[idx[key]] + c
        return ring.vnf(out)

    def element(self, v: Sequence[Any], i: int) -> ModElement:
        return self._clean({key: c for key, c in zip(self.basis(i), v) if c})

    def generator(self, j: int) -> ModElement:
        return {(self.algebra.unit_mono, j): self.ring.one}

    def add_elements(self, x: ModElement, y: ModElement) -> ModElement:
        ring = self.ring
        out = dict(x)
        for key, c in y.items():
            s = ring.add(out.get(key, ring.zero), c)
            if s:
                out[key] = s
            else:
                out.pop(key, None)
        return out

    def mul_element(self, a: Element, x: ModElement) -> ModElement:
        """a * x for an algebra element a."""
        alg = self.algebra
        ring = self.ring
        acc: dict[Key, PolyElement] = {}
        for m1, c1 in a.items():
            for (m2, j), c2 in x.items():
                res = alg.mono_mul(m1, m2)
                if res is None:
                    continue
                sign, m = res
                acc[(m, j)] = acc.get((m, j), ring.zero) + (c1 * c2 if sign > 0 else -(c1 * c2))
        return self._clean(acc)

    def d_element(self, x: ModElement) -> ModElement:
        alg = self.algebra
        out: ModElement = {}
        for (m, j), c in x.items():
            part = {(m2, j): c2 for m2, c2 in alg.d_mono(m).items()}
            rest = self.mul_element({m: alg.ring.one}, self.dgens[j])
            if alg.mono_degree(m) % 2:
                rest = {k: -v for k, v in rest.items()}
            term = self.add_elements(self._clean(part), rest)
            out = self.add_elements(out, {k: alg.ring.mul(c, v) for k, v in term.items()})
        return self._clean(out)

    # -- Protocol --

    def differential(self, i: int) -> Matrix:
        if i not in self._diff:
            cols = [self.vector(self.d_element({key: self.ring.one}), i + 1)
                    for key in self.basis(i)]
            self._diff[i] = Matrix(self.rank(i + 1), self.rank(i), tuple(cols))
        return self._diff[i]

    def act(self, mono: Mono, i: int) -> Matrix:
        if (mono, i) not in self._act:
            shift = self.algebra.mono_degree(mono)
            cols = [self.vector(self.mul_element({mono: self.ring.one}, {key: self.ring.one}),
                                i + shift) for key in self.basis(i)]
            self._act[(mono, i)] = Matrix(self.rank(i + shift), self.rank(i), tuple(cols))
        return self._act[(mono, i)]

    def extend(self, degrees: Sequence[int], differentials: Sequence[Mapping[Key, Any]],
               names: Sequence[str] | None = None, complete_lo: int | None = None) -> SemiFreeModule:
        """A new module with generators appended at the end of the filtration."""
        names = list(names) if names is not None else \
            [f"e{j}" for j in range(self.ngens, self.ngens + len(degrees))]
        return SemiFreeModule(self.algebra, self.degrees + list(degrees),
                              self.dgens + [dict(d) for d in differentials],
                              self.names + names, complete_lo, self.name)

    def generator_table(self) -> list[list[str]]:
        """Rows (name, degree, differential) for reports."""
        rows = []
        for j in range(self.ngens):
            rows.append([self.names[j], str(self.degrees[j]), self.element_str(self.dgens[j])])
        return rows

    def element_str(self, x: ModElement) -> str:
        if not x:
            return "0"
        parts = []
        for (m, j), c in x.items():
            mono = self.algebra.mono_str(m)
            coeff = self.ring.to_str(c)
            label = f"{mono}*{self.names[j]}" if mono else self.names[j]
            parts.append(label if coeff == "1" else f"({coeff})*{label}")
        return " + ".join(parts)

    @classmethod
    def from_complex(cls, C: Complex, name: str | None = None) -> SemiFreeModule:
        """A bounded complex of free modules as a semi-free module over its ring."""
        if not C.is_free():
            raise DomainError("only complexes of free modules are semi-free")
        alg = trivial_algebra(C.ring)
        sup = C.support
        degrees: list[int] = []
        diffs: list[dict] = []
        names: list[str] = []
        first: dict[int, int] = {}
        if sup is not None:
            for i in range(sup[1], sup[0] - 1, -1):
                first[i] = len(degrees)
                D = C.differential(i)
                for k in range(C.rank(i)):
                    dv = {((), first[i + 1] + l): D.entry(l, k)
                          for l in range(C.rank(i + 1)) if D.entry(l, k)}
                    degrees.append(i)
                    diffs.append(dv)
                    names.append(f"e{i}_{k}")
        out = cls(alg, degrees, diffs, names, complete_lo=C.valid_lo, name=name or C.name)
        out.degree_offsets = first
        return out

    def piece_index(self, i: int, k: int) -> int:
        """For modules built by ``from_complex``: generator of basis vector k in degree i."""
        return self.degree_offsets[i] + k


class AugmentedModule(DGModule):
    """A complex over S pulled back along a surjection algebra^0 -> S; graded variables act by 0."""

    def __init__(self, algebra: DGAlgebra, augmentation: RingMap, complex_: Complex,
                 name: str | None = None) -> None:
        if augmentation.source is not algebra.ring or augmentation.target is not complex_.ring:
            raise DomainError("augmentation does not match the algebra and the complex")
        self.algebra = algebra
        self.augmentation = augmentation
        self.complex = complex_
        self.valid_lo = complex_.valid_lo
        self.valid_hi = complex_.valid_hi
        self.name = name or complex_.name
        self._pre: dict[Any, PolyElement] = {}

    @cached_property
    def kernel(self) -> list[PolyElement]:
        return self.augmentation.kernel_generators()

    def _lift(self, b: PolyElement) -> PolyElement:
        key = self.complex.ring.to_str(b)
        if key not in self._pre:
            a = self.augmentation.preimage(b)
            if a is None:
                raise DomainError(f"{key} has no preimage in {self.algebra.ring}")
            self._pre[key] = a
        return self._pre[key]

    def lift_vector(self, v: Sequence[PolyElement]) -> Vector:
        return tuple(self._lift(b) for b in v)

    def rank(self, i: int) -> int:
        return self.complex.rank(i)

    def relations(self, i: int) -> list[Vector]:
        n = self.rank(i)
        ring = self.ring
        rels = [self.lift_vector(r) for r in self.complex.relations(i)]
        for g in self.kernel:
            rels.extend(ring.vscale(g, ring.unit_vector(n, k)) for k in range(n))
        return rels

    def differential(self, i: int) -> Matrix:
        D = self.complex.differential(i)
        return Matrix(D.nrows, D.ncols, tuple(self.lift_vector(c) for c in D.cols))

    def act(self, mono: Mono, i: int) -> Matrix:
        shift = self.algebra.mono_degree(mono)
        if shift == 0:
            return self.ring.identity_matrix(self.rank(i))
        return self.ring.zero_matrix(self.rank(i + shift), self.rank(i))

    @property
    def top(self) -> int | None:
        sup = self.complex.support
        return None if sup is None else sup[1]

    @property
    def bottom(self) -> int | None:
        sup = self.complex.support
        return 0 if sup is None else sup[0]


# -- Truncations --

class TruncatedModule(DGModule):
    """tau^{>=c} M (mode "ge") or tau^{<=c} M (mode "le")."""

    def __init__(self, module: DGModule, mode: str, degree: int, name: str | None = None) -> None:
        if mode not in ("ge", "le"):
            raise DomainError(f"unknown truncation mode {mode!r}")
        self.module = module
        self.mode = mode
        self.degree = degree
        self.algebra = module.algebra
        sym = ">=" if mode == "ge" else "<="
        self.name = name or f"tau{sym}{degree}({module.name or 'M'})"
        c = degree
        if mode == "ge":
            lo = module.valid_lo
            self.valid_lo = None if lo is None or lo <= c - 1 else max(lo, c + 1)
            self.valid_hi = module.valid_hi
        else:
            hi = module.valid_hi
            self.valid_lo = module.valid_lo
            self.valid_hi = None if hi is None or hi >= c + 1 else min(hi, c - 1)

    # cycles of M in degree c, used by tau^{<=c}

    @cached_property
    def _cycles(self) -> list[Vector]:
        M, c = self.module, self.degree
        C = Complex(M.ring, {c: M.rank(c), c + 1: M.rank(c + 1)}, {c: M.differential(c)},
                    {c + 1: M.relations(c + 1)})
        return C.cycles(c)

    @cached_property
    def _cycle_span(self) -> Submodule:
        M = self.module
        return Submodule(M.ring, M.rank(self.degree), self._cycles + M.relations(self.degree))

    @cached_property
    def _cycle_relations(self) -> list[Vector]:
        n = len(self._cycles)
        if not n:
            return []
        out = []
        for s in self._cycle_span.syzygies():
            r = self.ring.vnf(s[:n])
            if any(r):
                out.append(r)
        return out

    def cycle_matrix(self) -> Matrix:
        return Matrix(self.module.rank(self.degree), len(self._cycles), tuple(self._cycles))

    def _in_cycles(self, v: Sequence[PolyElement]) -> Vector:
        coeffs = self._cycle_span.lift(v)
        if coeffs is None:
            raise DomainError(f"vector is not a cycle in degree {self.degree}")
        return self.ring.vnf(coeffs[:len(self._cycles)])

    # -- Protocol --

    def rank(self, i: int) -> int:
        c = self.degree
        if self.mode == "ge":
            return self.module.rank(i) if i >= c else 0
        if i < c:
            return self.module.rank(i)
        return len(self._cycles) if i == c else 0

    def relations(self, i: int) -> list[Vector]:
        c, M = self.degree, self.module
        if self.mode == "ge":
            if i < c:
                return []
            rels = list(M.relations(i))
            if i == c:
                rels += list(M.differential(c - 1).cols)
            return rels
        if i < c:
            return M.relations(i)
        return self._cycle_relations if i == c else []

    def differential(self, i: int) -> Matrix:
        c, M = self.degree, self.module
        if self.mode == "ge":
            if i < c:
                return self.ring.zero_matrix(self.rank(i + 1), self.rank(i))
            return M.differential(i)
        if i < c - 1:
            return M.differential(i)
        if i == c - 1:
            D = M.differential(i)
            return Matrix(len(self._cycles), D.ncols, tuple(self._in_cycles(col) for col in D.cols))
        return self.ring.zero_matrix(self.rank(i + 1), self.rank(i))

    def act(self, mono: Mono, i: int) -> Matrix:
        c, M = self.degree, self.module
        shift = self.algebra.mono_degree(mono)
        zero = self.ring.zero_matrix(self.rank(i + shift), self.rank(i))
        if self.mode == "ge":
            return zero if i < c or i + shift < c else M.act(mono, i)
        if i > c:
            return zero
        if i < c:
            return M.act(mono, i)
        if shift == 0:
            return self.ring.identity_matrix(self.rank(i))
        return self.ring.compose(M.act(mono, c), self.cycle_matrix())

    @property
    def top(self) -> int | None:
        t = self.module.top
        if t is None:
            return None
        if self.mode == "ge":
            return t if t >= self.degree else None
        return min(t, self.degree)

    @property
    def bottom(self) -> int | None:
        b = self.module.bottom
        if self.mode == "ge":
            return self.degree if b is None else max(b, self.degree)
        return b

    def canonical_map(self) -> ModuleMap:
        """M -> tau^{>=c} M for mode "ge", tau^{<=c} M -> M for mode "le"."""
        ring, M, c = self.ring, self.module, self.degree
        if self.mode == "ge":
            def ge(i: int) -> Matrix:
                if i >= c:
                    return ring.identity_matrix(M.rank(i))
                return ring.zero_matrix(0, M.rank(i))
            return MatrixMap(M, self, ge)

        def le(i: int) -> Matrix:
            if i < c:
                return ring.identity_matrix(M.rank(i))
            if i == c:
                return self.cycle_matrix()
            return ring.zero_matrix(M.rank(i), 0)
        return MatrixMap(self, M, le)


# -- Maps of DG modules --

class ModuleMap:
    """A map of DG modules of fixed degree, semilinear along ``alg_map`` (None: same algebra)."""

    def __init__(self, source: DGModule, target: DGModule, degree: int = 0,
                 alg_map: DGAlgebraMap | None = None) -> None:
        if alg_map is None and source.algebra is not target.algebra:
            raise DomainError("modules over different algebras need an algebra map")
        if alg_map is not None and (alg_map.source is not source.algebra
                                    or alg_map.target is not target.algebra):
            raise DomainError("algebra map does not match the modules")
        self.source = source
        self.target = target
        self.degree = degree
        self.alg_map = alg_map
        self._mats: dict[int, Matrix] = {}

    @cached_property
    def ring_map(self) -> RingMap:
        if self.alg_map is None:
            return RingMap.identity(self.source.ring)
        return self.alg_map.ring_map

    def _compute(self, i: int) -> Matrix:
        raise NotImplementedError

    def matrix(self, i: int) -> Matrix:
        if i not in self._mats:
            F = self._compute(i)
            if F.ncols != self.source.rank(i) or F.nrows != self.target.rank(i + self.degree):
                raise DomainError(f"map in degree {i} has shape {F.nrows}x{F.ncols}")
            self._mats[i] = F
        return self._mats[i]

    def apply(self, i: int, v: Sequence[Any]) -> Vector:
        return self.target.ring.apply(self.matrix(i), self.ring_map.on_vector(v))

    def then(self, second: ModuleMap) -> ModuleMap:
        """second after self."""
        return ComposedMap(self, second)

    def scaled(self, c: Any) -> ModuleMap:
        return LinearCombination([self], [c])

    def minus(self, other: ModuleMap) -> ModuleMap:
        return LinearCombination([self, other], [1, -1])

    def flatten(self, lo: int, hi: int) -> ComplexMap:
        """The map on the pieces lo..hi of the source."""
        X = self.source.flatten(lo, hi)
        Y = self.target.flatten(lo + self.degree, hi + self.degree)
        return ComplexMap(X, Y, self.ring_map, {i: self.matrix(i) for i in range(lo, hi + 1)},
                          self.degree)

    def __repr__(self) -> str:
        return f"{type(self).__name__}({self.source!r} -> {self.target!r}, degree {self.degree})"


class MatrixMap(ModuleMap):
    """A map given degreewise by a function (or dict) of matrices."""

    def __init__(self, source: DGModule, target: DGModule,
                 matrices: Callable[[int], Matrix] | Mapping[int, Matrix], degree: int = 0,
                 alg_map: DGAlgebraMap | None = None) -> None:
        super().__init__(source, target, degree, alg_map)
        self._source_of = matrices

    def _compute(self, i: int) -> Matrix:
        if callable(self._source_of):
            return self._source_of(i)
        F = self._source_of.get(i)
        if F is None:
            return self.target.ring.zero_matrix(self.target.rank(i + self.degree),
                                                self.source.rank(i))
        return F


class ComposedMap(ModuleMap):
    def __init__(self, first: ModuleMap, second: ModuleMap) -> None:
        if first.target is not second.source:
            raise DomainError("module maps do not compose")
        if first.alg_map is None:
            alg = second.alg_map
        elif second.alg_map is None:
            alg = first.alg_map
        else:
            alg = second.alg_map.compose(first.alg_map)
        super().__init__(first.source, second.target, first.degree + second.degree, alg)
        self.first = first
        self.second = second

    def _compute(self, i: int) -> Matrix:
        F1 = self.first.matrix(i)
        F2 = self.second.matrix(i + self.first.degree)
        return self.target.ring.compose(F2, self.second.ring_map.on_matrix(F1))


class LinearCombination(ModuleMap):
    """sum_k c_k * f_k for parallel maps; coefficients live in the target ring."""

    def __init__(self, maps: Sequence[ModuleMap], coeffs: Sequence[Any]) -> None:
        f = maps[0]
        for g in maps[1:]:
            if g.source is not f.source or g.target is not f.target or g.degree != f.degree:
                raise DomainError("only parallel maps can be combined")
        super().__init__(f.source, f.target, f.degree, f.alg_map)
        self.maps = list(maps)
        self.coeffs = [f.target.ring(c) for c in coeffs]

    def _compute(self, i: int) -> Matrix:
        ring = self.target.ring
        out = ring.zero_matrix(self.target.rank(i + self.degree), self.source.rank(i))
        for f, c in zip(self.maps, self.coeffs):
            out = ring.madd(out, ring.mscale(c, f.matrix(i)))
        return out


def _act_image(target: DGModule, alg_map: DGAlgebraMap | None, mono: Mono,
               degree: int, shift: int) -> Matrix:
    """Multiplication on target piece ``degree`` by the image of a source monomial."""
    if alg_map is None:
        return target.act(mono, degree)
    return target.act_element(alg_map.on_mono(mono), degree, shift)


def evaluate_on(target: DGModule, alg_map: DGAlgebraMap | None, source: SemiFreeModule,
                values: Mapping[int, Vector] | Sequence[Vector], elem: ModElement,
                degree: int, map_degree: int = 0) -> Vector:
    """The image of a source element of the given degree under the map with these values."""
    ring = target.ring
    phi0 = alg_map.ring_map if alg_map is not None else None
    out = ring.vzero(target.rank(degree + map_degree))
    for (m, j), c in elem.items():
        shift = source.algebra.mono_degree(m)
        col = ring.apply(_act_image(target, alg_map, m, source.degrees[j] + map_degree, shift),
                         values[j])
        if (map_degree * shift) % 2:
            col = ring.vneg(col)
        coeff = phi0(c) if phi0 is not None else c
        out = ring.vadd(out, ring.vscale(coeff, col))
    return out


class ChainMap(ModuleMap):
    """A map out of a semi-free module, fixed by the images of the generators.

    ``values[j]`` lies in target piece d_j + degree; m*e_j goes to
    (-1)^(degree*|m|) iota(m) * values[j].
    """

    def __init__(self, source: SemiFreeModule, target: DGModule, values: Sequence[Sequence[Any]],
                 degree: int = 0, alg_map: DGAlgebraMap | None = None) -> None:
        super().__init__(source, target, degree, alg_map)
        if len(values) != source.ngens:
            raise DomainError(f"{len(values)} values for {source.ngens} generators")
        self.values = []
        for j, v in enumerate(values):
            n = target.rank(source.degrees[j] + degree)
            if len(v) != n:
                raise DomainError(f"value of {source.names[j]} has length {len(v)}, expected {n}")
            self.values.append(target.ring.vnf(v))

    def _compute(self, i: int) -> Matrix:
        P, N = self.source, self.target
        ring = N.ring
        cols = []
        for m, j in P.basis(i):
            shift = P.algebra.mono_degree(m)
            col = ring.apply(_act_image(N, self.alg_map, m, P.degrees[j] + self.degree, shift),
                             self.values[j])
            if (self.degree * shift) % 2:
                col = ring.vneg(col)
            cols.append(col)
        return Matrix(N.rank(i + self.degree), len(cols), tuple(cols))

    def failures(self, lo: int, hi: int) -> list[int]:
        """Degrees in [lo, hi] where the map fails to commute with d up to its sign."""
        return self.flatten(lo, hi).chain_failures()


class Homotopy(ChainMap):
    """A degree -1 map psi with phi0 - phi1 = d psi + psi d."""

    def __init__(self, source: SemiFreeModule, target: DGModule, values: Sequence[Sequence[Any]],
                 alg_map: DGAlgebraMap | None = None, degree: int = -1) -> None:
        super().__init__(source, target, values, degree, alg_map)

    def is_zero(self) -> bool:
        return all(not any(v) for v in self.values)


def generator_values(phi: ModuleMap) -> list[Vector]:
    """The images of the generators of a semi-free source."""
    P = phi.source
    if not isinstance(P, SemiFreeModule):
        raise DomainError("generator values need a semi-free source")
    out = []
    for j, d in enumerate(P.degrees):
        k = P.index(d)[(P.algebra.unit_mono, j)]
        out.append(phi.matrix(d).column(k))
    return out


def as_chain_map(phi: ModuleMap) -> ChainMap:
    if isinstance(phi, ChainMap):
        return phi
    return ChainMap(phi.source, phi.target, generator_values(phi), phi.degree, phi.alg_map)


# -- Hom --

class HomModule(DGModule):
    """Hom_A(P, N) for P semi-free over A and N a module over A' (via ``alg_map`` A -> A').

    Piece k is the product over generators e_j of N^{d_j + k}; the differential is
    d(phi) = D phi - (-1)^k phi d, and A' acts on values.
    """

    def __init__(self, source: SemiFreeModule, target: DGModule,
                 alg_map: DGAlgebraMap | None = None, name: str | None = None) -> None:
        if alg_map is None and source.algebra is not target.algebra:
            raise DomainError("Hom between modules over different algebras needs an algebra map")
        self.source = source
        self.target = target
        self.alg_map = alg_map
        self.algebra = target.algebra
        self.name = name or f"Hom({source.name or 'P'}, {target.name or 'N'})"
        degs = source.degrees
        lo = hi = None
        if degs:
            if target.valid_lo is not None:
                lo = target.valid_lo - min(degs)
            if target.valid_hi is not None:
                hi = target.valid_hi - max(degs)
            if source.complete_lo is not None:
                if target.bottom is None:
                    logger.info("Hom out of a truncated resolution into %s, unbounded below",
                                target.name)
                    raise WindowError("Hom out of a truncated resolution needs a target "
                                      "bounded below; truncate the target first")
                hi = _min_opt(hi, target.bottom - source.complete_lo)
        self.valid_lo = lo
        self.valid_hi = hi
        self._diff: dict[int, Matrix] = {}

    def blocks(self, k: int) -> list[tuple[int, int]]:
        """(offset, size) of the block of each generator in piece k."""
        out = []
        off = 0
        for d in self.source.degrees:
            n = self.target.rank(d + k)
            out.append((off, n))
            off += n
        return out

    def rank(self, k: int) -> int:
        return sum(self.target.rank(d + k) for d in self.source.degrees)

    def relations(self, k: int) -> list[Vector]:
        total = self.rank(k)
        ring = self.ring
        out = []
        for (off, n), d in zip(self.blocks(k), self.source.degrees):
            for r in self.target.relations(d + k):
                v = list(ring.vzero(total))
                v[off:off + n] = r
                out.append(tuple(v))
        return out

    def differential(self, k: int) -> Matrix:
        if k in self._diff:
            return self._diff[k]
        P, N = self.source, self.target
        ring = self.ring
        ngens = P.ngens
        grid: list[list[Matrix | None]] = [[None] * ngens for _ in range(ngens)]
        phi0 = self.alg_map.ring_map if self.alg_map is not None else None
        outer = -1 if k % 2 else 1
        for jp in range(ngens):
            dp = P.degrees[jp]
            grid[jp][jp] = N.differential(dp + k)
            for (a, j), c in P.dgens[jp].items():
                shift = P.algebra.mono_degree(a)
                sign = -outer * (-1 if (k * shift) % 2 else 1)
                coeff = phi0(c) if phi0 is not None else c
                blk = ring.mscale(ring.mul(ring.const(sign), coeff),
                                  _act_image(N, self.alg_map, a, P.degrees[j] + k, shift))
                grid[jp][j] = blk if grid[jp][j] is None else ring.madd(grid[jp][j], blk)
        rows = [N.rank(d + k + 1) for d in P.degrees]
        cols = [N.rank(d + k) for d in P.degrees]
        D = ring.block(grid, rows, cols)
        self._diff[k] = D
        return D

    def act(self, mono: Mono, k: int) -> Matrix:
        P, N = self.source, self.target
        shift = self.algebra.mono_degree(mono)
        n = P.ngens
        grid: list[list[Matrix | None]] = [[None] * n for _ in range(n)]
        for j, d in enumerate(P.degrees):
            grid[j][j] = N.act(mono, d + k)
        return self.ring.block(grid, [N.rank(d + k + shift) for d in P.degrees],
                               [N.rank(d + k) for d in P.degrees])

    @property
    def top(self) -> int | None:
        degs = self.source.degrees
        if not degs or self.target.top is None:
            return None
        return self.target.top - min(degs)

    @property
    def bottom(self) -> int | None:
        degs = self.source.degrees
        if not degs or self.target.top is None:
            return 0
        if self.target.bottom is None:
            return None
        return self.target.bottom - max(degs)

    # -- Elements as maps --

    def values(self, v: Sequence[Any], k: int) -> list[Vector]:
        return [tuple(v[off:off + n]) for off, n in self.blocks(k)]

    def from_values(self, values: Sequence[Sequence[Any]], k: int) -> Vector:
        out: list[PolyElement] = []
        for v in values:
            out.extend(v)
        if len(out) != self.rank(k):
            raise DomainError("values do not fit the Hom piece")
        return self.ring.vnf(out)

    def as_map(self, v: Sequence[Any], k: int) -> ChainMap:
        return ChainMap(self.source, self.target, self.values(v, k), k, self.alg_map)

    def vector_of(self, phi: ModuleMap) -> Vector:
        if phi.source is not self.source or phi.target is not self.target:
            raise DomainError("map does not belong to this Hom module")
        return self.from_values(generator_values(phi), phi.degree)

    def is_cocycle(self, v: Sequence[Any], k: int) -> bool:
        d = self.ring.apply(self.differential(k), v)
        return _vanishes(self, k + 1, d)


def _vanishes(module: DGModule, i: int, v: Sequence[Any]) -> bool:
    """Whether v vanishes in piece i of the module."""
    return Submodule(module.ring, module.rank(i), module.relations(i)).contains(v)


def homotopy_solve(phi0: ModuleMap, phi1: ModuleMap) -> Homotopy | None:
    """psi with phi0 - phi1 = d psi + psi d, or None when the maps are not homotopic."""
    if phi0.source is not phi1.source or phi0.target is not phi1.target \
            or phi0.degree != phi1.degree or phi0.alg_map is not phi1.alg_map:
        raise DomainError("homotopies need parallel maps")
    P = phi0.source
    if not isinstance(P, SemiFreeModule):
        raise DomainError("homotopy solving needs a semi-free source")
    H = HomModule(P, phi0.target, phi0.alg_map)
    k = phi0.degree
    for i in (k - 1, k):
        if not H.is_genuine(i):
            raise WindowError(f"Hom piece {i} is outside the computed window", degree=i,
                              window=(H.valid_lo, H.valid_hi))
    ring = H.ring
    diff = ring.vsub(H.vector_of(phi0), H.vector_of(phi1))
    D = H.differential(k - 1)
    if not any(diff):
        sol: list[PolyElement] = list(ring.vzero(D.ncols))
    else:
        coeffs = Submodule(ring, H.rank(k), list(D.cols) + H.relations(k)).lift(diff)
        if coeffs is None:
            logger.debug("no homotopy between the maps on %s", P.name)
            return None
        sol = coeffs[:D.ncols]
    return Homotopy(P, phi0.target, H.values(sol, k - 1), phi0.alg_map, k - 1)


# -- Tensor products --

class TensorModule(SemiFreeModule):
    """P (x)_A Q over X (x)_A Y, on generators e_j (x) f_k in lexicographic order."""

    def __init__(self, first: SemiFreeModule, second: SemiFreeModule, tensor: TensorAlgebra,
                 name: str | None = None) -> None:
        P, Q = first, second
        if tensor.first.source is not P.algebra or tensor.second.source is not Q.algebra:
            raise DomainError("tensor algebra does not match the factors")
        zero = tensor.algebra.ring.zero
        pairs = [(j, k) for j in range(P.ngens) for k in range(Q.ngens)]
        index = {pk: n for n, pk in enumerate(pairs)}
        degrees = [P.degrees[j] + Q.degrees[k] for j, k in pairs]
        diffs = []
        for j, k in pairs:
            out: dict[Key, PolyElement] = {}
            for (a, l), c in P.dgens[j].items():
                for m, coeff in tensor.first({a: c}).items():
                    key = (m, index[(l, k)])
                    out[key] = out.get(key, zero) + coeff
            for (b, l), c in Q.dgens[k].items():
                odd = (P.degrees[j] + Q.algebra.mono_degree(b) * P.degrees[j]) % 2
                for m, coeff in tensor.second({b: c}).items():
                    key = (m, index[(j, l)])
                    out[key] = out.get(key, zero) + (-coeff if odd else coeff)
            diffs.append(out)
        lows = []
        if P.complete_lo is not None and Q.degrees:
            lows.append(P.complete_lo + max(Q.degrees))
        if Q.complete_lo is not None and P.degrees:
            lows.append(Q.complete_lo + max(P.degrees))
        names = [f"{P.names[j]}.{Q.names[k]}" for j, k in pairs]
        super().__init__(tensor.algebra, degrees, diffs, names,
                         max(lows) if lows else None, name)
        self.first = P
        self.second = Q
        self.tensor = tensor
        self.pairs = pairs
        self.pair_index = index

    def tensor_elements(self, x: ModElement, y: ModElement) -> ModElement:
        """(a e_j) (x) (b f_k) = (-1)^(|b| d_j) (a (x) b)(e_j (x) f_k)."""
        alg = self.algebra
        out: ModElement = {}
        for (a, j), c1 in x.items():
            left = self.tensor.first({a: c1})
            for (b, k), c2 in y.items():
                prod = alg.mul(left, self.tensor.second({b: c2}))
                odd = (self.second.algebra.mono_degree(b) * self.first.degrees[j]) % 2
                n = self.pair_index[(j, k)]
                for m, coeff in prod.items():
                    out[(m, n)] = out.get((m, n), alg.ring.zero) + (-coeff if odd else coeff)
        return self._clean(out)


def tensor_modules(first: SemiFreeModule, second: SemiFreeModule, tensor: TensorAlgebra,
                   name: str | None = None) -> TensorModule:
    return TensorModule(first, second, tensor, name)


def tensor_chain_maps(f: ChainMap, g: ChainMap, source: TensorModule, target: TensorModule,
                      alg_map: DGAlgebraMap) -> ChainMap:
    """f (x) g : P (x) Q -> P' (x) Q' with (f (x) g)(x (x) y) = (-1)^(|g||x|) f(x) (x) g(y)."""
    if f.source is not source.first or g.source is not source.second \
            or f.target is not target.first or g.target is not target.second:
        raise DomainError("factor maps do not match the tensor modules")
    values = []
    for j, k in source.pairs:
        dj, dk = source.first.degrees[j], source.second.degrees[k]
        x = target.first.element(f.values[j], dj + f.degree)
        y = target.second.element(g.values[k], dk + g.degree)
        elem = target.tensor_elements(x, y)
        if (g.degree * dj) % 2:
            elem = {key: -c for key, c in elem.items()}
        values.append(target.vector(elem, dj + dk + f.degree + g.degree))
    return ChainMap(source, target, values, f.degree + g.degree, alg_map)


# -- Lifting along surjective quasi-isomorphisms --

def lift_chain_map(source: SemiFreeModule, target: DGModule, through: ModuleMap,
                   along: ModuleMap, alg_map: DGAlgebraMap | None = None,
                   prescribed: Mapping[int, Sequence[Any]] | None = None) -> ChainMap:
    """g : source -> target with through o g = along, built generator by generator.

    ``through`` : target -> Y is a surjective quasi-isomorphism over target's
    algebra; ``along`` : source -> Y is semilinear along ``alg_map``.
    """
    if through.source is not target or along.source is not source \
            or along.target is not through.target or through.alg_map is not None:
        raise DomainError("lifting data do not fit together")
    Y = through.target
    ring = target.ring
    prescribed = prescribed or {}
    values: list[Vector] = []
    unit = source.algebra.unit_mono
    for j, d in enumerate(source.degrees):
        if j in prescribed:
            values.append(ring.vnf(prescribed[j]))
            continue
        top = evaluate_on(target, alg_map, source, values, source.dgens[j], d + 1)
        bottom = along.matrix(d).column(source.index(d)[(unit, j)])
        n, m1, m2 = target.rank(d), target.rank(d + 1), Y.rank(d)
        D, pi = target.differential(d), through.matrix(d)
        cols = [tuple(D.column(t)) + tuple(pi.column(t)) for t in range(n)]
        cols += [tuple(r) + ring.vzero(m2) for r in target.relations(d + 1)]
        cols += [ring.vzero(m1) + tuple(s) for s in Y.relations(d)]
        rhs = tuple(top) + tuple(bottom)
        if not any(rhs):
            values.append(ring.vzero(n))
            continue
        sol = Submodule(ring, m1 + m2, cols).lift(rhs) if cols else None
        if sol is None:
            logger.info("lift fails at generator %s of degree %d", source.names[j], d)
            raise LiftError(f"no lift for generator {source.names[j]} in degree {d}")
        values.append(ring.vnf(sol[:n]))
    return ChainMap(source, target, values, 0, alg_map)


# -- Restriction of scalars --

@dataclass
class AlgebraExtension:
    """A DG algebra map base -> big over which big is semi-free.

    kind "variables": big has the same degree-0 ring and extra graded variables
    appended after those of base. kind "finite": both are rings (no graded
    variables), base has no variables and big is finite over it.
    """

    base: DGAlgebra
    big: DGAlgebra
    kind: str
    inclusion: DGAlgebraMap

    @classmethod
    def by_variables(cls, base: DGAlgebra, big: DGAlgebra) -> AlgebraExtension:
        if big.ring is not base.ring:
            raise DomainError("a variable extension keeps the degree-0 ring")
        head = [(v.name, v.degree) for v in big.variables[:base.nvars]]
        if head != [(v.name, v.degree) for v in base.variables]:
            raise DomainError(f"{big} does not extend the graded variables of {base}")
        inc = DGAlgebraMap(base, big, RingMap.identity(base.ring),
                           [big.var(v.name) for v in base.variables])
        return cls(base, big, "variables", inc)

    @classmethod
    def finite(cls, phi: RingMap) -> AlgebraExtension:
        K, C = phi.source, phi.target
        if K.nvars or K.ideal_gens:
            raise UnsupportedRingError("finite restriction needs a base ring without variables")
        if C.monomial_basis is None:
            raise UnsupportedRingError(f"{C} is not finite over {K}")
        base, big = trivial_algebra(K), trivial_algebra(C)
        return cls(base, big, "finite", DGAlgebraMap(base, big, phi, []))

    @cached_property
    def extra_exterior(self) -> bool:
        return all(v.exterior for v in self.big.variables[self.base.nvars:])


class RestrictedModule(SemiFreeModule):
    """A semi-free module over ``ext.big`` viewed as a semi-free module over ``ext.base``.

    Generators are labels (beta, j): an extra monomial (kind "variables") or a
    basis index (kind "finite") times a generator e_j of the parent.
    """

    def __init__(self, parent: SemiFreeModule, ext: AlgebraExtension, lo: int | None = None,
                 name: str | None = None) -> None:
        if parent.algebra is not ext.big:
            raise DomainError("module does not live over the big algebra")
        self.parent = parent
        self.ext = ext
        labels: list[tuple[Any, int]] = []
        if ext.kind == "variables":
            big, nb = ext.big, ext.base.nvars
            if not ext.extra_exterior and lo is None:
                raise WindowError("restricting along even variables needs a lower degree")
            floor = sum(v.degree for v in big.variables[nb:]) if ext.extra_exterior else None
            for j, d in enumerate(parent.degrees):
                e = 0
                while (floor is None or e >= floor) and (lo is None or e + d >= lo):
                    for m in big.monomials(e):
                        if not any(m[:nb]):
                            labels.append((m, j))
                    e -= 1
            degree_of = {lab: big.mono_degree(lab[0]) + parent.degrees[lab[1]] for lab in labels}
        else:
            basis = ext.big.ring.monomial_basis
            labels = [(b, j) for j in range(parent.ngens) for b in range(len(basis))]
            degree_of = {lab: parent.degrees[lab[1]] for lab in labels}
        labels.sort(key=lambda lab: -degree_of[lab])
        self.labels = labels
        self.label_index = {lab: n for n, lab in enumerate(labels)}
        diffs = [self._restricted_d(lab) for lab in labels]
        names = [self._label_name(lab) for lab in labels]
        complete = _max_opt(parent.complete_lo, lo if ext.kind == "variables"
                            and not ext.extra_exterior else None)
        if ext.kind == "variables" and ext.extra_exterior:
            complete = parent.complete_lo
        super().__init__(ext.base, [degree_of[lab] for lab in labels], diffs, names,
                         complete, name or parent.name)
        if ext.kind == "finite" and ext.big.ring.regime == "zz-finite":
            self._torsion = [tuple(w) for w in ext.big.ring.lattice.basis]
        else:
            self._torsion = []

    def _label_name(self, lab: tuple[Any, int]) -> str:
        beta, j = lab
        if self.ext.kind == "variables":
            mono = self.ext.big.mono_str(beta)
            return f"{mono}*{self.parent.names[j]}" if mono else self.parent.names[j]
        return f"b{beta}*{self.parent.names[j]}"

    def _restricted_d(self, lab: tuple[Any, int]) -> dict[Key, Any]:
        ext, P = self.ext, self.parent
        beta, j = lab
        out: dict[Key, Any] = {}
        if ext.kind == "variables":
            nb = ext.base.nvars
            image = P.d_element({(beta, j): P.ring.one})
            for (m, l), c in image.items():
                head, tail = m[:nb], (0,) * nb + m[nb:]
                key = (head, self.label_index[(tail, l)])
                out[key] = out.get(key, P.ring.zero) + c
            return out
        C, K = ext.big.ring, ext.base.ring
        basis = C.monomial_basis
        b = C.normal_form(C.poly.from_dict({basis[beta]: C.base.domain.one}))
        for ((), l), c in P.dgens[j].items():
            for n, x in enumerate(C.coordinates(C.mul(c, b))):
                if x:
                    key = ((), self.label_index[(n, l)])
                    out[key] = out.get(key, K.zero) + K.const(x)
        return out

    def relations(self, i: int) -> list[Vector]:
        if not self._torsion:
            return []
        n = self.rank(i)
        out = []
        idx = self.index(i)
        for (m, g) in self.basis(i):
            b, j = self.labels[g]
            if b != 0:
                continue
            for w in self._torsion:
                v = [self.ring.zero] * n
                for t, x in enumerate(w):
                    v[idx[((), self.label_index[(t, j)])]] = self.ring.const(x)
                out.append(tuple(v))
        return out

    # -- Moving vectors between the parent and the restriction --

    def restrict_vector(self, v: Sequence[Any], i: int) -> Vector:
        """A parent vector in degree i written on the restricted basis."""
        ext, P = self.ext, self.parent
        out: dict[Key, Any] = {}
        if ext.kind == "variables":
            nb = ext.base.nvars
            for (m, j), c in zip(P.basis(i), v):
                if c:
                    key = (m[:nb], self.label_index[((0,) * nb + m[nb:], j)])
                    out[key] = c
            return self.vector(out, i)
        C, K = ext.big.ring, ext.base.ring
        for ((), j), c in zip(P.basis(i), v):
            for n, x in enumerate(C.coordinates(c)):
                if x:
                    out[((), self.label_index[(n, j)])] = K.const(x)
        return self.vector(out, i)

    def extend_vector(self, w: Sequence[Any], i: int) -> Vector:
        """The inverse of restrict_vector."""
        ext, P = self.ext, self.parent
        elem: ModElement = {}
        if ext.kind == "variables":
            for (head, g), c in zip(self.basis(i), w):
                if c:
                    tail, j = self.labels[g]
                    m = tuple(h + t for h, t in zip(head + (0,) * (len(tail) - len(head)), tail))
                    elem[(m, j)] = c
            return P.vector(elem, i)
        C = ext.big.ring
        basis = C.monomial_basis
        acc: dict[int, PolyElement] = {}
        for ((), g), c in zip(self.basis(i), w):
            if c:
                n, j = self.labels[g]
                val = ext.base.ring.constant_value(c)
                term = C.poly.from_dict({basis[n]: C.base.convert(val)})
                acc[j] = acc.get(j, C.zero) + term
        return P.vector({(P.algebra.unit_mono, j): C.normal_form(c) for j, c in acc.items()}, i)


def restrict_module(module: SemiFreeModule, ext: AlgebraExtension,
                    lo: int | None = None) -> RestrictedModule:
    return RestrictedModule(module, ext, lo)


# -- Maps between Hom modules and truncations --

class PreComposition(ModuleMap):
    """phi -> phi o g : Hom(P', N) -> Hom(P, N) for a chain map g : P -> P'."""

    def __init__(self, g: ChainMap, source: HomModule, target: HomModule) -> None:
        if source.source is not g.target or target.source is not g.source \
                or target.target is not source.target:
            raise DomainError("Hom modules do not match the precomposed map")
        super().__init__(source, target, 0, None)
        self.g = g

    def _compute(self, k: int) -> Matrix:
        g, src = self.g, self.source
        P, Pp, N = g.source, g.target, src.target
        ring = N.ring
        beta = src.alg_map
        beta0 = beta.ring_map if beta is not None else None
        grid: list[list[Matrix | None]] = [[None] * Pp.ngens for _ in range(P.ngens)]
        for j, d in enumerate(P.degrees):
            image = Pp.element(g.values[j], d + g.degree)
            for (m, jp), c in image.items():
                shift = Pp.algebra.mono_degree(m)
                coeff = beta0(c) if beta0 is not None else c
                if (k * shift) % 2:
                    coeff = -coeff
                blk = ring.mscale(coeff, _act_image(N, beta, m, Pp.degrees[jp] + k, shift))
                grid[j][jp] = blk if grid[j][jp] is None else ring.madd(grid[j][jp], blk)
        return ring.block(grid, [N.rank(d + k) for d in P.degrees],
                          [N.rank(d + k) for d in Pp.degrees])


class PostComposition(ModuleMap):
    """phi -> h o phi : Hom(P, N) -> Hom(P, N') for a degree-0 map h : N -> N'."""

    def __init__(self, h: ModuleMap, source: HomModule, target: HomModule) -> None:
        if source.source is not target.source or h.source is not source.target \
                or h.target is not target.target or h.degree:
            raise DomainError("Hom modules do not match the postcomposed map")
        super().__init__(source, target, 0, h.alg_map)
        self.h = h

    def _compute(self, k: int) -> Matrix:
        P = self.source.source
        n = P.ngens
        grid: list[list[Matrix | None]] = [[None] * n for _ in range(n)]
        for j, d in enumerate(P.degrees):
            grid[j][j] = self.h.matrix(d + k)
        return self.target.ring.block(grid, [self.target.target.rank(d + k) for d in P.degrees],
                                      [self.source.target.rank(d + k) for d in P.degrees])


def truncated_map(phi: ModuleMap, source: TruncatedModule, target: TruncatedModule) -> ModuleMap:
    """The map tau^{>=c} X -> tau^{>=c} Y induced by phi : X -> Y."""
    if source.mode != "ge" or target.mode != "ge" or source.degree != target.degree:
        raise DomainError("induced maps are only formed between equal >= truncations")
    if phi.source is not source.module or phi.target is not target.module or phi.degree:
        raise DomainError("map does not connect the truncated modules")
    c = source.degree
    ring = target.ring

    def matrices(i: int) -> Matrix:
        if i < c:
            return ring.zero_matrix(0, 0)
        return phi.matrix(i)
    return MatrixMap(source, target, matrices, 0, phi.alg_map)


def regular_module(algebra: DGAlgebra) -> SemiFreeModule:
    """The algebra as a module over itself, on one generator of degree 0."""
    return memo_on(algebra, "regular_module",
                   lambda: SemiFreeModule(algebra, [0], [{}], ["1"], name=str(algebra)))


def element_vector(algebra: DGAlgebra, a: Element, degree: int) -> Vector:
    return regular_module(algebra).vector({(m, 0): c for m, c in a.items()}, degree)


def vector_element(algebra: DGAlgebra, v: Sequence[Any], degree: int) -> Element:
    return {m: c for (m, _), c in regular_module(algebra).element(v, degree).items()}
