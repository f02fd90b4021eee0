"""Presented commutative rings, ring maps, submodules and finitely presented modules.

Two arithmetic regimes are supported:

* field regime: base QQ or GF(p); K[x]/I with a reduced Groebner basis pinned at
  construction. Submodule questions go through the module Groebner engine with
  an elimination (augmented) basis.
* ZZ-finite regime: base ZZ and every variable has a monic univariate relation,
  so the ring is a finite free ZZ-module modulo a lattice. Submodule questions
  become integer linear algebra.

Ring elements are sympy ``PolyElement`` objects, always kept in normal form.
Vectors of a free module R^r are tuples of ring elements; a ``Matrix`` stores
its columns.
"""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field
from functools import cached_property
from typing import Any, Iterable, Sequence

from sympy import Symbol
from sympy.parsing.sympy_parser import convert_xor, parse_expr, standard_transformations
from sympy.polys.rings import PolyElement, PolyRing

from py_rigidsq import groebner as gb
from py_rigidsq.errors import DomainError, UnsupportedRingError
from py_rigidsq.exactlin import (
    BaseRing, ExactMatrix, Lattice, ZZ_BASE, kernel_basis, smith_normal_form, solve_linear,
)

logger = logging.getLogger(__name__)

Vector = tuple[PolyElement, ...]

_TRANSFORMS = standard_transformations + (convert_xor,)


@dataclass(frozen=True)
class Matrix:
    """An R-linear map R^ncols -> R^nrows, stored column by column."""

    nrows: int
    ncols: int
    cols: tuple[Vector, ...]

    def column(self, j: int) -> Vector:
        return self.cols[j]

    def entry(self, i: int, j: int) -> PolyElement:
        return self.cols[j][i]

    def is_zero(self) -> bool:
        return all(not a for c in self.cols for a in c)


@dataclass(frozen=True)
class LocalizationData:
    parent: "PresentedRing"
    element: PolyElement
    variable: str


class PresentedRing:
    """K[x1..xk]/I, optionally a localization R[s^-1] realized by t*s - 1."""

    def __init__(self, base: BaseRing, variables: Sequence[str],
                 ideal: Iterable[Any] = (), order: gb.MonomialOrder | str | None = None,
                 name: str | None = None,
                 localization: LocalizationData | None = None) -> None:
        names = tuple(variables)
        if len(set(names)) != len(names):
            raise DomainError(f"repeated variable names in {names}")
        self.base = base
        self.variables = names
        self.nvars = len(names)
        if order is None:
            order = gb.MonomialOrder.grevlex(self.nvars)
        elif isinstance(order, str):
            order = gb.MonomialOrder.named(order, self.nvars)
        if order.nvars != self.nvars:
            raise DomainError(f"order on {order.nvars} variables for a ring on {self.nvars}")
        self.order = order
        self.poly = PolyRing([Symbol(v) for v in names], base.domain)
        self.zero_monom = (0,) * self.nvars
        self.localization = localization
        self._engine = gb.Engine(base.domain, order)
        self.ideal_gens = tuple(g for g in (self._raw(x) for x in ideal) if g)
        self.name = name
        if base.is_field:
            self.regime = "field"
            self._setup_field()
        else:
            self._setup_integral()
        logger.debug("ring %s: regime %s", self, self.regime)

    # -- Construction helpers --

    def _raw(self, value: Any) -> PolyElement:
        """Convert without normal form."""
        if isinstance(value, PolyElement):
            if value.ring == self.poly:
                return value
            if set(str(s) for s in value.ring.symbols) <= set(self.variables):
                return self.poly.from_expr(value.as_expr()) if value else self.poly.zero
            raise DomainError(f"element {value} has variables outside {self.variables}")
        if isinstance(value, str):
            local = {v: Symbol(v) for v in self.variables}
            try:
                expr = parse_expr(value, local_dict=local, transformations=_TRANSFORMS)
            except Exception as exc:
                raise DomainError(f"malformed polynomial {value!r}") from exc
            value = expr
        try:
            if hasattr(value, "free_symbols"):
                extra = {str(s) for s in value.free_symbols} - set(self.variables)
                if extra:
                    raise DomainError(f"unknown variables {sorted(extra)} in {value}")
                return self.poly.from_expr(value)
            return self.poly.ground_new(self.base.convert(value))
        except DomainError:
            raise
        except Exception as exc:
            raise DomainError(f"{value!r} is not an element of {self}") from exc

    def _to_vec(self, f: PolyElement, comp: int = 0) -> gb.Vector:
        return {(comp, m): c for m, c in f.items()}

    def _from_vec(self, v: gb.Vector, comp: int = 0) -> PolyElement:
        return self.poly.from_dict({m: c for (k, m), c in v.items() if k == comp})

    def _setup_field(self) -> None:
        basis = gb.buchberger([self._to_vec(g) for g in self.ideal_gens],
                              self.base.domain, self.order, ideal=True)
        self._gb_vectors = basis
        self._gb_leads = [self._engine.lead(v) for v in basis]
        self.groebner_basis = tuple(self._from_vec(v) for v in basis)

    def _setup_integral(self) -> None:
        monic: dict[int, PolyElement] = {}
        for g in self.ideal_gens:
            used = [i for i in range(self.nvars) if any(m[i] for m in g.keys())]
            if len(used) != 1:
                continue
            i = used[0]
            deg = max(m[i] for m in g.keys())
            lc = g.get(tuple(deg if k == i else 0 for k in range(self.nvars)))
            if lc in (1, -1) and (i not in monic or deg < max(m[i] for m in monic[i].keys())):
                monic[i] = g * lc
        self.groebner_basis = ()
        if self.nvars == 0 or len(monic) == self.nvars:
            self.regime = "zz-finite"
            self._monic = [monic[i] for i in range(self.nvars)]
            degrees = [max(m[i] for m in self._monic[i].keys()) for i in range(self.nvars)]
            self.zz_basis = [tuple(e) for e in itertools.product(*[range(d) for d in degrees])]
            self._zz_index = {m: k for k, m in enumerate(self.zz_basis)}
            self._monic_vecs = [self._to_vec(p) for p in self._monic]
            self._monic_leads = [self._engine.lead(v) for v in self._monic_vecs]
            span = []
            for g in self.ideal_gens:
                for b in self.zz_basis:
                    shifted = self.poly.from_dict({gb.monomial_mul(m, b): c for m, c in g.items()})
                    span.append(self._zz_coords(self._monic_reduce(shifted)))
            self.lattice = Lattice.spanned_by(len(self.zz_basis), span)
            return
        if self.ideal_gens:
            raise UnsupportedRingError(
                f"ZZ-algebra {self.variables} is neither free nor module-finite "
                "(every variable needs a monic relation)")
        self.regime = "zz-free"

    def _monic_reduce(self, f: PolyElement) -> PolyElement:
        if not self.nvars:
            return f
        rem = self._engine.reduce(self._to_vec(f), self._monic_vecs, self._monic_leads)
        return self._from_vec(rem)

    def _zz_coords(self, f: PolyElement) -> list[int]:
        out = [0] * len(self.zz_basis)
        for m, c in f.items():
            out[self._zz_index[m]] = int(c)
        return out

    def _from_zz_coords(self, coords: Sequence[int]) -> PolyElement:
        return self.poly.from_dict({self.zz_basis[k]: c for k, c in enumerate(coords) if c})

    @property
    def monic_relations(self) -> dict[str, PolyElement]:
        """ZZ-finite rings: the monic relation chosen for each variable."""
        if self.regime != "zz-finite":
            return {}
        return dict(zip(self.variables, self._monic))

    # -- Basic arithmetic --

    def normal_form(self, f: Any) -> PolyElement:
        """Canonical representative of f modulo the ideal."""
        f = self._raw(f)
        if not f:
            return f
        if self.regime == "field":
            if not self._gb_vectors:
                return f
            rem = self._engine.reduce(self._to_vec(f), self._gb_vectors, self._gb_leads)
            return self._from_vec(rem)
        if self.regime == "zz-finite":
            red = self._zz_coords(self._monic_reduce(f))
            return self._from_zz_coords(self.lattice.reduce(red))
        return f

    def __call__(self, value: Any) -> PolyElement:
        return self.normal_form(value)

    @property
    def zero(self) -> PolyElement:
        return self.poly.zero

    @cached_property
    def one(self) -> PolyElement:
        return self.normal_form(self.poly.one)

    @cached_property
    def gens(self) -> tuple[PolyElement, ...]:
        return tuple(self.normal_form(g) for g in self.poly.gens)

    def var(self, name: str) -> PolyElement:
        try:
            return self.gens[self.variables.index(name)]
        except ValueError:
            raise DomainError(f"{name!r} is not a variable of {self}") from None

    def const(self, value: Any) -> PolyElement:
        return self.normal_form(self.poly.ground_new(self.base.convert(value)))

    def add(self, a: PolyElement, b: PolyElement) -> PolyElement:
        return self.normal_form(a + b)

    def sub(self, a: PolyElement, b: PolyElement) -> PolyElement:
        return self.normal_form(a - b)

    def mul(self, a: PolyElement, b: PolyElement) -> PolyElement:
        if not a or not b:
            return self.poly.zero
        return self.normal_form(a * b)

    def power(self, a: PolyElement, e: int) -> PolyElement:
        out = self.one
        for _ in range(e):
            out = self.mul(out, a)
        return out

    def is_zero(self, a: Any) -> bool:
        return not self.normal_form(a)

    @cached_property
    def is_zero_ring(self) -> bool:
        return not self.one

    def constant_value(self, a: PolyElement) -> Any | None:
        """The base-ring value of a constant element, else None."""
        if not a:
            return self.base.domain.zero
        if len(a) == 1 and self.zero_monom in a:
            return a[self.zero_monom]
        return None

    def is_constant_unit(self, a: PolyElement) -> bool:
        c = self.constant_value(a)
        if c is None or not c:
            return False
        return self.base.is_field or c in (1, -1)

    def inverse(self, a: PolyElement) -> PolyElement | None:
        """Multiplicative inverse of a, or None if a is not a unit."""
        c = self.constant_value(a)
        if c is not None and c and self.is_constant_unit(a):
            return self.const(self.base.domain.quo(self.base.domain.one, c)
                              if self.base.is_field else c)
        sub = Submodule(self, 1, [(a,)])
        coeffs = sub.lift((self.one,))
        return None if coeffs is None else coeffs[0]

    def to_str(self, a: PolyElement) -> str:
        if not a:
            return "0"
        return str(a.as_expr()).replace("**", "^")

    # -- Finite dimension --

    @cached_property
    def monomial_basis(self) -> list[tuple[int, ...]] | None:
        """Standard monomials when the ring is finite over its base, else None."""
        if self.regime == "zz-finite":
            return list(self.zz_basis)
        if self.regime == "zz-free":
            return [()] if self.nvars == 0 else None
        return gb.standard_monomials([lt[1] for lt in self._gb_leads], self.nvars)

    def dimension(self) -> int | None:
        """Rank over the base (K-dimension or ZZ-rank of the free basis), or None."""
        basis = self.monomial_basis
        if basis is None:
            return None
        if self.regime == "zz-finite":
            S = self.lattice_invariants()
            return S[1]
        return len(basis)

    def lattice_invariants(self) -> tuple[list[int], int]:
        """ZZ-finite rings: (torsion invariant factors, free rank) of the additive group."""
        if self.regime != "zz-finite":
            raise DomainError("lattice invariants need a ZZ-finite ring")
        n = len(self.zz_basis)
        if self.lattice.rank == 0:
            return [], n
        M = ExactMatrix.from_columns(ZZ_BASE, self.lattice.basis, n)
        S, _, _ = smith_normal_form(M)
        factors = [int(d) for d in S.diagonal() if d and d != 1]
        return factors, n - self.lattice.rank

    def coordinates(self, a: PolyElement) -> list[Any]:
        """Coefficients of a on ``monomial_basis``."""
        basis = self.monomial_basis
        if basis is None:
            raise DomainError(f"{self} is not finite over {self.base}")
        a = self.normal_form(a)
        zero = self.base.domain.zero
        return [a.get(m, zero) for m in basis]

    def from_coordinates(self, coords: Sequence[Any]) -> PolyElement:
        basis = self.monomial_basis
        return self.normal_form(self.poly.from_dict(
            {m: self.base.convert(c) for m, c in zip(basis, coords) if c}))

    def multiplication_matrix(self, a: PolyElement) -> ExactMatrix:
        basis = self.monomial_basis
        if basis is None:
            raise DomainError(f"{self} is not finite over {self.base}")
        cols = []
        for m in basis:
            mono = self.poly.from_dict({m: self.base.domain.one})
            cols.append(self.coordinates(self.mul(a, mono)))
        return ExactMatrix.from_columns(self.base, cols, len(basis))

    # -- Vectors and matrices --

    def vzero(self, n: int) -> Vector:
        return tuple(self.poly.zero for _ in range(n))

    def unit_vector(self, n: int, k: int) -> Vector:
        return tuple(self.one if i == k else self.poly.zero for i in range(n))

    def vnf(self, v: Sequence[Any]) -> Vector:
        return tuple(self.normal_form(a) for a in v)

    def vadd(self, u: Vector, v: Vector) -> Vector:
        return tuple(self.normal_form(a + b) for a, b in zip(u, v))

    def vsub(self, u: Vector, v: Vector) -> Vector:
        return tuple(self.normal_form(a - b) for a, b in zip(u, v))

    def vscale(self, c: PolyElement, v: Vector) -> Vector:
        if not c:
            return self.vzero(len(v))
        return tuple(self.mul(c, a) for a in v)

    def vneg(self, v: Vector) -> Vector:
        return tuple(-a for a in v)

    def matrix(self, nrows: int, ncols: int, cols: Iterable[Sequence[Any]]) -> Matrix:
        data = tuple(self.vnf(c) for c in cols)
        if len(data) != ncols or any(len(c) != nrows for c in data):
            raise DomainError(f"columns do not form a {nrows}x{ncols} matrix")
        return Matrix(nrows, ncols, data)

    def matrix_from_rows(self, rows: Sequence[Sequence[Any]], ncols: int | None = None) -> Matrix:
        n = ncols if ncols is not None else (len(rows[0]) if rows else 0)
        return self.matrix(len(rows), n, [[rows[i][j] for i in range(len(rows))] for j in range(n)])

    def zero_matrix(self, nrows: int, ncols: int) -> Matrix:
        return Matrix(nrows, ncols, tuple(self.vzero(nrows) for _ in range(ncols)))

    def identity_matrix(self, n: int) -> Matrix:
        return Matrix(n, n, tuple(self.unit_vector(n, k) for k in range(n)))

    def apply(self, M: Matrix, v: Sequence[PolyElement]) -> Vector:
        if len(v) != M.ncols:
            raise DomainError(f"vector of length {len(v)} for a matrix with {M.ncols} columns")
        acc = [self.poly.zero] * M.nrows
        for c, col in zip(v, M.cols):
            if not c:
                continue
            for i, a in enumerate(col):
                if a:
                    acc[i] = acc[i] + c * a
        return self.vnf(acc)

    def compose(self, A: Matrix, B: Matrix) -> Matrix:
        """A @ B."""
        if A.ncols != B.nrows:
            raise DomainError(f"cannot compose {A.nrows}x{A.ncols} with {B.nrows}x{B.ncols}")
        return Matrix(A.nrows, B.ncols, tuple(self.apply(A, c) for c in B.cols))

    def madd(self, A: Matrix, B: Matrix) -> Matrix:
        return Matrix(A.nrows, A.ncols, tuple(self.vadd(a, b) for a, b in zip(A.cols, B.cols)))

    def msub(self, A: Matrix, B: Matrix) -> Matrix:
        return Matrix(A.nrows, A.ncols, tuple(self.vsub(a, b) for a, b in zip(A.cols, B.cols)))

    def mscale(self, c: PolyElement, A: Matrix) -> Matrix:
        return Matrix(A.nrows, A.ncols, tuple(self.vscale(c, a) for a in A.cols))

    def block(self, blocks: Sequence[Sequence[Matrix | None]], row_sizes: Sequence[int],
              col_sizes: Sequence[int]) -> Matrix:
        """Assemble a block matrix; None stands for a zero block."""
        cols = []
        for bj, w in enumerate(col_sizes):
            for j in range(w):
                col: list[PolyElement] = []
                for bi, h in enumerate(row_sizes):
                    blk = blocks[bi][bj]
                    col.extend(blk.cols[j] if blk is not None else self.vzero(h))
                cols.append(tuple(col))
        return Matrix(sum(row_sizes), sum(col_sizes), tuple(cols))

    def __str__(self) -> str:
        if self.name:
            return self.name
        body = f"{self.base}[{','.join(self.variables)}]"
        if self.ideal_gens:
            body += "/(" + ", ".join(self.to_str(g) for g in self.ideal_gens) + ")"
        return body

    __repr__ = __str__


# -- Ring maps --

class RingMap:
    """A base-linear ring homomorphism given by images of the source variables."""

    def __init__(self, source: PresentedRing, target: PresentedRing,
                 images: Sequence[Any], check: bool = True) -> None:
        if source.base != target.base:
            raise DomainError(f"ring map between {source.base} and {target.base}")
        if len(images) != source.nvars:
            raise DomainError(f"{len(images)} images for {source.nvars} variables")
        self.source = source
        self.target = target
        self.images = tuple(target.normal_form(a) for a in images)
        self._cache: dict[tuple[int, ...], PolyElement] = {}
        if check:
            for g in source.ideal_gens:
                if self.evaluate(g):
                    raise DomainError(f"{source.to_str(g)} does not map to 0 in {target}")

    @classmethod
    def identity(cls, ring: PresentedRing) -> RingMap:
        return cls(ring, ring, ring.gens, check=False)

    @classmethod
    def by_names(cls, source: PresentedRing, target: PresentedRing) -> RingMap:
        """Send each source variable to the target variable of the same name."""
        return cls(source, target, [target.var(v) for v in source.variables])

    def _monomial(self, m: tuple[int, ...]) -> PolyElement:
        if m not in self._cache:
            out = self.target.one
            for img, e in zip(self.images, m):
                for _ in range(e):
                    out = self.target.mul(out, img)
            self._cache[m] = out
        return self._cache[m]

    def evaluate(self, f: PolyElement) -> PolyElement:
        acc = self.target.poly.zero
        for m, c in f.items():
            acc = acc + self._monomial(m) * c
        return self.target.normal_form(acc)

    def __call__(self, f: Any) -> PolyElement:
        return self.evaluate(self.source.normal_form(f))

    def on_vector(self, v: Sequence[PolyElement]) -> Vector:
        return tuple(self(a) for a in v)

    def on_matrix(self, M: Matrix) -> Matrix:
        return Matrix(M.nrows, M.ncols, tuple(self.on_vector(c) for c in M.cols))

    def compose(self, first: RingMap) -> RingMap:
        """self after first."""
        if first.target is not self.source:
            raise DomainError("ring maps do not compose")
        return RingMap(first.source, self.target, [self(a) for a in first.images], check=False)

    @property
    def is_identity(self) -> bool:
        return self.source is self.target and self.images == self.source.gens

    # -- Kernel and preimages --

    @cached_property
    def _elimination(self) -> tuple[PresentedRing, list[gb.Vector], list[gb.Term]]:
        """GB of the graph ideal in K[target vars, source vars], target block first."""
        src, tgt = self.source, self.target
        names = [f"_y{i}" for i in range(tgt.nvars)] + [f"_x{i}" for i in range(src.nvars)]
        order = gb.MonomialOrder.block(len(names), [range(tgt.nvars),
                                                    range(tgt.nvars, len(names))])
        big = PolyRing([Symbol(v) for v in names], src.base.domain)
        n_t = tgt.nvars

        def lift_target(f: PolyElement) -> gb.Vector:
            return {(0, tuple(m) + (0,) * src.nvars): c for m, c in f.items()}

        gens: list[gb.Vector] = [lift_target(g) for g in tgt.ideal_gens]
        for i, img in enumerate(self.images):
            v = {(0, t[1]): -c for t, c in lift_target(img).items()}
            xi = (0, (0,) * n_t + tuple(1 if k == i else 0 for k in range(src.nvars)))
            v[xi] = v.get(xi, src.base.domain.zero) + src.base.domain.one
            gens.append({t: c for t, c in v.items() if c})
        basis = gb.buchberger(gens, src.base.domain, order, ideal=True)
        engine = gb.Engine(src.base.domain, order)
        return big, basis, [engine.lead(v) for v in basis]

    def kernel_generators(self) -> list[PolyElement]:
        """Generators of ker(self) as elements of the source ring."""
        src, tgt = self.source, self.target
        if src.regime == "field":
            _, basis, _ = self._elimination
            n_t = tgt.nvars
            out = []
            for v in basis:
                if all(not any(m[:n_t]) for (_, m) in v):
                    f = src.normal_form(src.poly.from_dict({m[n_t:]: c for (_, m), c in v.items()}))
                    if f:
                        out.append(f)
            return out
        if src.regime == "zz-finite" and tgt.regime == "zz-finite":
            cols = [tgt._zz_coords(self(src.poly.from_dict({b: 1}))) for b in src.zz_basis]
            tgt_lat = [list(w) for w in tgt.lattice.basis]
            M = ExactMatrix.from_columns(ZZ_BASE, cols + tgt_lat, len(tgt.zz_basis))
            out = []
            for k in kernel_basis(M):
                f = src.normal_form(src._from_zz_coords([int(x) for x in k[:len(cols)]]))
                if f:
                    out.append(f)
            return out
        raise UnsupportedRingError(f"kernel of a map {src} -> {tgt} is outside both regimes")

    def preimage(self, b: Any) -> PolyElement | None:
        """Some a with self(a) == b, or None."""
        src, tgt = self.source, self.target
        b = tgt.normal_form(b)
        if src.regime == "field":
            big, basis, leads = self._elimination
            engine = gb.Engine(src.base.domain, gb.MonomialOrder.block(
                tgt.nvars + src.nvars, [range(tgt.nvars), range(tgt.nvars, tgt.nvars + src.nvars)]))
            vec = {(0, tuple(m) + (0,) * src.nvars): c for m, c in b.items()}
            rem = engine.reduce(vec, basis, leads)
            n_t = tgt.nvars
            if any(any(m[:n_t]) for (_, m) in rem):
                return None
            a = src.normal_form(src.poly.from_dict({m[n_t:]: c for (_, m), c in rem.items()}))
            return a if self(a) == b else None
        if src.regime == "zz-finite" and tgt.regime == "zz-finite":
            cols = [tgt._zz_coords(self(src.poly.from_dict({m: 1}))) for m in src.zz_basis]
            tgt_lat = [list(w) for w in tgt.lattice.basis]
            M = ExactMatrix.from_columns(ZZ_BASE, cols + tgt_lat, len(tgt.zz_basis))
            x = solve_linear(M, tgt._zz_coords(b))
            if x is None:
                return None
            return src.normal_form(src._from_zz_coords([int(v) for v in x[:len(cols)]]))
        raise UnsupportedRingError(f"preimages for {src} -> {tgt} are outside both regimes")

    def is_surjective(self) -> bool:
        return all(self.preimage(g) is not None for g in self.target.gens)

    def __repr__(self) -> str:
        return f"RingMap({self.source} -> {self.target}: {[self.target.to_str(a) for a in self.images]})"


# -- Constructions --

def polynomial_ring(base: BaseRing, variables: Sequence[str], ideal: Iterable[Any] = (),
                    order: str | gb.MonomialOrder | None = None, name: str | None = None) -> PresentedRing:
    return PresentedRing(base, variables, ideal, order, name)


def fresh_name(taken: Iterable[str], stem: str = "t") -> str:
    taken = set(taken)
    if stem not in taken:
        return stem
    for k in itertools.count(1):
        if f"{stem}{k}" not in taken:
            return f"{stem}{k}"
    raise AssertionError("unreachable")


def localize(ring: PresentedRing, s: Any) -> tuple[PresentedRing, RingMap]:
    """R[s^-1] = R[t]/(I, t*s - 1) with the canonical map R -> R[s^-1]."""
    s = ring.normal_form(s)
    t = fresh_name(ring.variables)
    names = list(ring.variables) + [t]
    blocks = [b for b in ring.order.blocks] + [(ring.nvars,)]
    order = gb.MonomialOrder(len(names), tuple(tuple(b) for b in blocks), ring.order.name) \
        if ring.order.name != "grevlex" else gb.MonomialOrder.grevlex(len(names))
    lifted = [ring.to_str(g) for g in ring.ideal_gens]
    rel = f"{t}*({ring.to_str(s)}) - 1"
    loc = PresentedRing(ring.base, names, lifted + [rel], order,
                        localization=LocalizationData(ring, s, t))
    if loc.is_zero_ring:
        logger.info("localization of %s at %s is the zero ring", ring, ring.to_str(s))
    canon = RingMap(ring, loc, [loc.var(v) for v in ring.variables], check=False)
    return loc, canon


def renamed(names: Sequence[str], suffix: str, taken: set[str]) -> list[str]:
    out = []
    for v in names:
        cand = f"{v}{suffix}"
        if cand in taken:
            cand = f"{v}_{suffix}"
        while cand in taken:
            cand += "_"
        taken.add(cand)
        out.append(cand)
    return out


@dataclass
class TensorRing:
    ring: PresentedRing
    first: RingMap
    second: RingMap


def tensor_rings(B: PresentedRing, C: PresentedRing, A: PresentedRing,
                 to_b: RingMap | None = None, to_c: RingMap | None = None) -> TensorRing:
    """B (x)_A C on the disjoint union of variables, with p1*, p2* attached."""
    if not (A.base == B.base == C.base):
        raise DomainError(f"tensor over mismatched bases {A.base}, {B.base}, {C.base}")
    to_b = to_b or RingMap(A, B, [B.var(v) for v in A.variables])
    to_c = to_c or RingMap(A, C, [C.var(v) for v in A.variables])
    taken: set[str] = set()
    b_names = renamed(B.variables, "1", taken)
    c_names = renamed(C.variables, "2", taken)
    names = b_names + c_names
    nb = B.nvars
    levels = max(len(B.order.blocks), len(C.order.blocks))
    blocks = []
    for k in range(levels):
        blk = list(B.order.blocks[k]) if k < len(B.order.blocks) else []
        blk += [nb + i for i in (C.order.blocks[k] if k < len(C.order.blocks) else ())]
        blocks.append(blk)
    order = gb.MonomialOrder.block(len(names), blocks) if len(blocks) > 1 \
        else gb.MonomialOrder.grevlex(len(names))
    T_poly = PolyRing([Symbol(v) for v in names], B.base.domain)

    def move(f: PolyElement, offset: int, n: int) -> PolyElement:
        total = len(names)
        return T_poly.from_dict({(0,) * offset + tuple(m) + (0,) * (total - offset - n): c
                                 for m, c in f.items()})

    ideal = [move(g, 0, nb) for g in B.ideal_gens] + [move(g, nb, C.nvars) for g in C.ideal_gens]
    for a_img_b, a_img_c in zip(to_b.images, to_c.images):
        ideal.append(move(a_img_b, 0, nb) - move(a_img_c, nb, C.nvars))
    T = PresentedRing(B.base, names, [g for g in ideal if g], order)
    p1 = RingMap(B, T, [T.var(v) for v in b_names])
    p2 = RingMap(C, T, [T.var(v) for v in c_names])
    return TensorRing(T, p1, p2)


# -- Submodules --

class Submodule:
    """The submodule of R^rank generated by ``generators`` (plus I * R^rank)."""

    def __init__(self, ring: PresentedRing, rank: int, generators: Iterable[Sequence[Any]]) -> None:
        self.ring = ring
        self.rank = rank
        self.generators = [ring.vnf(g) for g in generators]
        for g in self.generators:
            if len(g) != rank:
                raise DomainError(f"generator of length {len(g)} in a rank-{rank} module")
        if ring.regime == "zz-free" and ring.nvars:
            raise UnsupportedRingError(f"module computations over {ring} need monic relations")

    @cached_property
    def _backend(self) -> "_FieldBackend | _LatticeBackend":
        if self.ring.regime == "field":
            return _FieldBackend(self)
        return _LatticeBackend(self)

    def normal_form(self, v: Sequence[Any]) -> Vector:
        v = self.ring.vnf(v)
        if self.rank == 0:
            return ()
        return self._backend.normal_form(v)

    def contains(self, v: Sequence[Any]) -> bool:
        return not any(self.normal_form(v))

    def lift(self, v: Sequence[Any]) -> list[PolyElement] | None:
        """Coefficients c with sum c_j g_j == v, or None when v is not in the span."""
        v = self.ring.vnf(v)
        if len(v) != self.rank:
            raise DomainError(f"vector of length {len(v)} in a rank-{self.rank} module")
        if not self.generators:
            return [] if not any(v) else None
        if self.rank == 0:
            return [self.ring.zero] * len(self.generators)
        return self._backend.lift(v)

    def syzygies(self) -> list[Vector]:
        """Generators of {c : sum c_j g_j == 0}."""
        m = len(self.generators)
        if m == 0:
            return []
        if self.rank == 0:
            return [self.ring.unit_vector(m, j) for j in range(m)]
        return self._backend.syzygies()

    def quotient_dimension(self) -> int | None:
        if self.rank == 0:
            return 0
        return self._backend.quotient_dimension()

    def quotient_basis(self) -> list[tuple[int, tuple[int, ...]]] | None:
        """Standard terms spanning R^rank / N over a field, or None if infinite."""
        if self.ring.regime != "field":
            raise DomainError("quotient bases are a field-regime notion")
        if self.rank == 0:
            return []
        return self._backend.quotient_basis()

    def is_everything(self) -> bool:
        return all(self.contains(self.ring.unit_vector(self.rank, k)) for k in range(self.rank))


class _FieldBackend:
    def __init__(self, sub: Submodule) -> None:
        ring = sub.ring
        self.ring = ring
        self.rank = r = sub.rank
        gens = sub.generators
        self.ngens = m = len(gens)
        dom = ring.base.domain
        self.engine = gb.Engine(dom, ring.order)
        aug: list[gb.Vector] = []
        for j, g in enumerate(gens):
            v = {(k, mono): c for k in range(r) for mono, c in g[k].items()}
            v[(r + j, ring.zero_monom)] = dom.one
            aug.append(v)
        for f in ring._gb_vectors:
            for k in range(r):
                aug.append({(k, mono): c for (_, mono), c in f.items()})
        self.basis = gb.buchberger(aug, dom, ring.order)
        self.leads = [self.engine.lead(v) for v in self.basis]
        head = [(v, lt) for v, lt in zip(self.basis, self.leads) if lt[0] < r]
        self.head = [{t: c for t, c in v.items() if t[0] < r} for v, _ in head]
        self.head_leads = [lt for _, lt in head]
        logger.debug("submodule of rank %d with %d generators: augmented basis %d",
                     r, m, len(self.basis))

    def _vec(self, v: Vector) -> gb.Vector:
        return {(k, mono): c for k in range(len(v)) for mono, c in v[k].items()}

    def _unvec(self, v: gb.Vector, n: int, offset: int = 0) -> Vector:
        parts: list[dict] = [dict() for _ in range(n)]
        for (k, mono), c in v.items():
            if offset <= k < offset + n:
                parts[k - offset][mono] = c
        return tuple(self.ring.normal_form(self.ring.poly.from_dict(p)) for p in parts)

    def normal_form(self, v: Vector) -> Vector:
        rem = self.engine.reduce(self._vec(v), self.head, self.head_leads)
        return self._unvec(rem, self.rank)

    def lift(self, v: Vector) -> list[PolyElement] | None:
        rem = self.engine.reduce(self._vec(v), self.basis, self.leads)
        if any(k < self.rank for (k, _) in rem):
            return None
        tail = self._unvec(rem, self.ngens, self.rank)
        return [-c for c in tail]

    def syzygies(self) -> list[Vector]:
        out = []
        for v, lt in zip(self.basis, self.leads):
            if lt[0] >= self.rank:
                s = self._unvec(v, self.ngens, self.rank)
                if any(s):
                    out.append(s)
        return out

    def quotient_basis(self) -> list[tuple[int, tuple[int, ...]]] | None:
        out = []
        for k in range(self.rank):
            leads = [lt[1] for lt in self.head_leads if lt[0] == k]
            mons = gb.standard_monomials(leads, self.ring.nvars)
            if mons is None:
                return None
            out.extend((k, mono) for mono in mons)
        return out

    def quotient_dimension(self) -> int | None:
        basis = self.quotient_basis()
        return None if basis is None else len(basis)


class _LatticeBackend:
    def __init__(self, sub: Submodule) -> None:
        ring = sub.ring
        self.ring = ring
        self.rank = r = sub.rank
        self.N = N = len(ring.zz_basis)
        self.ngens = len(sub.generators)
        monos = [ring.poly.from_dict({b: 1}) for b in ring.zz_basis]
        cols: list[list[int]] = []
        for g in sub.generators:
            for mono in monos:
                cols.append(self._coords(ring.vscale(mono, g)))
        self.n_gen_cols = len(cols)
        for k in range(r):
            for w in ring.lattice.basis:
                col = [0] * (N * r)
                col[k * N:(k + 1) * N] = list(w)
                cols.append(col)
        self.columns = cols
        self.lattice = Lattice.spanned_by(N * r, cols)

    def _coords(self, v: Vector) -> list[int]:
        out: list[int] = []
        for a in v:
            out.extend(self.ring._zz_coords(a))
        return out

    def _from_coords(self, coords: Sequence[int], n: int) -> Vector:
        N = self.N
        return tuple(self.ring.normal_form(self.ring._from_zz_coords(coords[k * N:(k + 1) * N]))
                     for k in range(n))

    def _matrix(self) -> ExactMatrix:
        return ExactMatrix.from_columns(ZZ_BASE, self.columns, self.N * self.rank)

    def normal_form(self, v: Vector) -> Vector:
        return self._from_coords(self.lattice.reduce(self._coords(v)), self.rank)

    def _combination(self, x: Sequence[Any]) -> list[PolyElement]:
        ring = self.ring
        out = []
        for j in range(self.ngens):
            chunk = x[j * self.N:(j + 1) * self.N]
            out.append(ring.normal_form(ring._from_zz_coords([int(c) for c in chunk])))
        return out

    def lift(self, v: Vector) -> list[PolyElement] | None:
        if not self.columns:
            return None if any(v) else []
        x = solve_linear(self._matrix(), self._coords(v))
        return None if x is None else self._combination(x)

    def syzygies(self) -> list[Vector]:
        if not self.columns:
            return []
        out = []
        seen = set()
        for k in kernel_basis(self._matrix()):
            s = tuple(self._combination(k))
            key = tuple(self.ring.to_str(a) for a in s)
            if any(s) and key not in seen:
                seen.add(key)
                out.append(s)
        return out

    def quotient_dimension(self) -> int | None:
        return None

    def invariants(self) -> tuple[list[int], int]:
        n = self.N * self.rank
        if self.lattice.rank == 0:
            return [], n
        M = ExactMatrix.from_columns(ZZ_BASE, self.lattice.basis, n)
        S, _, _ = smith_normal_form(M)
        return [int(d) for d in S.diagonal() if d and d != 1], n - self.lattice.rank


# -- Finitely presented modules --

@dataclass(frozen=True)
class ModuleInvariants:
    """Summary of a finitely presented module used in reports and tests."""

    generators: int
    relations: int
    dimension: int | None = None
    factors: tuple[int, ...] = ()
    free_rank: int | None = None
    is_zero: bool = False
    is_free: bool = False

    def describe(self) -> str:
        if self.is_zero:
            return "0"
        parts = []
        if self.dimension is not None:
            parts.append(f"dim {self.dimension}")
        if self.factors or self.free_rank is not None:
            torsion = " + ".join(f"Z/{d}" for d in self.factors)
            free = f"Z^{self.free_rank}" if self.free_rank else ""
            parts.append(" + ".join(p for p in (free, torsion) if p) or "0")
        if self.is_free:
            parts.append(f"free rank {self.generators}")
        parts.append(f"{self.generators} gen / {self.relations} rel")
        return "; ".join(parts)


class FPModule:
    """R^n modulo the submodule spanned by ``relations`` (each a vector in R^n)."""

    def __init__(self, ring: PresentedRing, ngens: int, relations: Iterable[Sequence[Any]] = ()) -> None:
        self.ring = ring
        self.ngens = ngens
        rels = [ring.vnf(r) for r in relations]
        self.relations = [r for r in rels if any(r)]
        for r in self.relations:
            if len(r) != ngens:
                raise DomainError(f"relation of length {len(r)} for {ngens} generators")

    @cached_property
    def submodule(self) -> Submodule:
        return Submodule(self.ring, self.ngens, self.relations)

    def normal_form(self, v: Sequence[Any]) -> Vector:
        return self.submodule.normal_form(v)

    def is_zero_element(self, v: Sequence[Any]) -> bool:
        return self.submodule.contains(v)

    def is_zero(self) -> bool:
        return self.ngens == 0 or self.submodule.is_everything()

    def dimension(self) -> int | None:
        if self.ring.regime != "field":
            return None
        return self.submodule.quotient_dimension()

    def prune(self) -> "PrunedModule":
        """Eliminate generators that appear with a constant unit coefficient in a relation."""
        ring = self.ring
        n = self.ngens
        # old generator k is expressed as a vector over the surviving generators
        express: list[Vector | None] = [None] * n
        alive = list(range(n))
        rels = [list(r) for r in self.relations]
        changed = True
        while changed:
            changed = False
            for r in rels:
                pivot = next((k for k in alive if ring.is_constant_unit(r[k])), None)
                if pivot is None:
                    continue
                inv = ring.inverse(r[pivot])
                # e_pivot = -inv * sum_{i != pivot} r_i e_i
                sub = [ring.mul(-inv, r[i]) if i != pivot else ring.zero for i in range(n)]
                new_rels = []
                for s in rels:
                    if s is r:
                        continue
                    c = s[pivot]
                    if c:
                        s = [ring.add(s[i], ring.mul(c, sub[i])) if i != pivot else ring.zero
                             for i in range(n)]
                    new_rels.append(s)
                rels = [s for s in new_rels if any(s)]
                express[pivot] = tuple(sub)
                alive.remove(pivot)
                changed = True
                break
        # resolve chains of eliminated generators into surviving coordinates
        def resolve(k: int) -> list[PolyElement]:
            vec = [ring.zero] * n
            if express[k] is None:
                vec[k] = ring.one
                return vec
            for i, c in enumerate(express[k]):
                if c:
                    sub_vec = resolve(i)
                    vec = [ring.add(a, ring.mul(c, b)) for a, b in zip(vec, sub_vec)]
            return vec

        proj_cols = []
        for k in range(n):
            full = resolve(k)
            proj_cols.append(tuple(full[i] for i in alive))
        projection = Matrix(len(alive), n, tuple(ring.vnf(c) for c in proj_cols))
        section = Matrix(n, len(alive), tuple(ring.unit_vector(n, k) for k in alive))
        pruned = FPModule(ring, len(alive), [tuple(s[i] for i in alive) for s in rels])
        return PrunedModule(pruned, projection, section)

    def invariants(self) -> ModuleInvariants:
        pruned = self.prune().module
        ring = self.ring
        if pruned.ngens == 0 or pruned.is_zero():
            return ModuleInvariants(0, 0, dimension=0 if ring.regime == "field" else None,
                                    free_rank=0 if ring.regime != "field" else None,
                                    is_zero=True)
        if ring.regime == "field":
            dim = pruned.dimension()
            return ModuleInvariants(pruned.ngens, len(pruned.relations), dimension=dim,
                                    is_free=not pruned.relations)
        backend = pruned.submodule._backend
        factors, free = backend.invariants()
        return ModuleInvariants(pruned.ngens, len(pruned.relations), factors=tuple(factors),
                                free_rank=free, is_free=not pruned.relations)

    def base_change(self, phi: RingMap) -> FPModule:
        """target (x)_source M along phi."""
        return FPModule(phi.target, self.ngens, [phi.on_vector(r) for r in self.relations])

    def annihilator_contains(self, a: PolyElement) -> bool:
        return all(self.is_zero_element(self.ring.vscale(a, self.ring.unit_vector(self.ngens, k)))
                   for k in range(self.ngens))

    def __repr__(self) -> str:
        return f"FPModule({self.ring}, gens={self.ngens}, rels={len(self.relations)})"


@dataclass(frozen=True)
class PrunedModule:
    """A pruned presentation with the maps back and forth on generators."""

    module: FPModule
    projection: Matrix
    section: Matrix


def syzygies(ring: PresentedRing, elements: Sequence[Sequence[Any]]) -> list[Vector]:
    """Generators of the relation module of ``elements`` (vectors of equal length)."""
    if not elements:
        return []
    rank = len(elements[0])
    return Submodule(ring, rank, elements).syzygies()


def buchberger(ring: PresentedRing, generators: Iterable[Any],
               order: gb.MonomialOrder | str | None = None) -> list[PolyElement]:
    """Reduced Groebner basis of the ideal of K[x] generated by ``generators``."""
    if not ring.base.is_field:
        raise UnsupportedRingError("Groebner bases need a field base ring; use the ZZ-finite path")
    if order is None:
        order = ring.order
    elif isinstance(order, str):
        order = gb.MonomialOrder.named(order, ring.nvars)
    vecs = [{(0, m): c for m, c in ring._raw(g).items()} for g in generators]
    basis = gb.buchberger([v for v in vecs if v], ring.base.domain, order, ideal=True)
    return [ring.poly.from_dict({m: c for (_, m), c in v.items()}) for v in basis]
