"""Exact scalars and dense matrices over ZZ, QQ and GF(p).

Everything here is a thin, verified layer over sympy's domain elements and
``DomainMatrix``. Values are immutable; every function is pure.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Any, Iterable, Sequence

from sympy import Rational, sympify
from sympy.ntheory import isprime
from sympy.polys.domains import GF, QQ, ZZ
from sympy.polys.matrices import DomainMatrix
from sympy.polys.matrices.normalforms import hermite_normal_form, smith_normal_decomp

from py_rigidsq.errors import DomainError

logger = logging.getLogger(__name__)

BASE_KINDS = ("ZZ", "QQ", "GF")


@dataclass(frozen=True)
class BaseRing:
    """The coefficient ring: ZZ, QQ or GF(p)."""

    kind: str
    prime: int | None = None

    def __post_init__(self) -> None:
        if self.kind not in BASE_KINDS:
            raise DomainError(f"unknown base ring {self.kind!r}")
        if self.kind == "GF":
            if self.prime is None or not isprime(self.prime):
                raise DomainError(f"GF needs a prime modulus, got {self.prime}")
        elif self.prime is not None:
            raise DomainError(f"{self.kind} takes no modulus")

    @classmethod
    def parse(cls, text: str) -> BaseRing:
        """Accept ``QQ``, ``ZZ``, ``GF(5)``, ``F5`` or ``Fp 5``."""
        t = text.strip().replace(" ", "")
        if t in ("QQ", "ZZ"):
            return cls(t)
        for prefix in ("GF(", "Fp(", "F("):
            if t.startswith(prefix) and t.endswith(")"):
                return cls("GF", int(t[len(prefix):-1]))
        for prefix in ("Fp", "F", "GF"):
            if t.startswith(prefix) and t[len(prefix):].isdigit():
                return cls("GF", int(t[len(prefix):]))
        raise DomainError(f"cannot parse base ring {text!r}")

    @cached_property
    def domain(self) -> Any:
        if self.kind == "ZZ":
            return ZZ
        if self.kind == "QQ":
            return QQ
        return GF(self.prime, symmetric=False)

    @property
    def is_field(self) -> bool:
        return self.kind != "ZZ"

    def convert(self, value: Any) -> Any:
        """Coerce ints, Fractions, strings, sympy numbers or Scalars into the domain."""
        if isinstance(value, Scalar):
            if value.base != self:
                raise DomainError(f"scalar over {value.base} used over {self}")
            return value.value
        dom = self.domain
        if not isinstance(value, (bool, int)) and dom.of_type(value):
            return value
        if isinstance(value, bool):
            value = int(value)
        if isinstance(value, int):
            return dom.convert(value)
        if isinstance(value, Fraction):
            value = Rational(value.numerator, value.denominator)
        if isinstance(value, str):
            value = sympify(value)
        try:
            return dom.from_sympy(sympify(value))
        except Exception as exc:  # sympy raises CoercionFailed and friends
            raise DomainError(f"{value!r} is not an element of {self}") from exc

    def to_str(self, value: Any) -> str:
        return str(self.domain.to_sympy(value))

    def __str__(self) -> str:
        return f"GF({self.prime})" if self.kind == "GF" else self.kind


ZZ_BASE = BaseRing("ZZ")
QQ_BASE = BaseRing("QQ")


@dataclass(frozen=True)
class Scalar:
    """A single exact value tagged by its base ring."""

    base: BaseRing
    value: Any

    @classmethod
    def of(cls, base: BaseRing, value: Any) -> Scalar:
        return cls(base, base.convert(value))

    def _other(self, other: Any) -> Any:
        if isinstance(other, Scalar):
            if other.base != self.base:
                raise DomainError(f"mixing {self.base} and {other.base}")
            return other.value
        return self.base.convert(other)

    def __add__(self, other: Any) -> Scalar:
        return Scalar(self.base, self.value + self._other(other))

    __radd__ = __add__

    def __sub__(self, other: Any) -> Scalar:
        return Scalar(self.base, self.value - self._other(other))

    def __neg__(self) -> Scalar:
        return Scalar(self.base, -self.value)

    def __mul__(self, other: Any) -> Scalar:
        return Scalar(self.base, self.value * self._other(other))

    __rmul__ = __mul__

    def __truediv__(self, other: Any) -> Scalar:
        den = self._other(other)
        if not den:
            raise DomainError("division by zero")
        if not self.base.is_field:
            q, r = ZZ.div(self.value, den)
            if r:
                raise DomainError(f"{self} is not divisible by {den} in ZZ")
            return Scalar(self.base, q)
        return Scalar(self.base, self.base.domain.quo(self.value, den))

    def __eq__(self, other: object) -> bool:
        if isinstance(other, Scalar):
            return self.base == other.base and self.value == other.value
        try:
            return self.value == self.base.convert(other)
        except DomainError:
            return False

    def __hash__(self) -> int:
        return hash((self.base, self.base.to_str(self.value)))

    def __bool__(self) -> bool:
        return bool(self.value)

    def __str__(self) -> str:
        return self.base.to_str(self.value)


@dataclass(frozen=True)
class ExactMatrix:
    """Dense rows x cols matrix of domain elements sharing one base ring."""

    base: BaseRing
    rows: int
    cols: int
    entries: tuple[tuple[Any, ...], ...] = field(repr=False)

    def __post_init__(self) -> None:
        if len(self.entries) != self.rows or any(len(r) != self.cols for r in self.entries):
            raise DomainError(f"entries do not form a {self.rows}x{self.cols} grid")

    # -- Construction --

    @classmethod
    def from_rows(cls, base: BaseRing, rows: Sequence[Sequence[Any]],
                  cols: int | None = None) -> ExactMatrix:
        data = tuple(tuple(base.convert(x) for x in row) for row in rows)
        ncols = cols if cols is not None else (len(data[0]) if data else 0)
        return cls(base, len(data), ncols, data)

    @classmethod
    def from_columns(cls, base: BaseRing, columns: Sequence[Sequence[Any]],
                     rows: int) -> ExactMatrix:
        conv = [[base.convert(x) for x in c] for c in columns]
        data = tuple(tuple(c[i] for c in conv) for i in range(rows))
        return cls(base, rows, len(conv), data)

    @classmethod
    def zeros(cls, base: BaseRing, rows: int, cols: int) -> ExactMatrix:
        z = base.domain.zero
        return cls(base, rows, cols, tuple((z,) * cols for _ in range(rows)))

    @classmethod
    def identity(cls, base: BaseRing, n: int) -> ExactMatrix:
        dom = base.domain
        return cls(base, n, n, tuple(
            tuple(dom.one if i == j else dom.zero for j in range(n)) for i in range(n)))

    @classmethod
    def from_domain_matrix(cls, base: BaseRing, dm: DomainMatrix) -> ExactMatrix:
        m, n = dm.shape
        if m == 0 or n == 0:
            return cls.zeros(base, m, n)
        dm = dm.convert_to(base.domain)
        return cls(base, m, n, tuple(tuple(r) for r in dm.to_list()))

    def to_domain_matrix(self) -> DomainMatrix:
        return DomainMatrix([list(r) for r in self.entries], (self.rows, self.cols),
                            self.base.domain)

    # -- Access --

    def __getitem__(self, ij: tuple[int, int]) -> Any:
        i, j = ij
        return self.entries[i][j]

    def column(self, j: int) -> tuple[Any, ...]:
        return tuple(r[j] for r in self.entries)

    def columns(self) -> list[tuple[Any, ...]]:
        return [self.column(j) for j in range(self.cols)]

    def to_lists(self) -> list[list[str]]:
        return [[self.base.to_str(x) for x in row] for row in self.entries]

    def transpose(self) -> ExactMatrix:
        return ExactMatrix(self.base, self.cols, self.rows,
                           tuple(self.column(j) for j in range(self.cols)))

    # -- Arithmetic --

    def __matmul__(self, other: ExactMatrix) -> ExactMatrix:
        if self.base != other.base:
            raise DomainError(f"mixing {self.base} and {other.base}")
        if self.cols != other.rows:
            raise DomainError(f"cannot multiply {self.rows}x{self.cols} by {other.rows}x{other.cols}")
        zero = self.base.domain.zero
        ocols = other.columns()
        data = []
        for row in self.entries:
            out = []
            for col in ocols:
                acc = zero
                for a, b in zip(row, col):
                    if a and b:
                        acc += a * b
                out.append(acc)
            data.append(tuple(out))
        return ExactMatrix(self.base, self.rows, other.cols, tuple(data))

    def apply(self, vector: Sequence[Any]) -> tuple[Any, ...]:
        if len(vector) != self.cols:
            raise DomainError(f"vector of length {len(vector)} for {self.cols} columns")
        zero = self.base.domain.zero
        v = [self.base.convert(x) for x in vector]
        out = []
        for row in self.entries:
            acc = zero
            for a, b in zip(row, v):
                if a and b:
                    acc += a * b
            out.append(acc)
        return tuple(out)

    def det(self) -> Any:
        if self.rows != self.cols:
            raise DomainError("determinant of a non-square matrix")
        if self.rows == 0:
            return self.base.domain.one
        return self.to_domain_matrix().det()

    def rank(self) -> int:
        if self.rows == 0 or self.cols == 0:
            return 0
        dm = self.to_domain_matrix()
        if not self.base.is_field:
            dm = dm.convert_to(QQ)
        return dm.rank()

    def is_diagonal(self) -> bool:
        return all(not self.entries[i][j]
                   for i in range(self.rows) for j in range(self.cols) if i != j)

    def diagonal(self) -> list[Any]:
        return [self.entries[i][i] for i in range(min(self.rows, self.cols))]

    def __str__(self) -> str:
        return "[" + ", ".join("[" + ", ".join(r) + "]" for r in self.to_lists()) + "]"


# -- Smith normal form --

def smith_normal_form(matrix: ExactMatrix) -> tuple[ExactMatrix, ExactMatrix, ExactMatrix]:
    """Return ``(S, U, V)`` with ``S == U @ M @ V``, S diagonal with d1 | d2 | ...

    U and V are unimodular. Diagonal entries are non-negative and zeros trail.
    """
    if matrix.base != ZZ_BASE:
        raise DomainError(f"Smith normal form needs integer entries, got {matrix.base}")
    m, n = matrix.rows, matrix.cols
    if m == 0 or n == 0:
        return matrix, ExactMatrix.identity(ZZ_BASE, m), ExactMatrix.identity(ZZ_BASE, n)
    smf, u, v = smith_normal_decomp(matrix.to_domain_matrix())
    S = ExactMatrix.from_domain_matrix(ZZ_BASE, smf)
    U = ExactMatrix.from_domain_matrix(ZZ_BASE, u)
    V = ExactMatrix.from_domain_matrix(ZZ_BASE, v)
    if U @ matrix @ V != S or not S.is_diagonal():
        raise ArithmeticError("Smith decomposition failed verification")
    return S, U, V


def invariant_factors(matrix: ExactMatrix) -> list[int]:
    """Nonzero diagonal entries of the Smith form, as Python ints."""
    S, _, _ = smith_normal_form(matrix)
    return [int(d) for d in S.diagonal() if d]


# -- Kernels and solving --

def _rref_rows(base: BaseRing, rows: list[list[Any]], ncols: int) -> tuple[list[list[Any]], tuple[int, ...]]:
    if not rows:
        return [], ()
    dm = DomainMatrix(rows, (len(rows), ncols), base.domain)
    red, pivots = dm.rref()
    return [list(r) for r in red.to_list()], tuple(pivots)


def kernel_basis(matrix: ExactMatrix) -> list[tuple[Any, ...]]:
    """Basis of ``{v : M v = 0}``.

    Over a field the basis comes from the reduced row echelon form, one vector
    per free column. Over ZZ the columns of V (from ``S = U M V``) past the
    rank give a lattice basis of the integral kernel.
    """
    dom = matrix.base.domain
    n = matrix.cols
    if not matrix.base.is_field:
        S, _, V = smith_normal_form(matrix)
        r = sum(1 for d in S.diagonal() if d)
        return [V.column(j) for j in range(r, n)]
    if matrix.rows == 0:
        return [tuple(dom.one if i == j else dom.zero for i in range(n)) for j in range(n)]
    red, pivots = _rref_rows(matrix.base, [list(r) for r in matrix.entries], n)
    basis = []
    for f in range(n):
        if f in pivots:
            continue
        v = [dom.zero] * n
        v[f] = dom.one
        for i, p in enumerate(pivots):
            v[p] = -red[i][f]
        basis.append(tuple(v))
    return basis


def solve_linear(matrix: ExactMatrix, rhs: Sequence[Any]) -> tuple[Any, ...] | None:
    """Return x with ``M x = rhs`` or None when no (integral) solution exists."""
    if len(rhs) != matrix.rows:
        raise DomainError(f"right-hand side of length {len(rhs)} for {matrix.rows} rows")
    base = matrix.base
    dom = base.domain
    b = [base.convert(x) for x in rhs]
    n = matrix.cols
    if matrix.rows == 0:
        return tuple([dom.zero] * n)
    if n == 0:
        return () if not any(b) else None
    if base.is_field:
        rows = [list(r) + [bi] for r, bi in zip(matrix.entries, b)]
        red, pivots = _rref_rows(base, rows, n + 1)
        if n in pivots:
            return None
        x = [dom.zero] * n
        for i, p in enumerate(pivots):
            x[p] = red[i][n]
        return tuple(x)
    S, U, V = smith_normal_form(matrix)
    ub = U.apply(b)
    y = [dom.zero] * n
    for i in range(matrix.rows):
        d = S.entries[i][i] if i < n else dom.zero
        if d:
            q, r = ZZ.div(ub[i], d)
            if r:
                return None
            y[i] = q
        elif ub[i]:
            return None
    x = V.apply(y)
    if matrix.apply(x) != tuple(b):
        raise ArithmeticError("integral solve failed verification")
    return x


# -- Integer lattices (regime (b) helpers) --

@dataclass(frozen=True)
class Lattice:
    """A sublattice of ZZ^n kept as a column Hermite basis.

    ``reduce`` maps every vector to the canonical representative of its coset,
    so two vectors are congruent modulo the lattice iff they reduce equally.
    """

    dim: int
    basis: tuple[tuple[int, ...], ...]
    pivots: tuple[int, ...]

    @classmethod
    def spanned_by(cls, dim: int, vectors: Iterable[Sequence[int]]) -> Lattice:
        cols = [tuple(int(x) for x in v) for v in vectors if any(v)]
        if dim == 0 or not cols:
            return cls(dim, (), ())
        dm = DomainMatrix([[ZZ(c[i]) for c in cols] for i in range(dim)], (dim, len(cols)), ZZ)
        hnf = hermite_normal_form(dm)
        h_rows, h_cols = hnf.shape
        if h_cols == 0:
            return cls(dim, (), ())
        rows = hnf.to_list()
        basis = []
        pivots = []
        for j in range(h_cols):
            col = tuple(int(rows[i][j]) for i in range(dim))
            piv = max(i for i in range(dim) if col[i])
            basis.append(col)
            pivots.append(piv)
        return cls(dim, tuple(basis), tuple(pivots))

    @property
    def rank(self) -> int:
        return len(self.basis)

    def reduce(self, vector: Sequence[int]) -> tuple[int, ...]:
        v = [int(x) for x in vector]
        for col, piv in sorted(zip(self.basis, self.pivots), key=lambda cp: -cp[1]):
            q = v[piv] // col[piv]
            if q:
                for i in range(piv + 1):
                    v[i] -= q * col[i]
        return tuple(v)

    def contains(self, vector: Sequence[int]) -> bool:
        return not any(self.reduce(vector))


def integer_matrix(rows: Sequence[Sequence[int]], cols: int | None = None) -> ExactMatrix:
    """Shorthand for an ExactMatrix over ZZ."""
    return ExactMatrix.from_rows(ZZ_BASE, rows, cols)
