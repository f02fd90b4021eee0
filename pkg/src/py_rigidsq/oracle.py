"""Independent brute-force computations used to cross-check the main pipeline.

Each check is capped at desk-scale sizes and refuses with DomainError above the
cap:

- sq over a field with B finite: H^0 of the square is the subspace of M (x)_K M
  killed by every x (x) 1 - 1 (x) x, found by one kernel computation.
- sq of Z/n over Z: the Hom complex from the divided power resolution of
  Z/n over Lambda(e1, e2) with d e_i = n, expanded by hand.
- groebner: sympy's own reduced basis.
- snf: invariant factors from gcds of minors.
- syzygy: every degree-bounded relation, found by linear algebra on coefficients.
"""

from __future__ import annotations

import itertools
import logging
import math
from dataclasses import dataclass, field
from typing import Any, Sequence

import sympy

from py_rigidsq.dgcore import Complex
from py_rigidsq.errors import DomainError, UndeterminedError
from py_rigidsq.exactlin import ZZ_BASE, ExactMatrix, invariant_factors, kernel_basis, solve_linear
from py_rigidsq.polyring import FPModule, PresentedRing, RingMap, Submodule, buchberger, syzygies
from py_rigidsq.resolve import DEFAULT_DEPTH
from py_rigidsq.squaring import DEFAULT_WINDOW, sq_object

logger = logging.getLogger(__name__)

MAX_SQ_DIMENSION = 20
MAX_SNF_SIZE = 4
MAX_SYZYGY_UNKNOWNS = 400
MAX_HOM_MODULUS = 10_000


@dataclass
class OracleResult:
    """Rows of (quantity, pipeline, oracle); ``agree`` is false on any mismatch."""

    check: str
    rows: list[list[str]] = field(default_factory=list)
    agree: bool = True
    notes: list[str] = field(default_factory=list)

    def add(self, quantity: str, pipeline: Any, oracle: Any) -> None:
        same = pipeline == oracle
        self.rows.append([quantity, str(pipeline), str(oracle), "yes" if same else "NO"])
        self.agree = self.agree and same


# -- Sq over a field: the annihilator --

def _kron_difference(X: list[list[Any]], zero: Any) -> list[list[Any]]:
    """Rows of X (x) I - I (x) X."""
    m = len(X)
    out = []
    for i, j in itertools.product(range(m), repeat=2):
        row = []
        for k, l in itertools.product(range(m), repeat=2):
            left = X[i][k] if j == l else zero
            right = X[j][l] if i == k else zero
            row.append(left - right)
        out.append(row)
    return out


def _module_action(M: FPModule, x: Any) -> tuple[list[list[Any]], int]:
    """The K-matrix of multiplication by x on M = B^g / W, with dim_K M."""
    B = M.ring
    base = B.base
    dom = base.domain
    N = len(B.monomial_basis)
    g = M.ngens
    D = g * N
    basis = [B.from_coordinates([dom.one if k == t else dom.zero for k in range(N)])
             for t in range(N)]
    spanning = []
    for r in M.relations:
        for e in basis:
            spanning.append([c for j in range(g) for c in B.coordinates(B.mul(e, r[j]))])
    # functionals vanishing on W give coordinates on the quotient
    W = ExactMatrix(base, len(spanning), D, tuple(tuple(row) for row in spanning)) \
        if spanning else None
    P = kernel_basis(W) if W is not None else \
        [tuple(dom.one if i == j else dom.zero for i in range(D)) for j in range(D)]
    m = len(P)
    if m > MAX_SQ_DIMENSION:
        raise DomainError(f"dim M = {m} exceeds the oracle cap {MAX_SQ_DIMENSION}")
    Pmat = ExactMatrix(base, m, D, tuple(P))
    section = []
    for a in range(m):
        col = solve_linear(Pmat, [dom.one if b == a else dom.zero for b in range(m)])
        if col is None:
            raise ArithmeticError("projection onto the quotient has no section")
        section.append(col)
    mult = B.multiplication_matrix(x)

    def act(v: Sequence[Any]) -> list[Any]:
        out = []
        for j in range(g):
            block = v[j * N:(j + 1) * N]
            out.extend(sum((mult[k, l] * block[l] for l in range(N)), dom.zero)
                       for k in range(N))
        return out

    images = [Pmat.apply(act(s)) for s in section]
    return [[images[b][a] for b in range(m)] for a in range(m)], m


def annihilator_dimension(u: RingMap, M: FPModule) -> int:
    """dim_K of {z in M (x)_K M : (x (x) 1 - 1 (x) x) z = 0 for every variable x}."""
    A, B = u.source, u.target
    if A.nvars or A.ideal_gens or B.regime != "field" or B.monomial_basis is None:
        raise DomainError("the annihilator oracle needs B finite over a base field")
    if M.ring is not B:
        raise DomainError("the module does not live over the target ring")
    dom = B.base.domain
    stack: list[list[Any]] = []
    m = None
    for x in B.gens:
        X, m = _module_action(M, x)
        stack.extend(_kron_difference(X, dom.zero))
    if m is None:
        m = _module_action(M, B.one)[1]
    if not stack:
        return m * m
    L = ExactMatrix(B.base, len(stack), m * m, tuple(tuple(r) for r in stack))
    return m * m - L.rank()


# -- Sq of Z/n over Z: the explicit Hom complex --

# E = Lambda(e1, e2): basis labels by degree
_E_BASIS = {0: ("1",), -1: ("e1", "e2"), -2: ("e12",)}


def _d_exterior(n: int, b: str) -> dict[str, int]:
    return {"1": {}, "e1": {"1": n}, "e2": {"1": n}, "e12": {"e1": -n, "e2": n}}[b]


def _times_difference(b: str) -> dict[str, int]:
    """(e1 - e2) * b."""
    return {"1": {"e1": 1, "e2": -1}, "e1": {"e12": 1}, "e2": {"e12": 1}, "e12": {}}[b]


def _hom_basis(i: int) -> list[tuple[int, str]]:
    out = []
    for k in range(max(0, math.ceil(i / 2)), (i + 2) // 2 + 1):
        out.extend((k, b) for b in _E_BASIS.get(i - 2 * k, ()))
    return out


def _hom_differential(n: int, i: int) -> list[list[int]]:
    """Rows of d^i : Hom^i -> Hom^{i+1}, (d phi)_k = d_E phi_k - (e1 - e2) phi_{k-1}."""
    src, tgt = _hom_basis(i), _hom_basis(i + 1)
    index = {key: r for r, key in enumerate(tgt)}
    rows = [[0] * len(src) for _ in tgt]
    for c, (k, b) in enumerate(src):
        for b2, coeff in _d_exterior(n, b).items():
            rows[index[(k, b2)]][c] += coeff
        for b2, coeff in _times_difference(b).items():
            rows[index[(k + 1, b2)]][c] -= coeff
    return rows


def _integral_cohomology(d_out: list[list[int]], d_in: list[list[int]], rank: int
                         ) -> tuple[tuple[int, ...], int]:
    """(torsion factors, free rank) of ker d_out / im d_in on Z^rank."""
    if rank == 0:
        return (), 0
    if d_out:
        K = kernel_basis(ExactMatrix.from_rows(ZZ_BASE, d_out, rank))
    else:
        K = [tuple(1 if i == j else 0 for i in range(rank)) for j in range(rank)]
    k = len(K)
    if k == 0:
        return (), 0
    Kmat = ExactMatrix.from_columns(ZZ_BASE, K, rank)
    columns = [tuple(row[c] for row in d_in) for c in range(len(d_in[0]))] if d_in else []
    coords = []
    for col in columns:
        c = solve_linear(Kmat, col)
        if c is None:
            raise ArithmeticError("a boundary is not a cycle")
        coords.append(c)
    if not coords:
        return (), k
    factors = invariant_factors(ExactMatrix.from_columns(ZZ_BASE, coords, k))
    return tuple(d for d in factors if d > 1), k - len(factors)


def hom_expansion(n: int, window: tuple[int, int]) -> dict[int, tuple[tuple[int, ...], int]]:
    """H^i of the square of Z/n over Z for i in the window, as (factors, free rank)."""
    if not 1 < n <= MAX_HOM_MODULUS:
        raise DomainError(f"modulus {n} outside the oracle range 2..{MAX_HOM_MODULUS}")
    out = {}
    for i in range(window[0], window[1] + 1):
        rank = len(_hom_basis(i))
        d_out = _hom_differential(n, i) if _hom_basis(i + 1) else []
        d_in = _hom_differential(n, i - 1) if _hom_basis(i - 1) and rank else []
        out[i] = _integral_cohomology(d_out, d_in, rank)
    return out


def _cyclic_modulus(u: RingMap) -> int:
    A, B = u.source, u.target
    if A.base.kind != "ZZ" or A.nvars or A.ideal_gens or B.nvars or len(B.ideal_gens) != 1:
        raise DomainError("the Hom oracle needs Z -> Z/n")
    value = B.ideal_gens[0].get(B.zero_monom)
    if value is None:
        raise DomainError("the relation of Z/n is not a constant")
    return abs(int(value))


def _pipeline_module(X: Complex) -> FPModule:
    if X.support != (0, 0):
        raise DomainError("the oracle compares a module placed in degree 0")
    return X.piece(0)


def compare_sq(u: RingMap, X: Complex, window: tuple[int, int] = DEFAULT_WINDOW,
               depth: int = DEFAULT_DEPTH) -> OracleResult:
    """Run sq through the pipeline and through the matching brute-force path."""
    M = _pipeline_module(X)
    out = OracleResult("sq")
    B = u.target
    if B.base.is_field:
        if not window[0] <= 0 <= window[1]:
            raise DomainError("the annihilator oracle reports H^0; put 0 in the window")
        oracle = annihilator_dimension(u, M)
        piped = sq_object(u, X, window, depth).cohomology.get(0)
        if piped is None:
            raise UndeterminedError("H^0 is undetermined in the pipeline", degree=0,
                                    window=window)
        out.add("dim H^0", piped.dimension(), oracle)
        return out
    if M.ngens != 1 or M.relations:
        raise DomainError("the Hom oracle takes M = B")
    n = _cyclic_modulus(u)
    expected = hom_expansion(n, window)
    result = sq_object(u, X, window, depth)
    for i in sorted(expected):
        H = result.cohomology.get(i)
        if H is None:
            out.notes.append(f"H^{i} undetermined in the pipeline; not compared")
            continue
        inv = H.invariants()
        piped = (tuple(inv.factors), inv.free_rank or 0)
        out.add(f"H^{i} (factors, free rank)", piped, expected[i])
    return out


# -- Groebner bases against sympy --

def _sympy_order(ring: PresentedRing) -> str:
    name = ring.order.name
    if name not in ("lex", "grevlex"):
        raise DomainError(f"sympy has no {name} order")
    return name


def _normalized(polys: Sequence[Any], gens: Sequence[sympy.Symbol], domain: Any) -> frozenset:
    out = set()
    for p in polys:
        P = sympy.Poly(p, *gens, domain=domain)
        if not P.is_zero:
            out.add(tuple(sorted(P.monic().terms())))
    return frozenset(out)


def compare_groebner(ring: PresentedRing, generators: Sequence[Any] | None = None) -> OracleResult:
    if not ring.base.is_field:
        raise DomainError("the Groebner oracle needs a field base ring")
    if not ring.nvars:
        raise DomainError("the Groebner oracle needs at least one variable")
    gens = list(ring.ideal_gens) + list(generators or ())
    ours = buchberger(ring, gens)
    symbols = [sympy.Symbol(v) for v in ring.variables]
    exprs = [g.as_expr() for g in gens if g]
    domain = ring.base.domain
    out = OracleResult("groebner")
    if not exprs:
        out.add("basis size", len(ours), 0)
        return out
    theirs = list(sympy.groebner(exprs, *symbols, order=_sympy_order(ring), domain=domain).exprs)
    left = _normalized([p.as_expr() for p in ours], symbols, domain)
    right = _normalized(theirs, symbols, domain)
    out.add("basis size", len(left), len(right))
    out.add("same reduced basis", left == right, True)
    return out


# -- Smith normal form by minors --

def determinantal_factors(rows: Sequence[Sequence[int]]) -> list[int]:
    """Invariant factors d_k / d_{k-1} with d_k the gcd of the k x k minors."""
    m = len(rows)
    n = len(rows[0]) if m else 0
    if m > MAX_SNF_SIZE or n > MAX_SNF_SIZE:
        raise DomainError(f"minor expansion is capped at {MAX_SNF_SIZE}x{MAX_SNF_SIZE}")
    out = []
    previous = 1
    for k in range(1, min(m, n) + 1):
        d = 0
        for I in itertools.combinations(range(m), k):
            for J in itertools.combinations(range(n), k):
                sub = [[rows[i][j] for j in J] for i in I]
                d = math.gcd(d, int(ExactMatrix.from_rows(ZZ_BASE, sub, k).det()))
        if d == 0:
            break
        out.append(d // previous)
        previous = d
    return out


def compare_snf(rows: Sequence[Sequence[int]]) -> OracleResult:
    out = OracleResult("snf")
    ncols = len(rows[0]) if rows else 0
    ours = invariant_factors(ExactMatrix.from_rows(ZZ_BASE, rows, ncols))
    out.add("invariant factors", ours, determinantal_factors(rows))
    return out


# -- Syzygies by coefficient linear algebra --

def _total_degree(p: Any) -> int:
    return max((sum(m) for m in p.monoms()), default=0)


def _monomials(nvars: int, degree: int) -> list[tuple[int, ...]]:
    return [m for m in itertools.product(range(degree + 1), repeat=nvars) if sum(m) <= degree]


def compare_syzygy(ring: PresentedRing, elements: Sequence[Any]) -> OracleResult:
    """Every relation among ``elements`` of bounded degree lies in the computed syzygy module."""
    if ring.regime != "field":
        raise DomainError("the syzygy oracle needs a field base ring")
    if not elements:
        raise DomainError("no elements to relate")
    r = len(elements)
    main = syzygies(ring, [[f] for f in elements])
    out = OracleResult("syzygy")
    total = []
    for s in main:
        acc = ring.zero
        for a, f in zip(s, elements):
            acc = ring.add(acc, ring.mul(a, f))
        total.append(acc)
    out.add("computed syzygies are relations", all(ring.is_zero(t) for t in total), True)
    bound = max([1] + [_total_degree(a) for s in main for a in s if a])
    monos = _monomials(ring.nvars, bound)
    unknowns = [(i, m) for i in range(r) for m in monos]
    if len(unknowns) > MAX_SYZYGY_UNKNOWNS:
        raise DomainError(f"{len(unknowns)} unknowns exceed the oracle cap {MAX_SYZYGY_UNKNOWNS}")
    dom = ring.base.domain
    images = []
    for i, m in unknowns:
        mono = ring.poly.from_dict({m: dom.one})
        images.append(dict(ring.mul(ring.normal_form(mono), elements[i]).items()))
    support = sorted({m for img in images for m in img})
    rows = [[img.get(m, dom.zero) for img in images] for m in support]
    system = ExactMatrix(ring.base, len(rows), len(unknowns), tuple(tuple(row) for row in rows))
    kernel = kernel_basis(system) if rows else \
        [tuple(dom.one if a == b else dom.zero for a in range(len(unknowns)))
         for b in range(len(unknowns))]
    span = Submodule(ring, r, main)
    missing = 0
    for v in kernel:
        vec = [ring.zero] * r
        for c, (i, m) in zip(v, unknowns):
            if c:
                vec[i] = ring.add(vec[i], ring.poly.from_dict({m: c}))
        if not span.contains(vec):
            missing += 1
    logger.debug("syzygy oracle: %d unknowns, kernel of dimension %d", len(unknowns), len(kernel))
    out.add(f"degree <= {bound} relations outside the module", missing, 0)
    return out
