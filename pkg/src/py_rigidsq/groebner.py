"""Buchberger's algorithm for submodules of free modules over K[x1..xn].

A module element is a dict mapping terms ``(component, monomial)`` to nonzero
coefficients of the field K. Terms are compared position-over-term: a lower
component index beats any monomial, then the monomial order decides. The ideal
case is the rank-1 module with every term in component 0.

The pair bookkeeping (normal selection, Gebauer-Moeller update, minimalize,
interreduce) follows the classic formulation; the product criterion is only
sound for ideals and is switched off for modules.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Any, Iterable, Sequence

logger = logging.getLogger(__name__)

Monomial = tuple[int, ...]
Term = tuple[int, Monomial]
Vector = dict[Term, Any]


@dataclass(frozen=True)
class MonomialOrder:
    """Block order: earlier blocks dominate, degrevlex inside each block.

    ``lex`` is the order with one singleton block per variable, ``grevlex`` the
    order with a single block. Variables are referred to by position.
    """

    nvars: int
    blocks: tuple[tuple[int, ...], ...]
    name: str = "grevlex"

    @classmethod
    def grevlex(cls, nvars: int) -> MonomialOrder:
        return cls(nvars, (tuple(range(nvars)),) if nvars else (), "grevlex")

    @classmethod
    def lex(cls, nvars: int) -> MonomialOrder:
        return cls(nvars, tuple((i,) for i in range(nvars)), "lex")

    @classmethod
    def block(cls, nvars: int, blocks: Sequence[Sequence[int]]) -> MonomialOrder:
        seen = sorted(i for b in blocks for i in b)
        if seen != list(range(nvars)):
            raise ValueError(f"blocks {blocks} do not partition {nvars} variables")
        return cls(nvars, tuple(tuple(b) for b in blocks if b), "block")

    @classmethod
    def named(cls, name: str, nvars: int) -> MonomialOrder:
        if name == "lex":
            return cls.lex(nvars)
        if name in ("grevlex", "degrevlex"):
            return cls.grevlex(nvars)
        raise ValueError(f"unknown monomial order {name!r}")

    def key(self, monom: Monomial) -> tuple:
        out = []
        for b in self.blocks:
            sub = [monom[i] for i in b]
            out.append((sum(sub), tuple(-e for e in reversed(sub))))
        return tuple(out)

    def term_key(self, term: Term) -> tuple:
        return (-term[0], self.key(term[1]))

    def permuted(self, perm: Sequence[int], nvars: int) -> MonomialOrder:
        """The same order after moving old variable i to position ``perm[i]``."""
        return MonomialOrder(nvars, tuple(tuple(perm[i] for i in b) for b in self.blocks),
                             self.name)

    def __str__(self) -> str:
        if self.name == "block":
            return "block" + "".join(str(list(b)) for b in self.blocks)
        return self.name


# -- Monomial helpers --

def monomial_mul(a: Monomial, b: Monomial) -> Monomial:
    return tuple(x + y for x, y in zip(a, b))


def monomial_div(a: Monomial, b: Monomial) -> Monomial | None:
    """Return a / b or None if b does not divide a."""
    out = tuple(x - y for x, y in zip(a, b))
    return None if any(e < 0 for e in out) else out


def monomial_lcm(a: Monomial, b: Monomial) -> Monomial:
    return tuple(max(x, y) for x, y in zip(a, b))


def term_divides(a: Term, b: Term) -> bool:
    return a[0] == b[0] and all(x <= y for x, y in zip(a[1], b[1]))


# -- Vector helpers --

class Engine:
    """Arithmetic context: coefficient field plus monomial order."""

    def __init__(self, domain: Any, order: MonomialOrder) -> None:
        self.domain = domain
        self.order = order

    def lead(self, v: Vector) -> Term:
        return max(v, key=self.order.term_key)

    def monic(self, v: Vector) -> Vector:
        lt = self.lead(v)
        c = v[lt]
        if c == self.domain.one:
            return dict(v)
        inv = self.domain.quo(self.domain.one, c)
        return {t: a * inv for t, a in v.items()}

    def add_multiple(self, target: Vector, source: Vector, coeff: Any,
                     shift: Monomial) -> None:
        """In place: target += coeff * x^shift * source."""
        for (comp, m), a in source.items():
            t = (comp, monomial_mul(m, shift))
            val = target.get(t, self.domain.zero) + coeff * a
            if val:
                target[t] = val
            else:
                target.pop(t, None)

    def spoly(self, f: Vector, g: Vector, lf: Term, lg: Term) -> Vector:
        """S-vector of two elements whose leading terms share a component."""
        lcm = monomial_lcm(lf[1], lg[1])
        out: Vector = {}
        self.add_multiple(out, f, self.domain.quo(self.domain.one, f[lf]),
                          monomial_div(lcm, lf[1]))
        self.add_multiple(out, g, -self.domain.quo(self.domain.one, g[lg]),
                          monomial_div(lcm, lg[1]))
        return out

    def reduce(self, g: Vector, G: Sequence[Vector], leads: Sequence[Term],
               full: bool = True) -> Vector:
        """Remainder of g on division by G (leading terms ``leads``)."""
        by_comp: dict[int, list[int]] = {}
        for i, lt in enumerate(leads):
            by_comp.setdefault(lt[0], []).append(i)
        work = dict(g)
        rem: Vector = {}
        key = self.order.term_key
        while work:
            lt = max(work, key=key)
            c = work[lt]
            for i in by_comp.get(lt[0], ()):
                q = monomial_div(lt[1], leads[i][1])
                if q is not None:
                    h = G[i]
                    self.add_multiple(work, h, -self.domain.quo(c, h[leads[i]]), q)
                    break
            else:
                if not full:
                    rem.update(work)
                    return rem
                rem[lt] = c
                del work[lt]
        return rem


# -- Buchberger --

def select(G: Sequence[Vector], P: set[tuple[int, int]], leads: Sequence[Term],
           order: MonomialOrder) -> tuple[int, int]:
    """Normal strategy: the pair with the smallest lcm term."""
    def pair_key(p: tuple[int, int]) -> tuple:
        i, j = p
        lcm = (leads[i][0], monomial_lcm(leads[i][1], leads[j][1]))
        return (order.term_key(lcm), p)
    return min(P, key=pair_key)


def update(G: list[Vector], P: set[tuple[int, int]], f: Vector, lf: Term,
           leads: list[Term], order: MonomialOrder, ideal: bool) -> None:
    """Add f to G and the new critical pairs to P, pruning by Gebauer-Moeller.

    ``leads`` runs parallel to G and is extended together with it.
    """
    comp, mf = lf

    def lcm_with_f(i: int) -> Monomial | None:
        if leads[i][0] != comp:
            return None
        return monomial_lcm(leads[i][1], mf)

    def keep(p: tuple[int, int]) -> bool:
        i, j = p
        if leads[i][0] != comp:
            return True
        gam = monomial_lcm(leads[i][1], leads[j][1])
        if monomial_div(gam, mf) is None:
            return True
        return gam == lcm_with_f(i) or gam == lcm_with_f(j)

    kept = {p for p in P if keep(p)}
    P.clear()
    P.update(kept)

    lcm_classes: dict[Monomial, list[int]] = {}
    for i in range(len(G)):
        gam = lcm_with_f(i)
        if gam is not None:
            lcm_classes.setdefault(gam, []).append(i)
    minimal: list[Monomial] = []
    for gam in sorted(lcm_classes, key=order.key):
        if all(monomial_div(gam, other) is None for other in minimal):
            minimal.append(gam)
    m = len(G)
    for gam in minimal:
        members = lcm_classes[gam]
        if ideal and any(gam == monomial_mul(leads[i][1], mf) for i in members):
            continue
        P.add((min(members), m))
    G.append(f)
    leads.append(lf)


def minimalize(G: Sequence[Vector], engine: Engine) -> list[Vector]:
    out: list[Vector] = []
    out_leads: list[Term] = []
    for f in sorted(G, key=lambda h: engine.order.term_key(engine.lead(h))):
        lf = engine.lead(f)
        if all(not term_divides(lg, lf) for lg in out_leads):
            out.append(f)
            out_leads.append(lf)
    return out


def interreduce(G: Sequence[Vector], engine: Engine) -> list[Vector]:
    leads = [engine.lead(g) for g in G]
    red = []
    for i, g in enumerate(G):
        others = [h for j, h in enumerate(G) if j != i]
        other_leads = [lt for j, lt in enumerate(leads) if j != i]
        r = engine.reduce(g, others, other_leads)
        red.append(engine.monic(r))
    red.sort(key=lambda h: engine.order.term_key(engine.lead(h)), reverse=True)
    return red


def buchberger(F: Iterable[Vector], domain: Any, order: MonomialOrder, *,
               ideal: bool = False) -> list[Vector]:
    """Return the reduced Groebner basis of the submodule generated by F."""
    engine = Engine(domain, order)
    G: list[Vector] = []
    leads: list[Term] = []
    P: set[tuple[int, int]] = set()
    for f in F:
        if not f:
            continue
        f = engine.monic(f)
        update(G, P, f, engine.lead(f), leads, order, ideal)
    reductions = 0
    while P:
        i, j = select(G, P, leads, order)
        P.remove((i, j))
        s = engine.spoly(G[i], G[j], leads[i], leads[j])
        r = engine.reduce(s, G, leads)
        reductions += 1
        if r:
            r = engine.monic(r)
            update(G, P, r, engine.lead(r), leads, order, ideal)
    logger.debug("buchberger: %d generators, %d reductions, basis size %d",
                 len(leads), reductions, len(G))
    return interreduce(minimalize(G, engine), engine)


def standard_monomials(leads: Iterable[Monomial], nvars: int,
                       limit: int = 100000) -> list[Monomial] | None:
    """Monomials divisible by no lead, or None when there are infinitely many."""
    leads = list(leads)
    if any(all(e == 0 for e in m) for m in leads):
        return []
    bounds = []
    for v in range(nvars):
        pure = [m[v] for m in leads if all(e == 0 for k, e in enumerate(m) if k != v) and m[v] > 0]
        if not pure:
            return None
        bounds.append(min(pure))
    out: list[Monomial] = []

    def rec(prefix: list[int]) -> None:
        if len(out) > limit:
            raise ValueError("quotient too large to enumerate")
        if len(prefix) == nvars:
            mono = tuple(prefix)
            if all(monomial_div(mono, m) is None for m in leads):
                out.append(mono)
            return
        for e in range(bounds[len(prefix)]):
            rec(prefix + [e])

    rec([])
    return out


def is_groebner(G: Sequence[Vector], engine: Engine) -> bool:
    """S-vector criterion: every same-component S-vector reduces to zero."""
    leads = [engine.lead(g) for g in G]
    for i in range(len(G)):
        for j in range(i + 1, len(G)):
            if leads[i][0] != leads[j][0]:
                continue
            s = engine.spoly(G[i], G[j], leads[i], leads[j])
            if engine.reduce(s, G, leads):
                return False
    return True
