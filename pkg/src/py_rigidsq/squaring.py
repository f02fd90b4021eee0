"""The squaring operation on complexes and on morphisms.

For a ring map A -> B and a complex M over B a chain model of Sq_{B/A} M is

    S = Hom_E(P, tau^{>=c}(M~ (x)_A M~)),    E = B~ (x)_A B~,

with B~ a semi-free resolution of B over A, M~ -> M a semi-free resolution over
B~, P -> B a semi-free resolution of B over E and c a degree below which
M (x)^L_A M has no cohomology. B acts through the first factor, and cohomology
is reported over B along the multiplication E^0 -> B.

The exchange morphism Hom(P, M) (x) Q -> Hom(P, M (x) Q) and the cup product
on Koszul models of polynomial extensions live here too.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from functools import cached_property
from typing import Any, Sequence

from sympy.polys.rings import PolyElement

from py_rigidsq.dgalgebra import (
    DGAlgebraMap, Mono, TensorAlgebra, cached_tensor_rings, multiplication_map,
    tensor_algebra_map, tensor_algebras, trivial_algebra,
)
from py_rigidsq.dgcore import (
    Complex, ComplexMap, ComplexTensor, InducedMap, QuasiIsoCertificate, induced_map,
    is_flat_over, is_quasi_iso, restrict_complex, scalar_restriction, tensor_fp, tensor_product,
)
from py_rigidsq.dgmodule import (
    AlgebraExtension, AugmentedModule, ChainMap, ComposedMap, DGModule, FlatModule, HomModule,
    ModElement, PreComposition, RestrictedModule, SemiFreeModule, TensorModule, TruncatedModule,
    lift_chain_map, regular_module, restrict_module,
)
from py_rigidsq.errors import (
    CertificateError, DomainError, UndeterminedError, UnsupportedRingError,
)
from py_rigidsq.polyring import FPModule, Matrix, PresentedRing, RingMap, TensorRing, Vector
from py_rigidsq.resolve import (
    DEFAULT_DEPTH, KoszulComplex, ModuleResolution, SemifreeResolution, extend_resolution,
    flat_resolution, identity_along, koszul, new_generators, semifree_algebra_resolution,
    semifree_module_resolution,
)

logger = logging.getLogger(__name__)

DEFAULT_WINDOW = (-4, 0)

CUP_CONDITIONS = ("smooth", "flat", "perfect")


def _support(M: Complex) -> tuple[int, int]:
    sup = M.support
    return sup if sup is not None else (0, 0)


def _label(M: Complex) -> str:
    return M.name or "M"


# -- Cutoffs and depths --

def global_dimension(A: PresentedRing) -> int:
    """An upper bound for the global dimension of A: its variables, plus one over ZZ."""
    if A.localization is not None:
        return global_dimension(A.localization.parent)
    if A.ideal_gens:
        raise UnsupportedRingError(f"no global dimension bound for {A}; give the cutoff")
    return A.nvars + (0 if A.base.is_field else 1)


def cutoff_for(A: PresentedRing, complexes: Sequence[Complex]) -> int:
    """A degree below which M (x)^L_A M has no cohomology, for each complex M."""
    lows = [C.support[0] for C in complexes if C.support is not None]
    return 2 * (min(lows) if lows else 0) - global_dimension(A)


def required_depth(window: tuple[int, int], cutoff: int, top: int, depth: int) -> int:
    """How far down B~ must be complete for the window above the cutoff."""
    return max(depth, 2 * top - cutoff + 1, window[1] + 2 - cutoff)


# -- Chain models --

@dataclass
class SqModel:
    """A chain model of Sq_{B/A} M together with every choice made to build it."""

    structure: RingMap
    resolution: SemifreeResolution
    complex: Complex
    module: ModuleResolution
    tensor: TensorModule
    truncated: TruncatedModule
    diagonal: ModuleResolution
    hom: HomModule
    multiplication: RingMap
    cutoff: int
    window: tuple[int, int]

    @property
    def ring(self) -> PresentedRing:
        return self.structure.target

    @property
    def algebra(self) -> TensorAlgebra:
        return self.tensor.tensor

    def flatten(self) -> Complex:
        lo, hi = self.window
        return self.hom.flatten(lo - 1, hi + 1)

    def cohomology(self, i: int) -> FPModule:
        """H^i over B; degrees below the cutoff vanish."""
        if i < self.cutoff:
            return FPModule(self.ring, 0)
        lo, hi = self.window
        if not lo <= i <= hi:
            raise UndeterminedError(f"H^{i} lies outside the window [{lo}, {hi}]", degree=i,
                                    window=self.window)
        return self.flatten().cohomology(i).module.base_change(self.multiplication)

    def report(self) -> tuple[RingMap, RingMap]:
        return (self.multiplication, self.multiplication)

    def verify(self) -> dict[str, QuasiIsoCertificate]:
        """The three resolutions behind the model, each checked on its own window."""
        return {"algebra": self.resolution.verify(), "module": self.module.verify(),
                "diagonal": self.diagonal.verify()}

    def trace_lines(self) -> list[str]:
        out = [f"cutoff {self.cutoff}, window {self.window[0]}..{self.window[1]}"]
        out += [f"B~ {line}" for line in self.resolution.trace_lines()]
        out += [f"M~ {line}" for line in self.module.trace_lines()]
        out += [f"P  {line}" for line in self.diagonal.trace_lines()]
        return out


@dataclass
class SqResult:
    """Cohomology of Sq_{B/A} M in a window; None marks an undetermined degree."""

    model: SqModel | None
    window: tuple[int, int]
    cohomology: dict[int, FPModule | None] = field(default_factory=dict)

    def undetermined(self) -> list[int]:
        return [i for i, H in self.cohomology.items() if H is None]

    def nonzero_degrees(self) -> list[int]:
        return [i for i, H in sorted(self.cohomology.items()) if H is not None and not H.is_zero()]

    def rows(self) -> list[list[str]]:
        out = []
        for i in sorted(self.cohomology):
            H = self.cohomology[i]
            out.append([str(i), "undetermined" if H is None else H.invariants().describe()])
        return out


def _module_target(res: SemifreeResolution, M: Complex) -> DGModule:
    if res.augmentation.is_identity and res.algebra is trivial_algebra(M.ring):
        return FlatModule(M)
    return AugmentedModule(res.algebra, res.augmentation, M)


def build_model(res: SemifreeResolution, M: Complex, window: tuple[int, int] = DEFAULT_WINDOW,
                cutoff: int | None = None, module_lo: int | None = None,
                module: ModuleResolution | None = None, margin: int = 0) -> SqModel:
    """Assemble the model from a chosen resolution of B; ``margin`` deepens P."""
    A, B = res.source, res.target
    if M.ring is not B:
        raise DomainError(f"{_label(M)} does not live over {B}")
    c = cutoff_for(A, [M]) if cutoff is None else cutoff
    top = _support(M)[1]
    lo_mod = c - 1 - top if module_lo is None else module_lo
    lo, hi = max(window[0], c), window[1]
    if module is None:
        module = semifree_module_resolution(_module_target(res, M), lo_mod,
                                            name=f"{_label(M)}~")
    TA = tensor_algebras(res.algebra, res.algebra, A, res.base_map, res.base_map)
    T = TensorModule(module.module, module.module, TA, name=f"{_label(M)}~.{_label(M)}~")
    tT = TruncatedModule(T, "ge", c)
    aug = res.augmentation_map()
    mult = multiplication_map(TA, trivial_algebra(B), aug, aug).ring_map
    point = AugmentedModule(TA.algebra, mult, Complex(B, {0: 1}, name=str(B)))
    diagonal = semifree_module_resolution(point, c - hi - 1 - margin, name="P")
    S = HomModule(diagonal.module, tT, name=f"Sq({_label(M)})")
    logger.info("Sq model of %s over %s: %d + %d generators, cutoff %d",
                _label(M), B, module.module.ngens, diagonal.module.ngens, c)
    return SqModel(res.structure, res, M, module, T, tT, diagonal, S, mult, c, (lo, hi))


def sq_model(u: RingMap, M: Complex, window: tuple[int, int] = DEFAULT_WINDOW,
             depth: int = DEFAULT_DEPTH, resolution: SemifreeResolution | None = None,
             cutoff: int | None = None) -> SqModel:
    if M.ring is not u.target:
        raise DomainError(f"{_label(M)} does not live over {u.target}")
    c = cutoff_for(u.source, [M]) if cutoff is None else cutoff
    if resolution is None:
        resolution = semifree_algebra_resolution(
            u, required_depth(window, c, _support(M)[1], depth))
    elif resolution.source is not u.source or resolution.target is not u.target:
        raise DomainError("the resolution belongs to another ring map")
    return build_model(resolution, M, window, c)


def _result(model: SqModel, window: tuple[int, int]) -> SqResult:
    out: dict[int, FPModule | None] = {}
    for i in range(window[0], window[1] + 1):
        try:
            out[i] = model.cohomology(i)
        except UndeterminedError:
            logger.warning("H^%d of %s is undetermined; widen the depth", i, model.hom.name)
            out[i] = None
    return SqResult(model, window, out)


def _zero_result(B: PresentedRing, window: tuple[int, int]) -> SqResult:
    return SqResult(None, window, {i: FPModule(B, 0) for i in range(window[0], window[1] + 1)})


def sq_object(u: RingMap, M: Complex, window: tuple[int, int] = DEFAULT_WINDOW,
              depth: int = DEFAULT_DEPTH, resolution: SemifreeResolution | None = None,
              cutoff: int | None = None) -> SqResult:
    """H^i(Sq_{B/A} M) for i in the window, through a semi-free resolution of u : A -> B."""
    if M.support is None:
        return _zero_result(u.target, window)
    return _result(sq_model(u, M, window, depth, resolution, cutoff), window)


def _flat_model(M: Complex, lo: int) -> ModuleResolution:
    """M itself when it is free, else a semi-free resolution over B."""
    target = FlatModule(M)
    if not M.is_free():
        return semifree_module_resolution(target, lo, name=f"{_label(M)}~")
    Mt = SemiFreeModule.from_complex(M, name=_label(M))
    values = [M.ring.unit_vector(M.rank(d), j - Mt.degree_offsets[d])
              for j, d in enumerate(Mt.degrees)]
    return ModuleResolution(target, Mt, ChainMap(Mt, target, values), lo)


def check_flat(u: RingMap, M: Complex) -> None:
    """Refuse unless B and every piece of M carry a flatness certificate over A."""
    A, B = u.source, u.target
    if not is_flat_over(FPModule(B, 1), u):
        raise CertificateError(f"{B} is not certified flat over {A}")
    sup = M.support
    if sup is None:
        return
    for i in range(sup[0], sup[1] + 1):
        if M.rank(i) and not is_flat_over(M.piece(i), u):
            raise CertificateError(f"piece {i} of {_label(M)} is not certified flat over {A}")


def sq_flat(u: RingMap, M: Complex, window: tuple[int, int] = DEFAULT_WINDOW,
            cutoff: int | None = None) -> SqResult:
    """Sq_{B/A} M with B~ = B, for B and the pieces of M flat over A."""
    check_flat(u, M)
    if M.support is None:
        return _zero_result(u.target, window)
    c = cutoff_for(u.source, [M]) if cutoff is None else cutoff
    lo_mod = c - 1 - _support(M)[1]
    model = build_model(flat_resolution(u), M, window, c, lo_mod, _flat_model(M, lo_mod))
    return _result(model, window)


# -- Morphisms --

def _finite_case(u: RingMap) -> bool:
    B, C = u.source, u.target
    return (not B.nvars and not B.ideal_gens and C.monomial_basis is not None
            and not u.is_surjective())


def morphism_models(structure: RingMap, u: RingMap, N: Complex, M: Complex,
                    window: tuple[int, int] = DEFAULT_WINDOW, depth: int = DEFAULT_DEPTH,
                    resolution: SemifreeResolution | None = None,
                    cutoff: int | None = None) -> tuple[SqModel, SqModel]:
    """Models of Sq_{C/A} N and Sq_{B/A} M that ``sq_morphism`` can connect.

    structure : A -> B and u : B -> C. An onto u extends the resolution of B by
    new variables; a finite flat C over a base B without variables is used as is.
    """
    A, B, C = structure.source, structure.target, u.target
    if u.source is not B or N.ring is not C or M.ring is not B:
        raise DomainError("complexes do not sit over the ring maps")
    c = cutoff_for(A, [M, N]) if cutoff is None else cutoff
    top = max(_support(M)[1], _support(N)[1])
    lo_mod = c - 1 - top
    need = required_depth(window, c, top, depth) + 1
    if _finite_case(u):
        composite = u.compose(structure)
        check_flat(structure, M)
        check_flat(composite, N)
        res_b = resolution or flat_resolution(structure)
        res_c = flat_resolution(composite)
        target = build_model(res_b, M, window, c, lo_mod, _flat_model(M, lo_mod))
        source = build_model(res_c, N, window, c, lo_mod, _flat_model(N, lo_mod), margin=1)
        return source, target
    res_b = resolution or semifree_algebra_resolution(structure, need)
    res_c = extend_resolution(res_b, u, need)
    target = build_model(res_b, M, window, c, lo_mod)
    source = build_model(res_c, N, window, c, lo_mod, margin=1)
    return source, target


def _zeros_below(module: SemiFreeModule, target: DGModule, lo: int) -> dict[int, Vector]:
    """Zero values for generators below the degree where the target is complete."""
    return {j: target.ring.vzero(target.rank(d)) for j, d in enumerate(module.degrees) if d < lo}


@dataclass
class SqMorphism:
    """Sq_u(phi) : Sq_{C/A} N -> Sq_{B/A} M for u : B -> C and phi : N|_B -> M.

    At chain level it is phi~ (x) phi~ on the tensor factors composed with
    precomposition by the lift P_B -> P_C of the diagonal resolutions.
    """

    structure: RingMap
    phi: ComplexMap
    source: SqModel
    target: SqModel
    extension: AlgebraExtension
    iota: DGAlgebraMap
    diagonal_lift: ChainMap
    restricted: RestrictedModule
    module_lift: ChainMap
    _keys: dict[tuple, Vector] = field(default_factory=dict, repr=False)

    @property
    def window(self) -> tuple[int, int]:
        return self.target.window

    @property
    def report(self) -> tuple[RingMap, RingMap]:
        return self.target.report()

    @cached_property
    def precomposition(self) -> PreComposition:
        mid = HomModule(self.target.diagonal.module, self.source.truncated, self.iota,
                        name="Hom(P_B, tT_N)")
        return PreComposition(self.diagonal_lift, self.source.hom, mid)

    # phi~ on elements of N~, through the restricted module

    def _image(self, elem: ModElement, degree: int) -> ModElement:
        Nt = self.source.module.module
        Mt = self.target.module.module
        w = self.restricted.restrict_vector(Nt.vector(elem, degree), degree)
        return Mt.element(self.module_lift.apply(degree, w), degree)

    def _split(self, c: PolyElement) -> list[tuple[PolyElement, PolyElement, PolyElement]]:
        """c in E_C^0 as a sum of lambda * (b1 (x) b2) with lambda in E_B^0."""
        if self.extension.kind == "variables":
            one = self.source.resolution.algebra.ring.one
            return [(c, one, one)]
        E = self.source.algebra.algebra.ring
        K = self.target.algebra.algebra.ring
        C = self.structure.target
        n = C.nvars
        unit = C.base.domain.one
        out = []
        for mono, x in zip(E.monomial_basis, E.coordinates(c)):
            if x:
                b1 = C.normal_form(C.poly.from_dict({mono[:n]: unit}))
                b2 = C.normal_form(C.poly.from_dict({mono[n:]: unit}))
                out.append((K.const(x), b1, b2))
        return out

    def _on_key(self, i: int, key: tuple[Mono, int], b1: PolyElement,
                b2: PolyElement) -> Vector:
        C = self.structure.target
        cache_key = (i, key, C.to_str(b1), C.to_str(b2))
        if cache_key in self._keys:
            return self._keys[cache_key]
        TN, TM = self.source.tensor, self.target.tensor
        Ct = self.source.resolution.algebra
        Nt = self.source.module.module
        m, n = key
        j, k = TN.pairs[n]
        m1, m2 = m[:Ct.nvars], m[Ct.nvars:]
        x = self._image({(m1, j): b1}, Ct.mono_degree(m1) + Nt.degrees[j])
        y = self._image({(m2, k): b2}, Ct.mono_degree(m2) + Nt.degrees[k])
        v = TM.vector(TM.tensor_elements(x, y), i)
        if (Ct.mono_degree(m2) * Nt.degrees[j]) % 2:
            v = TM.ring.vneg(v)
        self._keys[cache_key] = v
        return v

    def tensor_image(self, v: Sequence[Any], i: int) -> Vector:
        """(phi~ (x) phi~)(v) for v in piece i of N~ (x) N~."""
        TN, TM = self.source.tensor, self.target.tensor
        ring = TM.ring
        out = ring.vzero(TM.rank(i))
        for key, c in zip(TN.basis(i), v):
            if not c:
                continue
            for lam, b1, b2 in self._split(c):
                out = ring.vadd(out, ring.vscale(lam, self._on_key(i, key, b1, b2)))
        return out

    @cached_property
    def _complex_map(self) -> ComplexMap:
        lo, hi = self.window
        full = self.source.hom.flatten(lo - 1, hi + 1)
        restriction = scalar_restriction(self.iota.ring_map)
        X = restriction.complex(full)
        Y = self.target.flatten()
        pre = self.precomposition
        mid = pre.target
        SB = self.target.hom
        mats = {}
        for k in range(lo - 1, hi + 2):
            cols = []
            for e in restriction.basis(full.rank(k)):
                blocks = mid.values(pre.apply(k, e), k)
                values = [self.tensor_image(blk, d + k) if len(blk) else blk
                          for d, blk in zip(mid.source.degrees, blocks)]
                cols.append(SB.from_values(values, k))
            mats[k] = Matrix(Y.rank(k), len(cols), tuple(cols))
        return ComplexMap(X, Y, RingMap.identity(Y.ring), mats)

    def complex_map(self) -> ComplexMap:
        """The map on the flattened windows, over E_B^0."""
        return self._complex_map

    def induced(self, i: int) -> InducedMap:
        if i < self.target.cutoff:
            B = self.target.ring
            return InducedMap(i, FPModule(B, 0), FPModule(B, 0), [])
        return induced_map(self.complex_map(), i, self.report)

    def is_quasi_iso(self) -> QuasiIsoCertificate:
        return is_quasi_iso(self.complex_map(), self.window, self.report)

    def acts_as(self, i: int, a: Any) -> bool:
        """Whether H^i of the map is multiplication by a in B (source and target models agree)."""
        H = self.induced(i)
        ring = H.target.ring
        a = ring(a)
        if H.source.ngens != H.target.ngens:
            return False
        for k, col in enumerate(H.columns):
            diff = ring.vsub(col, ring.vscale(a, ring.unit_vector(H.target.ngens, k)))
            if not H.target.is_zero_element(diff):
                return False
        return True

    def rows(self) -> list[list[str]]:
        out = []
        lo, hi = self.window
        for i in range(lo, hi + 1):
            H = self.induced(i)
            out.append([str(i), H.source.invariants().describe(),
                        H.target.invariants().describe(), "yes" if H.is_iso() else "no"])
        return out


def sq_morphism(u: RingMap, phi: ComplexMap, source: SqModel, target: SqModel) -> SqMorphism:
    """Sq_u(phi) for phi : N|_B -> M over B, N over C = u.target.

    ``source`` models Sq_{C/A} N and ``target`` models Sq_{B/A} M; they come from
    ``morphism_models`` or are the same model for u = 1.
    """
    B, C = u.source, u.target
    if target.ring is not B or source.ring is not C \
            or source.structure.source is not target.structure.source:
        raise DomainError("the models do not sit over the ring map")
    if source.cutoff != target.cutoff or source.window != target.window:
        raise DomainError("models with different cutoffs or windows")
    N, M = source.complex, target.complex
    if phi.source is not restrict_complex(N, u) or phi.target is not M \
            or not phi.ring_map.is_identity:
        raise DomainError("phi must map N, restricted along u, to M over B")
    Bt, Ct = target.resolution.algebra, source.resolution.algebra
    if Ct.ring is Bt.ring:
        ext = AlgebraExtension.by_variables(Bt, Ct)
    elif not Bt.nvars and not Ct.nvars and Bt.ring is B and Ct.ring is C:
        ext = AlgebraExtension.finite(u)
    else:
        raise UnsupportedRingError(f"no chained resolutions for {B} -> {C}")
    iota = tensor_algebra_map(target.algebra, source.algebra, ext.inclusion, ext.inclusion)
    PB, PC = target.diagonal, source.diagonal
    if PB is PC:
        unit = PB.module.algebra.unit_mono
        g = ChainMap(PB.module, PB.module,
                     [PB.module.vector({(unit, j): PB.module.ring.one}, d)
                      for j, d in enumerate(PB.module.degrees)], 0, iota)
    else:
        along = ComposedMap(PB.augmentation, identity_along(PB.target, PC.target, iota))
        g = lift_chain_map(PB.module, PC.module, PC.augmentation, along, iota,
                           prescribed=_zeros_below(PB.module, PC.module, PC.lo + 1))
    Mres, Nres = target.module, source.module
    rn_lo = Mres.lo + 1
    RN = restrict_module(Nres.module, ext, rn_lo)
    restriction = scalar_restriction(u)
    unit = RN.algebra.unit_mono
    values = []
    for j, d in enumerate(RN.degrees):
        if d < rn_lo:
            values.append(Mres.target.ring.vzero(Mres.target.rank(d)))
            continue
        x = RN.extend_vector(RN.vector({(unit, j): RN.ring.one}, d), d)
        y = Nres.augmentation.apply(d, x)
        if ext.kind == "variables":
            coords = target.resolution.augmentation.on_vector(y)
        else:
            coords = restriction.vector(y)
        z = phi.apply(d, coords)
        lift = getattr(Mres.target, "lift_vector", None)
        values.append(lift(z) if lift is not None else tuple(z))
    along_m = ChainMap(RN, Mres.target, values)
    phi_t = lift_chain_map(RN, Mres.module, Mres.augmentation, along_m,
                           prescribed=_zeros_below(RN, Mres.module, rn_lo))
    logger.info("Sq of a map %s -> %s over %s (%s)", _label(N), _label(M), B, ext.kind)
    return SqMorphism(u, phi, source, target, ext, iota, g, RN, phi_t)


def identity_morphism(model: SqModel) -> SqMorphism:
    B = model.ring
    return sq_morphism(RingMap.identity(B), model.complex.identity(), model, model)


def scalar_morphism(model: SqModel, c: Any) -> SqMorphism:
    """Sq of multiplication by c on M."""
    B = model.ring
    return sq_morphism(RingMap.identity(B), model.complex.identity().scale(c), model, model)


def agree_on_cohomology(F: ComplexMap, G: ComplexMap, window: tuple[int, int],
                        report: tuple[RingMap, RingMap]) -> bool:
    """Whether two parallel maps induce the same map on H^i for i in the window."""
    D = F.combine(G, -1)
    for i in range(window[0], window[1] + 1):
        H = induced_map(D, i, report)
        if any(not H.target.is_zero_element(c) for c in H.columns):
            return False
    return True


def identity_law(model: SqModel) -> bool:
    """Sq(1_M) is the identity on cohomology."""
    lo, hi = model.window
    mor = identity_morphism(model)
    return all(mor.acts_as(i, 1) for i in range(lo, hi + 1))


def scalar_law(model: SqModel, c: Any) -> bool:
    """Sq(c * 1_M) acts on cohomology as c^2."""
    B = model.ring
    c = B(c)
    lo, hi = model.window
    mor = scalar_morphism(model, c)
    return all(mor.acts_as(i, B.mul(c, c)) for i in range(lo, hi + 1))


def composition_law(outer: SqMorphism, inner: SqMorphism, composite: SqMorphism) -> bool:
    """Sq(phi o psi) agrees with Sq(phi) o Sq(psi) on cohomology."""
    chained = outer.complex_map().compose(inner.complex_map())
    return agree_on_cohomology(composite.complex_map(), chained, composite.window,
                               composite.report)


# -- The exchange morphism --

@dataclass
class ExchangeMorphism:
    """psi : Hom(P, M) (x) Q -> Hom(P, M (x) Q) for resolutions P -> L and Q -> N."""

    complex_map: ComplexMap
    window: tuple[int, int]
    condition: str | None
    certificate: QuasiIsoCertificate | None = None

    @property
    def asserted(self) -> bool:
        return self.certificate is not None and self.certificate.ok

    def rows(self) -> list[list[str]]:
        if self.certificate is None:
            return []
        return [[str(i), left, right, "yes" if good else "no"]
                for i, left, right, good in self.certificate.degrees]


def _free_model(X: Complex, lo: int) -> tuple[SemiFreeModule, bool]:
    """A semi-free model of X and whether it is a finite (closed) resolution."""
    if X.is_free():
        return SemiFreeModule.from_complex(X, name=_label(X)), True
    P = semifree_module_resolution(FlatModule(X), lo, name=f"{_label(X)}~").module
    if P.degrees and min(P.degrees) > lo + 1:
        return SemiFreeModule(P.algebra, P.degrees, P.dgens, P.names, None, P.name), True
    return P, False


def exchange_morphism(L: Complex, M: Complex, N: Complex,
                      window: tuple[int, int] = DEFAULT_WINDOW,
                      depth: int = DEFAULT_DEPTH) -> ExchangeMorphism:
    """The exchange map for complexes over one ring R.

    It is asserted a quasi-isomorphism when L has a finite free resolution or N
    has finite flat dimension; otherwise it is built and left unasserted.
    """
    R = L.ring
    if M.ring is not R or N.ring is not R:
        raise DomainError("the exchange map needs complexes over one ring")
    lo, hi = window
    P, p_closed = _free_model(L, lo - depth)
    Q, q_closed = _free_model(N, lo - depth)
    m_lo, m_hi = _support(M)
    if p_closed and not q_closed:
        need = lo - 2 - (m_hi - min(P.degrees, default=0))
        if Q.complete_lo is not None and need < Q.complete_lo:
            Q, _ = _free_model(N, need)
    elif q_closed and not p_closed:
        need = m_lo + min(Q.degrees, default=0) - hi - 2
        if P.complete_lo is not None and need < P.complete_lo:
            P, _ = _free_model(L, need)
    H = HomModule(P, FlatModule(M))
    Hc = H.flatten(H.bottom, H.top if H.top is not None else H.bottom)
    Qc = Q.flatten()
    left = tensor_product(Hc, Qc)
    MQ = tensor_product(M, Qc)
    right = HomModule(P, FlatModule(MQ.complex, name="M.Q"))
    Y = right.flatten(lo - 1, hi + 1)
    mats = {}
    for n in range(lo - 1, hi + 2):
        cols: list[Vector] = [()] * left.complex.rank(n)
        blocks_n = right.blocks(n)
        for a, b in left.pairs(n):
            blocks_a = H.blocks(a)
            for s in range(Hc.rank(a)):
                j = next(j for j, (off, size) in enumerate(blocks_a) if off <= s < off + size)
                r = s - blocks_a[j][0]
                d = P.degrees[j]
                off = blocks_n[j][0]
                sign = R.const(-1 if (b * d) % 2 else 1)
                for t in range(Qc.rank(b)):
                    v = [R.zero] * Y.rank(n)
                    v[off + MQ.index(d + a, b, r, t)] = sign
                    cols[left.index(a, b, s, t)] = tuple(v)
        mats[n] = Matrix(Y.rank(n), len(cols), tuple(cols))
    F = ComplexMap(left.complex, Y, RingMap.identity(R), mats)
    condition = "perfect source" if p_closed else ("finite flat dimension" if q_closed else None)
    out = ExchangeMorphism(F, window, condition)
    if condition is not None:
        try:
            out.certificate = is_quasi_iso(F, window)
        except UndeterminedError as exc:
            logger.warning("exchange map undetermined in degree %s", exc.degree)
    else:
        logger.info("exchange map built without a finiteness condition; not asserted")
    return out


# -- Koszul models and the cup product --

@dataclass
class KoszulSq:
    """Hom_E(K, M (x)_R M) for B = R[x1..xn] and E = B (x)_R B.

    K is the Koszul complex on x_i (x) 1 - 1 (x) x_i, a free resolution of B over E.
    """

    structure: RingMap
    complex: Complex
    rings: TensorRing
    koszul: KoszulComplex
    diagonal: SemiFreeModule
    tensor: ComplexTensor
    hom: HomModule
    multiplication: RingMap
    names: list[str]

    @cached_property
    def flat(self) -> Complex:
        return self.hom.flatten()

    def monomial(self, j: int) -> Mono:
        """The Koszul monomial behind generator j of the diagonal resolution."""
        P = self.diagonal
        d = P.degrees[j]
        return regular_module(self.koszul.algebra).basis(d)[j - P.degree_offsets[d]][0]

    @cached_property
    def generator_of(self) -> dict[Mono, int]:
        return {self.monomial(j): j for j in range(self.diagonal.ngens)}

    def cohomology(self, i: int) -> FPModule:
        return self.flat.cohomology(i).module.base_change(self.multiplication)

    def degrees(self) -> list[int]:
        sup = self.flat.support
        return [] if sup is None else list(range(sup[0], sup[1] + 1))


def koszul_sq(u: RingMap, M: Complex) -> KoszulSq:
    """The Koszul model of Sq_{B/R} M for a polynomial extension u : R -> B over a field."""
    R, B = u.source, u.target
    if M.ring is not B:
        raise DomainError(f"{_label(M)} does not live over {B}")
    if B.ideal_gens or R.ideal_gens or B.localization is not None or not B.base.is_field:
        raise UnsupportedRingError(f"{R} -> {B} is not a polynomial extension over a field")
    images = [B.to_str(img) for img in u.images]
    if any(name not in B.variables for name in images):
        raise UnsupportedRingError(f"{R} -> {B} does not send variables to variables")
    if not M.is_free():
        raise DomainError("Koszul models need a complex of free modules")
    names = [B.to_str(g) for g in new_generators(u)]
    rings = cached_tensor_rings(B, B, R, u, u)
    seq = [rings.first(B.var(v)) - rings.second(B.var(v)) for v in names]
    K = koszul(rings.ring, seq)
    P = SemiFreeModule.from_complex(K.complex(), name="K")
    T = tensor_product(M, M, rings)
    S = HomModule(P, FlatModule(T.complex, name=f"{_label(M)}.{_label(M)}"),
                  name=f"Sq({_label(M)})")
    mult = RingMap(rings.ring, B, list(B.gens) + list(B.gens))
    return KoszulSq(u, M, rings, K, P, T, S, mult, names)


def _positions(T: ComplexTensor, n: int) -> list[tuple[int, int, int, int]]:
    out: list[Any] = [None] * T.complex.rank(n)
    for p, q in T.pairs(n):
        for s in range(T.first.rank(p)):
            for t in range(T.second.rank(q)):
                out[T.index(p, q, s, t)] = (p, q, s, t)
    return out


def _direct_sum(ring: PresentedRing, modules: Sequence[FPModule]) -> FPModule:
    total = sum(m.ngens for m in modules)
    rels = []
    off = 0
    for m in modules:
        for r in m.relations:
            v = [ring.zero] * total
            v[off:off + m.ngens] = r
            rels.append(v)
        off += m.ngens
    return FPModule(ring, total, rels)


@dataclass
class CupProduct:
    """Sq_{B/A} M (x) Sq_{C/B} N -> Sq_{C/A}(M (x)_B N) on Koszul models."""

    structure: RingMap
    first: KoszulSq
    second: KoszulSq
    target: KoszulSq
    product: ComplexTensor
    condition: str | None = None
    certificate: QuasiIsoCertificate | None = None
    _lifts: dict[str, PolyElement] = field(default_factory=dict, repr=False)

    @property
    def asserted(self) -> bool:
        return self.certificate is not None and self.certificate.ok

    @cached_property
    def _inclusion(self) -> RingMap:
        f = self.structure
        EB, EC = self.first.rings, self.target.rings
        B = f.source
        images = [EC.first(f(g)) for g in B.gens] + [EC.second(f(g)) for g in B.gens]
        return RingMap(EB.ring, EC.ring, images)

    @cached_property
    def _quotient(self) -> RingMap:
        C = self.structure.target
        EC, ECB = self.target.rings, self.second.rings
        images = [ECB.first(g) for g in C.gens] + [ECB.second(g) for g in C.gens]
        return RingMap(EC.ring, ECB.ring, images)

    def _lift(self, b: PolyElement) -> PolyElement:
        key = self.second.rings.ring.to_str(b)
        if key not in self._lifts:
            pre = self._quotient.preimage(b)
            if pre is None:
                raise DomainError(f"{key} does not lift to {self.target.rings.ring}")
            self._lifts[key] = pre
        return self._lifts[key]

    @cached_property
    def _splits(self) -> dict[int, tuple[int, int, int]]:
        """Target generator -> (first generator, second generator, sign of e_I e_J = +-e_K)."""
        f = self.structure
        sb, scb, sc = self.first, self.second, self.target
        C = f.target
        B = f.source
        pos = {name: k for k, name in enumerate(sc.names)}
        first_pos = [pos[C.to_str(f(B.var(name)))] for name in sb.names]
        second_pos = [pos[name] for name in scb.names]
        out = {}
        for k in range(sc.diagonal.ngens):
            mono = sc.monomial(k)
            I = tuple(mono[p] for p in first_pos)
            J = tuple(mono[p] for p in second_pos)
            order = [p for p, e in zip(first_pos, I) if e] + [p for p, e in zip(second_pos, J) if e]
            inversions = sum(1 for a in range(len(order)) for b in range(a + 1, len(order))
                             if order[a] > order[b])
            out[k] = (sb.generator_of[I], scb.generator_of[J], -1 if inversions % 2 else 1)
        return out

    def apply(self, alpha: Sequence[Any], p: int, beta: Sequence[Any], q: int) -> Vector:
        """The cochain alpha . beta in degree p + q of the target model."""
        sb, scb, sc = self.first, self.second, self.target
        EC = sc.rings.ring
        LT = self.product
        vals_a = sb.hom.values(alpha, p)
        vals_b = scb.hom.values(beta, q)
        blocks = [list(EC.vzero(sc.hom.target.rank(d + p + q))) for d in sc.diagonal.degrees]
        for k, (ja, jb, sign) in self._splits.items():
            a_vec, b_vec = vals_a[ja], vals_b[jb]
            if not any(a_vec) or not any(b_vec):
                continue
            da = sb.diagonal.degrees[ja]
            db = scb.diagonal.degrees[jb]
            pos_a = _positions(sb.tensor, da + p)
            pos_b = _positions(scb.tensor, db + q)
            base = -sign if (q * da) % 2 else sign
            for ia, a in enumerate(a_vec):
                if not a:
                    continue
                p1, p2, s1, s2 = pos_a[ia]
                ca = self._inclusion(a)
                for ib, b in enumerate(b_vec):
                    if not b:
                        continue
                    q1, q2, t1, t2 = pos_b[ib]
                    idx = sc.tensor.index(p1 + q1, p2 + q2, LT.index(p1, q1, s1, t1),
                                          LT.index(p2, q2, s2, t2))
                    sgn = -base if (p2 * q1) % 2 else base
                    term = EC.mul(ca, self._lift(b))
                    blocks[k][idx] = blocks[k][idx] + (term if sgn > 0 else -term)
        return sc.hom.from_values(blocks, p + q)

    def induced(self, n: int) -> InducedMap:
        """The product on H^p (x) H^q summed over p + q = n, reported over C."""
        f = self.structure
        C = f.target
        sb, scb, sc = self.first, self.second, self.target
        Hc = sc.flat.cohomology(n)
        parts: list[FPModule] = []
        cols: list[Vector] = []
        for p in sb.degrees():
            q = n - p
            if q not in scb.degrees():
                continue
            Ha, Hb = sb.flat.cohomology(p), scb.flat.cohomology(q)
            if not Ha.cocycles or not Hb.cocycles:
                continue
            Fa = Ha.module.base_change(sb.multiplication).base_change(f)
            Fb = Hb.module.base_change(scb.multiplication)
            parts.append(tensor_fp(Fa, Fb))
            for za in Ha.cocycles:
                for zb in Hb.cocycles:
                    coords = Hc.coordinates(self.apply(za, p, zb, q))
                    if coords is None:
                        raise DomainError(f"the product of cocycles in degrees {p}, {q} "
                                          "is not a cocycle")
                    cols.append(sc.multiplication.on_vector(coords))
        return InducedMap(n, _direct_sum(C, parts), Hc.module.base_change(sc.multiplication),
                          cols)

    def degrees(self) -> list[int]:
        sums = {p + q for p in self.first.degrees() for q in self.second.degrees()}
        return sorted(sums | set(self.target.degrees()))

    def check(self) -> QuasiIsoCertificate:
        degs = self.degrees()
        cert = QuasiIsoCertificate(True, (degs[0], degs[-1]) if degs else None)
        for n in degs:
            H = self.induced(n)
            good = H.is_iso()
            cert.maps[n] = H
            cert.degrees.append((n, H.source.invariants().describe(),
                                 H.target.invariants().describe(), good))
            cert.ok = cert.ok and good
        return cert

    def naturality(self, a: Any) -> bool:
        """Sq(a) on the first factor matches Sq(f(a)) on the product, on cohomology."""
        f = self.structure
        B = f.source
        a = B(a)
        EB, EC = self.first.rings, self.target.rings
        ea = EB.ring.mul(EB.first(a), EB.second(a))
        fa = f(a)
        ec = EC.ring.mul(EC.first(fa), EC.second(fa))
        for n in self.degrees():
            Hc = self.target.flat.cohomology(n)
            for p in self.first.degrees():
                q = n - p
                if q not in self.second.degrees():
                    continue
                for za in self.first.flat.cohomology(p).cocycles:
                    for zb in self.second.flat.cohomology(q).cocycles:
                        lhs = self.apply(EB.ring.vscale(ea, za), p, zb, q)
                        rhs = EC.ring.vscale(ec, self.apply(za, p, zb, q))
                        coords = Hc.coordinates(EC.ring.vsub(lhs, rhs))
                        if coords is None or not Hc.module.is_zero_element(coords):
                            return False
        return True

    def rows(self) -> list[list[str]]:
        cert = self.certificate or self.check()
        return [[str(i), left, right, "yes" if good else "no"]
                for i, left, right, good in cert.degrees]


def cup_product(structure: RingMap, f: RingMap, M: Complex, N: Complex,
                condition: str | None = None, first: KoszulSq | None = None,
                second: KoszulSq | None = None) -> CupProduct:
    """The cup product for A -> B -> C polynomial extensions, M over B and N over C.

    ``condition`` names the hypothesis under which the product is an isomorphism;
    without it the product is built and left unasserted. ``first`` and ``second``
    reuse existing Koszul models of the two factors, so classes already written
    in them stay meaningful.
    """
    if f.source is not structure.target:
        raise DomainError("the ring maps do not compose")
    if condition is not None and condition not in CUP_CONDITIONS:
        raise CertificateError(f"unknown condition {condition!r}; use one of {CUP_CONDITIONS}")
    C = f.target
    for given, X, u in ((first, M, structure), (second, N, f)):
        if given is not None and (given.complex is not X or given.structure.source is not u.source
                                  or given.structure.target is not u.target):
            raise DomainError("the given Koszul model belongs to another complex")
    first = first or koszul_sq(structure, M)
    second = second or koszul_sq(f, N)
    MC = M.base_change(f)
    product = tensor_product(MC, N)
    L = product.complex
    L.name = f"{_label(M)}.{_label(N)}"
    target = koszul_sq(f.compose(structure), L)
    out = CupProduct(f, first, second, target, product, condition)
    if condition is not None:
        out.certificate = out.check()
        if not out.certificate.ok:
            logger.error("cup product fails in degrees %s", out.certificate.failing_degrees())
    logger.info("cup product over %s (%s)", C, condition or "unasserted")
    return out
