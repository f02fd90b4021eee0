"""Run parsed statements and render their results as a deterministic text report.

Each statement becomes one Section with a status:

    pass          every asserted check held (exit 0)
    fail          an asserted check failed (exit 1)
    error         the input was refused: domain, certificate or lift errors (exit 2)
    undetermined  a degree fell outside the guaranteed window (exit 3)

A Report's exit status is the maximum over its sections. Elapsed time is kept on
the section for the run history but never rendered.
"""

from __future__ import annotations

import dataclasses
import logging
import time
from dataclasses import dataclass, field
from typing import Any, Callable

from py_rigidsq.dgcore import Complex, InducedMap, module_complex, tensor_product
from py_rigidsq.dgmodule import FlatModule
from py_rigidsq.errors import DomainError, RigidSqError, WindowError
from py_rigidsq.exactlin import integer_matrix, smith_normal_form
from py_rigidsq.lang import Environment, JobSpec, Statement
from py_rigidsq.oracle import compare_groebner, compare_snf, compare_sq, compare_syzygy
from py_rigidsq.polyring import FPModule, PresentedRing, RingMap, buchberger
from py_rigidsq.resolve import (
    DEFAULT_DEPTH, TraceEntry, koszul, semifree_algebra_resolution, semifree_module_resolution,
)
from py_rigidsq.rigidity import (
    ShriekResult, coalgebra_check, endomorphisms_are_scalars, flat_shriek, rigid_auto_scan,
    rigid_existence, rigidify, sharp, trace_morphism, trace_scan, unit_candidates, verify_rigid,
)
from py_rigidsq.smoothdiff import Chart, etale_decomposition, ext_via_koszul, kaehler, omega_power
from py_rigidsq.squaring import (
    DEFAULT_WINDOW, cup_product, identity_law, identity_morphism, scalar_law, scalar_morphism,
    sq_flat, sq_model, sq_object,
)
from py_rigidsq.utils import format_table

logger = logging.getLogger(__name__)

STATUS_CODES = {"pass": 0, "fail": 1, "error": 2, "undetermined": 3}


# -- Report structure --

@dataclass
class Table:
    caption: str
    headers: list[str]
    rows: list[list[str]]


@dataclass
class Section:
    title: str
    verb: str
    digest: str
    line: int = 0
    status: str = "pass"
    fields: list[tuple[str, str]] = field(default_factory=list)
    tables: list[Table] = field(default_factory=list)
    trace: list[str] = field(default_factory=list)
    undetermined: list[str] = field(default_factory=list)
    elapsed: float = 0.0

    def add_field(self, key: str, value: Any) -> None:
        self.fields.append((key, str(value)))

    def add_table(self, caption: str, headers: list[str], rows: list[list[str]]) -> None:
        self.tables.append(Table(caption, headers, [[str(c) for c in r] for r in rows]))

    def check(self, ok: bool) -> None:
        """Record an asserted check; one failure marks the section failed."""
        if not ok and self.status == "pass":
            self.status = "fail"

    @property
    def exit_code(self) -> int:
        return STATUS_CODES[self.status]

    def render(self) -> str:
        lines = [f"== {self.title}", f"status: {self.status}", f"digest: {self.digest}"]
        lines += [f"{k}: {v}" for k, v in self.fields]
        for t in self.tables:
            lines.append(f"-- {t.caption}")
            lines.append(format_table(t.headers, t.rows))
        if self.undetermined:
            lines.append("-- undetermined")
            lines += [f"  {u}" for u in self.undetermined]
        if self.trace:
            lines.append("-- trace")
            lines += [f"  {t}" for t in self.trace]
        return "\n".join(lines)


@dataclass
class Report:
    sections: list[Section] = field(default_factory=list)
    digest: str = ""

    @property
    def exit_code(self) -> int:
        return max((s.exit_code for s in self.sections), default=0)

    @property
    def status(self) -> str:
        return next(k for k, v in STATUS_CODES.items() if v == self.exit_code)

    def render(self) -> str:
        head = ["# py-rigidsq report", f"job: {self.digest}",
                f"statements: {len(self.sections)}", f"status: {self.status}"]
        body = [s.render() for s in self.sections]
        return "\n\n".join(["\n".join(head)] + body) + "\n"


# -- Execution context --

@dataclass
class RunContext:
    env: Environment
    window: tuple[int, int] = DEFAULT_WINDOW
    depth: int = DEFAULT_DEPTH
    trace: bool = False
    _units: dict[int, Complex] = field(default_factory=dict)

    def unit_complex(self, ring: PresentedRing) -> Complex:
        """The ring itself in degree 0, one object per ring."""
        if id(ring) not in self._units:
            X = module_complex(FPModule(ring, 1))
            X.name = str(ring)
            self._units[id(ring)] = X
        return self._units[id(ring)]


def _window(stmt: Statement, ctx: RunContext) -> tuple[int, int]:
    return stmt.args.get("window", ctx.window)


def _depth(stmt: Statement, ctx: RunContext) -> int:
    return stmt.args.get("depth", ctx.depth)


def _over(stmt: Statement, ctx: RunContext, ring: PresentedRing) -> PresentedRing:
    A = stmt.args.get("over")
    if A is None:
        A = ctx.env.ground(ctx.env.default_base)
        if A.base != ring.base:
            raise DomainError(f"{ring} is over {ring.base}, the default base is {A.base}; "
                              "name the base ring with 'over'")
    return A


def _object(stmt: Statement, ctx: RunContext, ring: PresentedRing, key: str = "module") -> Complex:
    X = stmt.args.get(key)
    if X is None:
        return ctx.unit_complex(ring)
    if X.ring is not ring:
        raise DomainError(f"{X.name or key} lives over {X.ring}, not {ring}")
    return X


def _invariants(M: FPModule) -> str:
    return M.invariants().describe()


def _yes(flag: bool) -> str:
    return "yes" if flag else "no"


def _trace_rows(entries: list[TraceEntry]) -> list[list[str]]:
    return [[str(e.stage), e.name, str(e.degree), e.differential] for e in entries]


# -- Verb executors --

def _run_groebner(stmt: Statement, ctx: RunContext, sec: Section) -> None:
    R = stmt.args["ring"]
    sec.add_field("ring", R)
    sec.add_field("regime", R.regime)
    if not R.base.is_field:
        if R.regime == "zz-finite":
            factors, free = R.lattice_invariants()
            sec.add_field("additive group", f"torsion {factors}, free rank {free}")
            sec.add_table("monic relations", ["variable", "relation"],
                          [[v, R.to_str(p)] for v, p in sorted(R.monic_relations.items())])
        return
    gens = list(R.ideal_gens) + list(stmt.args.get("ideal", ()))
    basis = buchberger(R, gens)
    sec.add_field("order", R.order.name)
    if R.dimension() is not None and "ideal" not in stmt.args:
        sec.add_field("dimension", R.dimension())
    sec.add_table("reduced basis", ["k", "element"],
                  [[str(k), R.to_str(g)] for k, g in enumerate(basis)])


def _run_snf(stmt: Statement, ctx: RunContext, sec: Section) -> None:
    rows = stmt.args["matrix"]
    M = integer_matrix(rows)
    S, U, V = smith_normal_form(M)
    diag = [int(d) for d in S.diagonal()]
    sec.add_field("invariant factors", [d for d in diag if d])
    sec.add_field("rank", sum(1 for d in diag if d))
    sec.add_table("S = U M V", [f"c{j}" for j in range(S.cols)], S.to_lists())


def _run_koszul(stmt: Statement, ctx: RunContext, sec: Section) -> None:
    R, seq = stmt.args["ring"], stmt.args["sequence"]
    K = koszul(R, seq)
    X = K.complex()
    module = stmt.args.get("module")
    if module is not None:
        X = tensor_product(X, module_complex(module)).complex
    sec.add_field("length", K.length)
    regular = K.is_acyclic()
    sec.add_field("regular", _yes(regular))
    if regular:
        sec.add_field("resolves R/(a)", _yes(K.augmentation_check().ok))
    sec.add_table("homology", ["degree", "H"],
                  [[str(i), X.cohomology(i).describe()] for i in range(-K.length, 1)])


def _run_resolve(stmt: Statement, ctx: RunContext, sec: Section) -> None:
    target = stmt.args["target"]
    depth = _depth(stmt, ctx)
    if isinstance(target, RingMap):
        res = semifree_algebra_resolution(target, depth)
        sec.add_field("map", f"{target.source} -> {target.target}")
        sec.add_field("exact", _yes(res.exact))
        sec.add_field("window", res.window())
        cert = res.verify()
    else:
        sup = target.support
        if sup is None:
            sec.add_field("complex", "zero; nothing to resolve")
            return
        res = semifree_module_resolution(FlatModule(target), sup[0] - depth,
                                         name=f"{target.name or 'M'}~")
        sec.add_field("complex", target.name or "M")
        sec.add_field("window", res.window())
        cert = res.verify()
    sec.add_table("generators", ["stage", "name", "degree", "differential"],
                  _trace_rows(res.trace))
    sec.add_table("augmentation", ["degree", "resolution", "target", "iso"],
                  [[str(i), a, b, _yes(ok)] for i, a, b, ok in cert.degrees])
    sec.check(cert.ok)


def _run_sq(stmt: Statement, ctx: RunContext, sec: Section) -> None:
    B = stmt.args["ring"]
    u = ctx.env.structure(_over(stmt, ctx, B), B)
    X = _object(stmt, ctx, B)
    window = _window(stmt, ctx)
    if stmt.args.get("flat"):
        result = sq_flat(u, X, window)
    else:
        result = sq_object(u, X, window, _depth(stmt, ctx))
    sec.add_field("map", f"{u.source} -> {B}")
    sec.add_field("window", window)
    sec.add_field("nonzero degrees", result.nonzero_degrees())
    sec.add_table("cohomology", ["degree", "H"], result.rows())
    if result.undetermined():
        sec.status = "undetermined"
        sec.undetermined = [f"H^{i}" for i in result.undetermined()]
    if ctx.trace and result.model is not None:
        sec.trace = result.model.trace_lines()


def _run_sq_mor(stmt: Statement, ctx: RunContext, sec: Section) -> None:
    B = stmt.args["ring"]
    u = ctx.env.structure(_over(stmt, ctx, B), B)
    X = _object(stmt, ctx, B)
    model = sq_model(u, X, _window(stmt, ctx), _depth(stmt, ctx))
    c = stmt.args.get("scalar")
    if c is None:
        mor, law, claim = identity_morphism(model), identity_law(model), "Sq(1) = 1"
    else:
        mor, law = scalar_morphism(model, c), scalar_law(model, c)
        claim = f"Sq({B.to_str(c)}) = ({B.to_str(c)})^2"
    sec.add_table("induced maps", ["degree", "source", "target", "iso"], mor.rows())
    sec.add_field(claim, _yes(law))
    sec.check(law)
    if ctx.trace:
        sec.trace = model.trace_lines()


def _base(stmt: Statement) -> PresentedRing:
    B = stmt.args.get("base")
    if B is None:
        raise DomainError(f"{stmt.verb} needs 'base' naming the middle ring")
    return B


def _run_cup(stmt: Statement, ctx: RunContext, sec: Section) -> None:
    C = stmt.args["ring"]
    B = _base(stmt)
    A = _over(stmt, ctx, C)
    structure, f = ctx.env.structure(A, B), ctx.env.structure(B, C)
    M = _object(stmt, ctx, B)
    N = _object(stmt, ctx, C, "with")
    condition = stmt.args.get("condition")
    cup = cup_product(structure, f, M, N, condition)
    sec.add_field("tower", f"{A} -> {B} -> {C}")
    sec.add_field("condition", condition or "none")
    sec.add_table("cup product", ["degree", "source", "target", "iso"], cup.rows())
    sec.add_field("asserted", _yes(cup.asserted))
    if condition is not None:
        sec.check(cup.asserted)


def _run_omega(stmt: Statement, ctx: RunContext, sec: Section) -> None:
    B = stmt.args["ring"]
    u = ctx.env.structure(_over(stmt, ctx, B), B)
    rank = kaehler(u).rank()
    sec.add_field("rank", "not free" if rank is None else rank)
    degrees = [stmt.args["degree"]] if "degree" in stmt.args else range(B.nvars + 1)
    sec.add_table("exterior powers", ["n", "Omega^n"],
                  [[str(n), _invariants(omega_power(u, n))] for n in degrees])


def _run_ext(stmt: Statement, ctx: RunContext, sec: Section) -> None:
    R, seq = stmt.args["ring"], stmt.args["sequence"]
    M = stmt.args.get("module") or FPModule(R, 1)
    degrees = [stmt.args["degree"]] if "degree" in stmt.args else range(len(seq) + 1)
    sec.add_table("Ext^p(R/(a), M)", ["p", "Ext"],
                  [[str(p), _invariants(ext_via_koszul(R, seq, M, p))] for p in degrees])


def _run_etale(stmt: Statement, ctx: RunContext, sec: Section) -> None:
    B = stmt.args["ring"]
    u = ctx.env.structure(_over(stmt, ctx, B), B)
    dec = etale_decomposition(u)
    checks = dec.checks()
    sec.add_field("idempotent", dec.ring.to_str(dec.idempotent))
    sec.add_field("complement", dec.complement)
    sec.add_table("checks", ["check", "holds"], [[k, _yes(v)] for k, v in checks.items()])
    sec.check(all(checks.values()))


def _rigid_input(stmt: Statement, ctx: RunContext):
    """(f : B -> C, rigid complex over B) for the rigid-functor verbs."""
    C = stmt.args["ring"]
    B = _base(stmt)
    A = _over(stmt, ctx, C)
    structure, f = ctx.env.structure(A, B), ctx.env.structure(B, C)
    M = _object(stmt, ctx, B)
    rc = rigidify(structure, M, _window(stmt, ctx), _depth(stmt, ctx))
    return f, rc


def _shriek_fields(sec: Section, out: ShriekResult) -> None:
    C = out.map.target
    sec.add_field("source", out.base.describe())
    sec.add_field("result", out.rigid.describe())
    if out.scale is not None:
        sec.add_field("rigidifier scale", C.to_str(out.scale))
        sec.add_field("scale unique", _yes(out.unique))
    if out.witness is not None:
        sec.add_table("trace witness", ["generator", "rho o Tr", "Sq(Tr) o rho"],
                      out.witness.rows())


def _run_flat_shriek(stmt: Statement, ctx: RunContext, sec: Section) -> None:
    f, rc = _rigid_input(stmt, ctx)
    _shriek_fields(sec, flat_shriek(f, rc, _window(stmt, ctx), _depth(stmt, ctx)))


def _run_sharp(stmt: Statement, ctx: RunContext, sec: Section) -> None:
    f, rc = _rigid_input(stmt, ctx)
    chart = Chart(element=stmt.args["chart"]) if "chart" in stmt.args else None
    out = sharp(f, rc, chart, _window(stmt, ctx), _depth(stmt, ctx))
    sec.add_field("source", rc.describe())
    sec.add_field("result", out.rigid.describe())
    if out.fundamental is not None:
        sec.add_field("fundamental iso", _yes(out.fundamental.is_iso()))
        sec.add_table("fundamental map", ["form", "fraction", "image"], out.fundamental.rows())
    sec.add_field("cup product asserted", _yes(out.cup is not None and out.cup.asserted))


def _run_trace(stmt: Statement, ctx: RunContext, sec: Section) -> None:
    f, rc = _rigid_input(stmt, ctx)
    out = trace_morphism(f, rc, _window(stmt, ctx), _depth(stmt, ctx))
    _shriek_fields(sec, out)
    C = f.target
    ends = endomorphisms_are_scalars(out.rigid)
    sec.add_field("End(f^flat M) free of rank 1", _yes(ends))
    if C.regime == "field" and C.monomial_basis is not None:
        co = coalgebra_check(C)
        sec.add_field("coalgebra", f"coassociative {_yes(co.coassociative)}, "
                                   f"cocommutative {_yes(co.cocommutative)}, "
                                   f"counit {_yes(co.counit)}")
        sec.check(co.ok)
    if "scan" in stmt.args:
        units = trace_scan(out, stmt.args["scan"])
        sec.add_field("rigid traces among scanned units", [C.to_str(b) for b in units])
        sec.check(len(units) == 1)


def _run_rigid_exists(stmt: Statement, ctx: RunContext, sec: Section) -> None:
    A = stmt.args["ring"]
    out = rigid_existence(A, _window(stmt, ctx), _depth(stmt, ctx))
    for note in out.notes:
        sec.add_field("note", note)
    if out.rigid is not None:
        sec.add_field("rigid complex", out.rigid.describe())
    if out.report is not None:
        sec.add_table("checks", ["check", "status", "detail"], out.report.rows())
    if out.end_check is not None:
        sec.add_field("End(R) = A", _yes(out.end_check))
    if out.partial:
        sec.status = "undetermined"
        sec.undetermined = out.report.undetermined() if out.report is not None else \
            [n for n in out.notes if n.startswith("window")] or ["no rigid complex built"]
        return
    sec.check(out.ok)


def _run_verify_rigid(stmt: Statement, ctx: RunContext, sec: Section) -> None:
    X = stmt.args["target"]
    B = X.ring
    u = ctx.env.structure(_over(stmt, ctx, B), B)
    rc = rigidify(u, X, _window(stmt, ctx), _depth(stmt, ctx))
    if "scale" in stmt.args:
        c = stmt.args["scale"]
        rho = rc.rho
        rc = dataclasses.replace(rc, rho=InducedMap(rho.degree, rho.source, rho.target,
                                                    [B.vscale(c, col) for col in rho.columns]))
        sec.add_field("rho scaled by", B.to_str(c))
    sec.add_field("candidate", rc.describe())
    report = verify_rigid(rc)
    sec.add_table("checks", ["check", "status", "detail"], report.rows())
    if report.failing():
        sec.add_field("failing", ", ".join(report.failing()))
    if "scan" in stmt.args:
        units = rigid_auto_scan(rc, unit_candidates(B, stmt.args["scan"]))
        sec.add_field("rigid automorphisms", [B.to_str(b) for b in units])
        sec.check(len(units) == 1 and units[0] == B.one)
    sec.check(not report.failing())
    if report.undetermined() and sec.status == "pass":
        sec.status = "undetermined"
        sec.undetermined = report.undetermined()


def _run_oracle(stmt: Statement, ctx: RunContext, sec: Section) -> None:
    check = stmt.args["check"]
    if check == "sq":
        B = stmt.args["ring"]
        u = ctx.env.structure(_over(stmt, ctx, B), B)
        out = compare_sq(u, _object(stmt, ctx, B), _window(stmt, ctx), _depth(stmt, ctx))
    elif check == "groebner":
        out = compare_groebner(stmt.args["ring"], stmt.args.get("ideal"))
    elif check == "snf":
        out = compare_snf(stmt.args["matrix"])
    else:
        out = compare_syzygy(stmt.args["ring"], stmt.args["elements"])
    sec.add_field("check", check)
    for note in out.notes:
        sec.add_field("note", note)
    sec.add_table("agreement", ["quantity", "pipeline", "oracle", "agree"], out.rows)
    sec.check(out.agree)


EXECUTORS: dict[str, Callable[[Statement, RunContext, Section], None]] = {
    "groebner": _run_groebner,
    "snf": _run_snf,
    "koszul": _run_koszul,
    "resolve": _run_resolve,
    "sq": _run_sq,
    "sq-mor": _run_sq_mor,
    "cup": _run_cup,
    "omega": _run_omega,
    "ext": _run_ext,
    "etale": _run_etale,
    "flat-shriek": _run_flat_shriek,
    "sharp": _run_sharp,
    "trace": _run_trace,
    "rigid-exists": _run_rigid_exists,
    "verify-rigid": _run_verify_rigid,
    "oracle": _run_oracle,
}


# -- Running --

def run_statement(stmt: Statement, ctx: RunContext) -> Section:
    sec = Section(stmt.title(), stmt.verb, stmt.digest, stmt.line)
    start = time.perf_counter()
    try:
        EXECUTORS[stmt.verb](stmt, ctx, sec)
    except WindowError as exc:
        logger.info("%s: %s", stmt.title(), exc)
        sec.status = "undetermined"
        sec.undetermined.append(str(exc))
    except RigidSqError as exc:
        logger.info("%s refused: %s", stmt.title(), exc)
        sec.status = "error"
        sec.add_field("error", f"{type(exc).__name__}: {exc}")
    sec.elapsed = time.perf_counter() - start
    logger.debug("%s finished in %.3fs (%s)", stmt.title(), sec.elapsed, sec.status)
    return sec


def run_job(job: JobSpec, window: tuple[int, int] | None = None, depth: int | None = None,
            trace: bool = False, verb: str | None = None) -> Report:
    """Execute the statements of ``verb`` (all of them when None) in file order."""
    ctx = RunContext(job.env, window or DEFAULT_WINDOW,
                     DEFAULT_DEPTH if depth is None else depth, trace)
    statements = job.select(verb) if verb else job.statements
    return Report([run_statement(s, ctx) for s in statements], job.digest)
