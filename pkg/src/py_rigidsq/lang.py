"""Declaration language: rings, maps, modules and complexes, then verb statements.

A source file is a sequence of statements, each ending with ``;``::

    # comments run to the end of the line
    ring B = QQ[x, y] / (y^2 - x^3);
    ring L = localize B at (x);
    ring R = ZZ[] / (6);
    map u : QQ -> B;
    module M = B^2 / ([x, y]);
    complex X = B^1 [[x]] B^1 top 0;
    complex K = koszul B (x, y);
    sq B over QQ module M window -4 0;

Declarations are evaluated while parsing so that verb statements hold built
objects. Every name must be defined before it is used.
"""

from __future__ import annotations

import hashlib
import logging
import re
from dataclasses import dataclass, field
from typing import Any

from py_rigidsq.dgcore import Complex, module_complex
from py_rigidsq.errors import DomainError, ParseError
from py_rigidsq.exactlin import BaseRing
from py_rigidsq.polyring import FPModule, PresentedRing, RingMap, localize, polynomial_ring
from py_rigidsq.resolve import koszul
from py_rigidsq.smoothdiff import omega_power

logger = logging.getLogger(__name__)

_NAME = re.compile(r"[A-Za-z_][A-Za-z0-9_]*(?:-[A-Za-z][A-Za-z0-9_]*)*")
_INT = re.compile(r"-?\d+")
_IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_]*$")
_SYMBOLS = ("->", "=", ":", "/", "^", ";")

CUP_CONDITIONS = ("smooth", "flat", "perfect")
ORACLE_CHECKS = ("sq", "groebner", "snf", "syzygy")
ORDERS = ("lex", "grevlex")


# -- Tokens --

@dataclass(frozen=True)
class Token:
    """kind is name, int, sym, group ``(..)``, bracket ``[..]`` or raw (an item of either)."""

    kind: str
    text: str
    line: int
    column: int
    items: tuple[Token, ...] = ()

    def error(self, message: str) -> ParseError:
        return ParseError(message, self.line, self.column)


def _advance(line: int, column: int, text: str) -> tuple[int, int]:
    for ch in text:
        if ch == "\n":
            line, column = line + 1, 1
        else:
            column += 1
    return line, column


def _closing(text: str, start: int, line: int, column: int) -> int:
    """Index of the bracket closing the one at ``start``."""
    pairs = {"(": ")", "[": "]"}
    stack = []
    for k in range(start, len(text)):
        ch = text[k]
        if ch in pairs:
            stack.append(pairs[ch])
        elif ch in ")]":
            if not stack or stack.pop() != ch:
                l, c = _advance(line, column, text[start:k])
                raise ParseError(f"unbalanced {ch!r}", l, c)
            if not stack:
                return k
    raise ParseError(f"unclosed {text[start]!r}", line, column)


def _items(inner: str, line: int, column: int) -> tuple[Token, ...]:
    """Split bracket contents at top-level commas; ``[..]`` items become bracket tokens."""
    out = []
    depth = 0
    start = 0
    parts = []
    for k, ch in enumerate(inner):
        if ch in "([":
            depth += 1
        elif ch in ")]":
            depth -= 1
        elif ch == "," and depth == 0:
            parts.append((start, k))
            start = k + 1
    parts.append((start, len(inner)))
    for a, b in parts:
        piece = inner[a:b]
        lead = len(piece) - len(piece.lstrip())
        text = piece.strip()
        l, c = _advance(line, column, inner[:a + lead])
        if not text:
            if len(parts) == 1:
                return ()
            raise ParseError("empty item", l, c)
        if text.startswith("[") and _closing(text, 0, l, c) == len(text) - 1:
            out.append(Token("bracket", text, l, c, _items(text[1:-1], *_advance(l, c, "["))))
        else:
            out.append(Token("raw", text, l, c))
    return tuple(out)


def tokenize(text: str) -> list[Token]:
    out: list[Token] = []
    k, line, column = 0, 1, 1
    while k < len(text):
        ch = text[k]
        if ch.isspace():
            line, column = _advance(line, column, ch)
            k += 1
            continue
        if ch == "#":
            end = text.find("\n", k)
            end = len(text) if end < 0 else end
            column += end - k
            k = end
            continue
        if ch in "([":
            end = _closing(text, k, line, column)
            body = text[k:end + 1]
            kind = "group" if ch == "(" else "bracket"
            out.append(Token(kind, body, line, column,
                             _items(body[1:-1], *_advance(line, column, ch))))
            line, column = _advance(line, column, body)
            k = end + 1
            continue
        if ch in ")]":
            raise ParseError(f"unbalanced {ch!r}", line, column)
        sym = next((s for s in _SYMBOLS if text.startswith(s, k)), None)
        if sym is not None:
            out.append(Token("sym", sym, line, column))
        else:
            m = _INT.match(text, k)
            kind = "int"
            if m is None:
                m = _NAME.match(text, k)
                kind = "name"
            if m is None:
                raise ParseError(f"unexpected character {ch!r}", line, column)
            sym = m.group()
            out.append(Token(kind, sym, line, column))
        line, column = _advance(line, column, sym)
        k += len(sym)
    return out


def split_statements(tokens: list[Token]) -> list[list[Token]]:
    out: list[list[Token]] = []
    current: list[Token] = []
    for tok in tokens:
        if tok.kind == "sym" and tok.text == ";":
            if current:
                out.append(current)
            current = []
        else:
            current.append(tok)
    if current:
        raise current[-1].error("missing ';' after the last statement")
    return out


# -- Symbol table --

class Environment:
    """Names bound by declarations, plus the ground rings and structure maps."""

    def __init__(self, default_base: BaseRing | None = None) -> None:
        self.default_base = default_base or BaseRing("QQ")
        self.symbols: dict[str, tuple[str, Any]] = {}
        self._grounds: dict[str, PresentedRing] = {}
        self._structures: dict[tuple[int, int], RingMap] = {}
        self._complexes: dict[str, Complex] = {}

    def ground(self, base: BaseRing) -> PresentedRing:
        key = str(base)
        if key not in self._grounds:
            self._grounds[key] = polynomial_ring(base, [], name=key)
        return self._grounds[key]

    def define(self, token: Token, kind: str, value: Any) -> None:
        if token.text in self.symbols:
            logger.debug("redefining %s", token.text)
        self.symbols[token.text] = (kind, value)
        self._complexes.pop(token.text, None)

    def lookup(self, token: Token, *kinds: str) -> tuple[str, Any]:
        if token.kind != "name":
            raise token.error(f"expected a name, got {token.text!r}")
        hit = self.symbols.get(token.text)
        if hit is None:
            if "ring" in kinds:
                try:
                    return "ring", self.ground(BaseRing.parse(token.text))
                except DomainError:
                    pass
            raise token.error(f"undefined symbol {token.text}")
        kind, value = hit
        if kind not in kinds:
            raise token.error(f"{token.text} is a {kind}, not a {' or '.join(kinds)}")
        return hit

    def complex_of(self, token: Token) -> Complex:
        """The complex bound to a name; a module becomes a complex in degree 0, once."""
        kind, value = self.lookup(token, "module", "complex")
        if kind == "complex":
            return value
        if token.text not in self._complexes:
            X = module_complex(value, 0)
            X.name = token.text
            self._complexes[token.text] = X
        return self._complexes[token.text]

    def structure(self, A: PresentedRing, B: PresentedRing) -> RingMap:
        """The latest declared map A -> B, else the map matching variable names."""
        for kind, value in reversed(list(self.symbols.values())):
            if kind == "map" and value.source is A and value.target is B:
                return value
        key = (id(A), id(B))
        if key not in self._structures:
            self._structures[key] = RingMap.by_names(A, B)
        return self._structures[key]


# -- Value conversion --

def _poly(ring: PresentedRing, token: Token) -> Any:
    if token.kind not in ("raw", "name", "int"):
        raise token.error(f"expected a polynomial, got {token.text!r}")
    try:
        return ring(token.text)
    except DomainError as exc:
        raise token.error(f"malformed polynomial {token.text!r} in {ring}: {exc}") from None


def _polys(ring: PresentedRing, token: Token) -> list[Any]:
    if token.kind != "group":
        raise token.error(f"expected a parenthesized list, got {token.text!r}")
    return [_poly(ring, item) for item in token.items]


def _single_poly(ring: PresentedRing, token: Token) -> Any:
    if token.kind == "group":
        if len(token.items) != 1:
            raise token.error("expected one polynomial")
        return _poly(ring, token.items[0])
    return _poly(ring, token)


def _int(token: Token) -> int:
    if token.kind not in ("int", "raw") or not _INT.fullmatch(token.text):
        raise token.error(f"expected an integer, got {token.text!r}")
    return int(token.text)


def _int_matrix(token: Token) -> list[list[int]]:
    if token.kind != "bracket" or not token.items or any(r.kind != "bracket" for r in token.items):
        raise token.error("expected a matrix [[a, b], [c, d]]")
    rows = [[_int(x) for x in row.items] for row in token.items]
    if len({len(r) for r in rows}) != 1:
        raise token.error("matrix rows have different lengths")
    return rows


def _poly_matrix(ring: PresentedRing, token: Token) -> list[list[Any]]:
    if token.kind != "bracket" or any(r.kind != "bracket" for r in token.items):
        raise token.error("expected a matrix [[a, b], [c, d]]")
    rows = [[_poly(ring, x) for x in row.items] for row in token.items]
    if len({len(r) for r in rows}) > 1:
        raise token.error("matrix rows have different lengths")
    return rows


class _Cursor:
    def __init__(self, tokens: list[Token]) -> None:
        self.tokens = tokens
        self.k = 0

    @property
    def done(self) -> bool:
        return self.k >= len(self.tokens)

    def peek(self) -> Token | None:
        return None if self.done else self.tokens[self.k]

    def take(self, what: str = "a value") -> Token:
        if self.done:
            last = self.tokens[-1]
            raise ParseError(f"expected {what} after {last.text!r}", last.line,
                             last.column + len(last.text))
        tok = self.tokens[self.k]
        self.k += 1
        return tok

    def expect(self, text: str) -> Token:
        tok = self.take(repr(text))
        if tok.text != text:
            raise tok.error(f"expected {text!r}, got {tok.text!r}")
        return tok

    def accept(self, text: str) -> bool:
        tok = self.peek()
        if tok is not None and tok.text == text and tok.kind in ("name", "sym"):
            self.k += 1
            return True
        return False

    def finish(self) -> None:
        if not self.done:
            tok = self.peek()
            raise tok.error(f"unexpected {tok.text!r}")


def _base(cur: _Cursor) -> BaseRing:
    tok = cur.take("a base ring")
    text = tok.text
    if text in ("GF", "Fp", "F") and cur.peek() is not None and cur.peek().kind in ("group", "int"):
        arg = cur.take()
        text = f"GF({arg.items[0].text if arg.kind == 'group' else arg.text})"
    try:
        return BaseRing.parse(text)
    except DomainError as exc:
        raise tok.error(str(exc)) from None


def _ring(cur: _Cursor, env: Environment) -> PresentedRing:
    tok = cur.take("a ring")
    if tok.text in ("GF", "Fp", "F") and cur.peek() is not None \
            and cur.peek().kind in ("group", "int") and tok.text not in env.symbols:
        cur.k -= 1
        return env.ground(_base(cur))
    return env.lookup(tok, "ring")[1]


# -- Declarations --

def _declare_ring(cur: _Cursor, env: Environment, name: Token) -> PresentedRing:
    cur.expect("=")
    if cur.accept("localize"):
        R = _ring(cur, env)
        cur.expect("at")
        s = _single_poly(R, cur.take("an element"))
        loc, _ = localize(R, s)
        loc.name = name.text
        return loc
    tok = cur.peek()
    if tok is not None and tok.text in env.symbols:
        R = _ring(cur, env)
        cur.expect("/")
        extra = _polys(R, cur.take("a list of relations"))
        return PresentedRing(R.base, R.variables, list(R.ideal_gens) + extra, R.order,
                             name=name.text)
    base = _base(cur)
    tok = cur.take("a variable list")
    if tok.kind != "bracket":
        raise tok.error("expected variables in brackets, e.g. QQ[x, y]")
    names = []
    for item in tok.items:
        if item.kind != "raw" or not _IDENT.match(item.text):
            raise item.error(f"{item.text!r} is not a variable name")
        names.append(item.text)
    free = polynomial_ring(base, names)
    ideal = _polys(free, cur.take("a list of relations")) if cur.accept("/") else []
    order = None
    if cur.accept("order"):
        word = cur.take("an order")
        if word.text not in ORDERS:
            raise word.error(f"unknown order {word.text!r}; use one of {ORDERS}")
        order = word.text
    return polynomial_ring(base, names, ideal, order, name=name.text)


def _declare_map(cur: _Cursor, env: Environment, name: Token) -> RingMap:
    cur.expect(":")
    A = _ring(cur, env)
    cur.expect("->")
    B = _ring(cur, env)
    if cur.accept("="):
        images = _polys(B, cur.take("a list of images"))
        if len(images) != A.nvars:
            raise name.error(f"{A} has {A.nvars} variables, {len(images)} images given")
        return RingMap(A, B, images)
    return RingMap.by_names(A, B)


def _free_piece(cur: _Cursor, env: Environment) -> FPModule:
    tok = cur.take("a module")
    kind, value = env.lookup(tok, "ring", "module")
    if kind == "module":
        return value
    n = 1
    if cur.accept("^"):
        n = _int(cur.take("a rank"))
    return FPModule(value, n)


def _declare_module(cur: _Cursor, env: Environment, name: Token) -> FPModule:
    cur.expect("=")
    if cur.accept("omega"):
        tok = cur.take("a ring map")
        u = env.lookup(tok, "map")[1]
        return omega_power(u, _int(cur.take("a degree"))).prune().module
    F = _free_piece(cur, env)
    if not cur.accept("/"):
        return F
    R = F.ring
    tok = cur.take("a list of relations")
    if tok.kind != "group":
        raise tok.error("expected relations in parentheses")
    rels = list(F.relations)
    for item in tok.items:
        if item.kind == "bracket":
            vec = [_poly(R, x) for x in item.items]
        elif F.ngens == 1:
            vec = [_poly(R, item)]
        else:
            raise item.error(f"relations of a rank {F.ngens} module are vectors [..]")
        if len(vec) != F.ngens:
            raise item.error(f"relation of length {len(vec)} in a rank {F.ngens} module")
        rels.append(vec)
    return FPModule(R, F.ngens, rels)


def _declare_complex(cur: _Cursor, env: Environment, name: Token) -> Complex:
    cur.expect("=")
    if cur.accept("koszul"):
        R = _ring(cur, env)
        out = koszul(R, _polys(R, cur.take("a sequence"))).complex()
        out.name = name.text
        return out
    pieces = [_free_piece(cur, env)]
    mats = []
    while cur.peek() is not None and cur.peek().kind == "bracket":
        mats.append(cur.take())
        pieces.append(_free_piece(cur, env))
    top = _int(cur.take("a degree")) if cur.accept("top") else 0
    ring = pieces[0].ring
    for P in pieces:
        if P.ring is not ring:
            raise name.error("the pieces of a complex live over different rings")
    lo = top - len(mats)
    ranks = {lo + k: P.ngens for k, P in enumerate(pieces)}
    rels = {lo + k: P.relations for k, P in enumerate(pieces)}
    diffs = {}
    for k, tok in enumerate(mats):
        rows = _poly_matrix(ring, tok)
        src, tgt = pieces[k].ngens, pieces[k + 1].ngens
        if len(rows) != tgt or any(len(r) != src for r in rows):
            raise tok.error(f"differential must be {tgt}x{src}")
        diffs[lo + k] = ring.matrix_from_rows(rows, src)
    return Complex(ring, ranks, diffs, rels, name=name.text)


DECLARATIONS = {
    "ring": ("ring", _declare_ring),
    "map": ("map", _declare_map),
    "module": ("module", _declare_module),
    "complex": ("complex", _declare_complex),
}


# -- Verb statements --

# positional (name, kind) pairs, then option keyword -> kinds of its values
_WINDOW = {"window": ("int", "int"), "depth": ("int",)}
_RIGID = {"over": ("ring",), "base": ("ring",), "module": ("object",), **_WINDOW}

VERBS: dict[str, tuple[tuple[tuple[str, str], ...], dict[str, tuple[str, ...]]]] = {
    "groebner": ((("ring", "ring"),), {"ideal": ("polys:ring",)}),
    "snf": ((("matrix", "intmatrix"),), {}),
    "koszul": ((("ring", "ring"), ("sequence", "polys:ring")), {"module": ("module",)}),
    "resolve": ((("target", "resolvable"),), {"depth": ("int",)}),
    "sq": ((("ring", "ring"),), {"over": ("ring",), "module": ("object",), "flat": (),
                                 **_WINDOW}),
    "sq-mor": ((("ring", "ring"),), {"over": ("ring",), "module": ("object",),
                                     "scalar": ("poly:ring",), **_WINDOW}),
    "cup": ((("ring", "ring"),), {"over": ("ring",), "base": ("ring",), "module": ("object",),
                                  "with": ("object",), "condition": ("condition",)}),
    "omega": ((("ring", "ring"),), {"over": ("ring",), "degree": ("int",)}),
    "ext": ((("ring", "ring"), ("sequence", "polys:ring")),
            {"module": ("module",), "degree": ("int",)}),
    "etale": ((("ring", "ring"),), {"over": ("ring",)}),
    "flat-shriek": ((("ring", "ring"),), dict(_RIGID)),
    "sharp": ((("ring", "ring"),), {**_RIGID, "chart": ("poly:ring",)}),
    "trace": ((("ring", "ring"),), {**_RIGID, "scan": ("int",)}),
    "rigid-exists": ((("ring", "ring"),), dict(_WINDOW)),
    "verify-rigid": ((("target", "object"),), {"over": ("ring",), "scale": ("poly:target",),
                                               "scan": ("int",), **_WINDOW}),
}

ORACLES = {
    "sq": VERBS["sq"],
    "groebner": VERBS["groebner"],
    "snf": VERBS["snf"],
    "syzygy": ((("ring", "ring"), ("elements", "polys:ring")), {}),
}


@dataclass
class Statement:
    verb: str
    args: dict[str, Any]
    line: int
    column: int
    text: str

    @property
    def digest(self) -> str:
        return hashlib.sha256(self.text.encode()).hexdigest()[:12]

    def title(self) -> str:
        return f"{self.text} (line {self.line})"


@dataclass
class JobSpec:
    env: Environment
    statements: list[Statement] = field(default_factory=list)

    def select(self, verb: str) -> list[Statement]:
        return [s for s in self.statements if s.verb == verb]

    @property
    def digest(self) -> str:
        body = "\n".join(s.text for s in self.statements)
        return hashlib.sha256(body.encode()).hexdigest()[:12]


def _ring_of(value: Any) -> PresentedRing:
    if isinstance(value, PresentedRing):
        return value
    return value.ring


def _value(kind: str, cur: _Cursor, env: Environment,
           pending: list[tuple[str, str, Token]], key: str) -> Any:
    if kind.startswith("poly"):
        pending.append((key, kind, cur.take("a polynomial")))
        return None
    if kind == "ring":
        return _ring(cur, env)
    if kind == "int":
        return _int(cur.take("an integer"))
    if kind == "intmatrix":
        return _int_matrix(cur.take("a matrix"))
    tok = cur.take()
    if kind == "object":
        return env.complex_of(tok)
    if kind == "module":
        return env.lookup(tok, "module")[1]
    if kind == "resolvable":
        found, value = env.lookup(tok, "map", "module", "complex")
        return env.complex_of(tok) if found != "map" else value
    if kind == "condition":
        if tok.text not in CUP_CONDITIONS:
            raise tok.error(f"unknown condition {tok.text!r}; use one of {CUP_CONDITIONS}")
        return tok.text
    raise AssertionError(kind)


def _verb_args(verb: Token, schema, cur: _Cursor, env: Environment) -> dict[str, Any]:
    positional, options = schema
    args: dict[str, Any] = {}
    pending: list[tuple[str, str, Token]] = []
    for key, kind in positional:
        args[key] = _value(kind, cur, env, pending, key)
    while not cur.done:
        tok = cur.take()
        if tok.kind != "name" or tok.text not in options:
            raise tok.error(f"unknown option {tok.text!r} for {verb.text}")
        kinds = options[tok.text]
        if not kinds:
            args[tok.text] = True
            continue
        values = [_value(kind, cur, env, pending, tok.text) for kind in kinds]
        args[tok.text] = values[0] if len(values) == 1 else tuple(values)
    for key, kind, tok in pending:
        ring = _ring_of(args[kind.split(":")[1]])
        args[key] = _polys(ring, tok) if kind.startswith("polys") else _single_poly(ring, tok)
    if "window" in args and args["window"][0] > args["window"][1]:
        raise verb.error(f"empty window {args['window']}")
    return args


def _statement_text(tokens: list[Token]) -> str:
    return " ".join(t.text for t in tokens)


def parse_input(text: str, default_base: BaseRing | None = None) -> JobSpec:
    """Evaluate declarations and collect verb statements in file order."""
    env = Environment(default_base)
    job = JobSpec(env)
    for tokens in split_statements(tokenize(text)):
        head = tokens[0]
        cur = _Cursor(tokens[1:])
        if head.text in DECLARATIONS:
            kind, build = DECLARATIONS[head.text]
            name = cur.take("a name")
            if name.kind != "name" or not _IDENT.match(name.text):
                raise name.error(f"{name.text!r} is not a valid name")
            try:
                value = build(cur, env, name)
            except DomainError as exc:
                raise DomainError(f"line {head.line}: {exc}") from exc
            cur.finish()
            env.define(name, kind, value)
            logger.debug("declared %s %s", kind, name.text)
            continue
        if head.text == "oracle":
            which = cur.take("an oracle check")
            if which.text not in ORACLES:
                raise which.error(f"unknown oracle check {which.text!r}; use one of "
                                  f"{ORACLE_CHECKS}")
            args = _verb_args(head, ORACLES[which.text], cur, env)
            args["check"] = which.text
        elif head.text in VERBS:
            args = _verb_args(head, VERBS[head.text], cur, env)
        else:
            raise head.error(f"unknown verb {head.text!r}")
        job.statements.append(Statement(head.text, args, head.line, head.column,
                                        _statement_text(tokens)))
    return job
