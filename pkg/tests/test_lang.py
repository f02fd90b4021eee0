"""The declaration language: tokens, declarations and verb statements."""

import pytest

from py_rigidsq.dgcore import Complex
from py_rigidsq.errors import DomainError, ParseError
from py_rigidsq.exactlin import BaseRing
from py_rigidsq.lang import VERBS, parse_input, split_statements, tokenize
from py_rigidsq.polyring import FPModule, PresentedRing, RingMap

DECLARATIONS = """
# rings
ring B = QQ[x] / (x^2);
ring C = QQ[x, y] / (y^2 - x^3) order lex;
ring Z6 = ZZ[] / (6);
ring L = localize C at (x);
map u : QQ -> B;
map s : C -> C = (x, -y);
module M = B^2 / ([x, 0], [0, x]);
module W = omega u 1;
complex X = B^1 [[x]] B^1 top 0;
complex K = koszul C (x, y);
"""


class TestTokens:
    def test_kinds_and_positions(self):
        toks = tokenize("ring B = QQ[x]\n  / (x^2);")
        assert [t.kind for t in toks] == ["name", "name", "sym", "name", "bracket", "sym",
                                          "group", "sym"]
        slash = toks[5]
        assert (slash.line, slash.column) == (2, 3)
        assert [item.text for item in toks[6].items] == ["x^2"]

    def test_nested_brackets(self):
        (tok,) = tokenize("[[1, 2], [3, 4]]")
        assert [row.kind for row in tok.items] == ["bracket", "bracket"]
        assert [x.text for x in tok.items[1].items] == ["3", "4"]

    def test_comments_and_hyphenated_verbs(self):
        toks = tokenize("sq-mor B # a comment\n;")
        assert [t.text for t in toks] == ["sq-mor", "B", ";"]

    def test_unbalanced(self):
        with pytest.raises(ParseError):
            tokenize("ring B = QQ[x) ;")
        with pytest.raises(ParseError):
            tokenize("snf [[1, 2];")

    def test_missing_semicolon(self):
        with pytest.raises(ParseError, match="missing ';'"):
            split_statements(tokenize("groebner B; snf [[1]]"))


class TestDeclarations:
    def test_every_kind(self):
        job = parse_input(DECLARATIONS)
        env = job.env
        assert job.statements == []
        kind, B = env.symbols["B"]
        assert kind == "ring" and isinstance(B, PresentedRing)
        assert B.dimension() == 2
        assert env.symbols["C"][1].order.name == "lex"
        assert env.symbols["Z6"][1].regime == "zz-finite"
        assert env.symbols["L"][1].localization is not None
        u = env.symbols["u"][1]
        assert isinstance(u, RingMap) and u.target is B
        M = env.symbols["M"][1]
        assert isinstance(M, FPModule) and M.ngens == 2
        X = env.symbols["X"][1]
        assert isinstance(X, Complex) and X.support == (-1, 0)
        assert env.symbols["K"][1].rank(-1) == 2

    def test_quotient_of_a_declared_ring(self):
        job = parse_input("ring R = QQ[x, y]; ring S = R / (x*y);")
        S = job.env.symbols["S"][1]
        assert S.variables == ("x", "y")
        assert S.is_zero("x*y")

    def test_finite_field_bases(self):
        job = parse_input("ring F = Fp 7 [x]; ring G = GF(5)[t];")
        assert job.env.symbols["F"][1].base == BaseRing.parse("GF(7)")
        assert job.env.symbols["G"][1].base.prime == 5

    def test_module_becomes_a_complex_once(self):
        job = parse_input(DECLARATIONS)
        tok = tokenize("M")[0]
        first = job.env.complex_of(tok)
        assert first is job.env.complex_of(tok)
        assert first.support == (0, 0)
        assert first.name == "M"

    def test_ground_ring_lookup(self):
        job = parse_input("", BaseRing.parse("ZZ"))
        kind, R = job.env.lookup(tokenize("QQ")[0], "ring")
        assert kind == "ring" and R.nvars == 0
        assert job.env.ground(BaseRing.parse("QQ")) is R

    @pytest.mark.parametrize("text, message", [
        ("ring B = QQ[x] / (z);", "malformed polynomial"),
        ("ring B = QQ[2x];", "not a variable name"),
        ("ring B = QQ[x] order deglex;", "unknown order"),
        ("map u : QQ -> B;", "undefined symbol B"),
        ("ring B = QQ[x]; map f : B -> B = (x, x);", "1 variables, 2 images"),
        ("ring B = QQ[x]; module M = B^2 / (x);", "vectors"),
        ("ring B = QQ[x]; complex X = B^2 [[x]] B^1;", "differential must be 1x2"),
        ("ring B = QQ[x] extra;", "unexpected 'extra'"),
    ])
    def test_refusals(self, text, message):
        with pytest.raises(ParseError, match=message):
            parse_input(text)

    def test_domain_errors_name_the_line(self):
        with pytest.raises(DomainError, match="line 2"):
            parse_input("ring Z = ZZ[];\nring A = ZZ[x] / (2*x);")


class TestStatements:
    def test_verbs_and_options(self):
        job = parse_input(DECLARATIONS + """
            groebner C;
            snf [[2, 4], [6, 8]];
            sq B over QQ module M window -4 0 depth 3;
            sq B flat;
            sq-mor B over QQ scalar (x + 1);
            cup C over QQ base B condition flat;
            verify-rigid X over QQ scale (2);
        """)
        verbs = [s.verb for s in job.statements]
        assert verbs == ["groebner", "snf", "sq", "sq", "sq-mor", "cup", "verify-rigid"]
        snf = job.statements[1]
        assert snf.args["matrix"] == [[2, 4], [6, 8]]
        sq = job.select("sq")[0]
        assert sq.args["window"] == (-4, 0)
        assert sq.args["depth"] == 3
        assert sq.args["module"].name == "M"
        assert job.select("sq")[1].args["flat"] is True
        assert job.env.symbols["B"][1].to_str(job.statements[4].args["scalar"]) == "x + 1"
        assert job.statements[5].args["condition"] == "flat"
        assert set(VERBS) >= set(verbs)

    def test_oracle_statement(self):
        job = parse_input("ring R = QQ[x, y]; oracle syzygy R (x, y);")
        (stmt,) = job.statements
        assert stmt.verb == "oracle"
        assert stmt.args["check"] == "syzygy"
        assert len(stmt.args["elements"]) == 2

    def test_digest_and_title(self):
        job = parse_input("snf [[1, 2]];")
        (stmt,) = job.statements
        assert stmt.text == "snf [[1, 2]]"
        assert len(stmt.digest) == 12
        assert stmt.title() == "snf [[1, 2]] (line 1)"
        assert job.digest == stmt.digest
        assert parse_input("snf [[1, 2]];").digest == job.digest

    @pytest.mark.parametrize("text, message", [
        ("frobnicate B;", "unknown verb"),
        ("ring B = QQ[x]; sq B window 2 0;", "empty window"),
        ("ring B = QQ[x]; sq B colour red;", "unknown option"),
        ("ring B = QQ[x]; cup B condition proper;", "unknown condition"),
        ("oracle tor B;", "unknown oracle check"),
        ("snf [[1, 2], [3]];", "different lengths"),
        ("ring B = QQ[x]; sq B module N;", "undefined symbol N"),
    ])
    def test_refusals(self, text, message):
        with pytest.raises(ParseError, match=message):
            parse_input(text)

    def test_error_position(self):
        with pytest.raises(ParseError) as info:
            parse_input("ring B = QQ[x];\n  frobnicate B;")
        assert (info.value.line, info.value.column) == (2, 3)
        assert str(info.value) == "2:3: unknown verb 'frobnicate'"
