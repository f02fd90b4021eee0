"""Statement execution, section statuses and the rendered report."""

import pytest

from py_rigidsq.errors import LiftError, UndeterminedError
from py_rigidsq.lang import parse_input
from py_rigidsq.report import EXECUTORS, Report, Section, run_job, run_statement, RunContext


def run(text, **kwargs):
    return run_job(parse_input(text), **kwargs)


def fields(section):
    return dict(section.fields)


class TestSections:
    def test_check_only_downgrades_a_pass(self):
        sec = Section("t", "snf", "abc")
        sec.check(True)
        assert sec.status == "pass"
        sec.check(False)
        assert sec.status == "fail"
        sec.status = "error"
        sec.check(False)
        assert sec.exit_code == 2

    def test_render(self):
        sec = Section("snf [[1]] (line 1)", "snf", "0123456789ab")
        sec.add_field("rank", 1)
        sec.add_table("S", ["c0"], [[1]])
        sec.undetermined = ["H^-3"]
        text = sec.render()
        assert text.splitlines()[:4] == ["== snf [[1]] (line 1)", "status: pass",
                                         "digest: 0123456789ab", "rank: 1"]
        assert "-- S" in text
        assert "-- undetermined\n  H^-3" in text

    def test_report_takes_the_worst_status(self):
        report = Report([Section("a", "snf", "1"), Section("b", "snf", "2", status="fail"),
                         Section("c", "sq", "3", status="undetermined")], "job")
        assert report.exit_code == 3
        assert report.status == "undetermined"
        assert Report([], "job").exit_code == 0
        head = report.render().splitlines()[:4]
        assert head == ["# py-rigidsq report", "job: job", "statements: 3",
                        "status: undetermined"]


class TestRunStatement:
    def test_window_errors_become_undetermined(self, monkeypatch):
        def boom(stmt, ctx, sec):
            raise UndeterminedError("H^-7 lies outside the window", degree=-7)

        monkeypatch.setitem(EXECUTORS, "snf", boom)
        job = parse_input("snf [[1]];")
        sec = run_statement(job.statements[0], RunContext(job.env))
        assert sec.status == "undetermined"
        assert sec.undetermined == ["H^-7 lies outside the window"]
        assert sec.exit_code == 3

    def test_refusals_become_errors(self, monkeypatch):
        def boom(stmt, ctx, sec):
            raise LiftError("no preimage")

        monkeypatch.setitem(EXECUTORS, "snf", boom)
        job = parse_input("snf [[1]];")
        sec = run_statement(job.statements[0], RunContext(job.env))
        assert sec.status == "error"
        assert fields(sec)["error"] == "LiftError: no preimage"


class TestVerbs:
    def test_snf(self):
        (sec,) = run("snf [[2, 4], [6, 8]];").sections
        assert sec.status == "pass"
        assert fields(sec)["invariant factors"] == "[2, 4]"
        assert fields(sec)["rank"] == "2"

    def test_groebner_over_a_field(self):
        (sec,) = run("ring C = QQ[x, y] / (x - y, y^2 - 1) order lex; groebner C;").sections
        f = fields(sec)
        assert f["regime"] == "field"
        assert f["order"] == "lex"
        assert f["dimension"] == "2"
        (table,) = sec.tables
        assert table.caption == "reduced basis"
        assert sorted(row[1] for row in table.rows) == ["x - y", "y^2 - 1"]

    def test_groebner_over_the_integers(self):
        (sec,) = run("ring Z6 = ZZ[] / (6); groebner Z6;").sections
        assert fields(sec)["regime"] == "zz-finite"
        assert fields(sec)["additive group"] == "torsion [6], free rank 0"

    def test_koszul(self):
        (sec,) = run("ring R = QQ[x, y]; koszul R (x, y);").sections
        f = fields(sec)
        assert f["length"] == "2"
        assert f["regular"] == "yes"
        assert f["resolves R/(a)"] == "yes"
        rows = sec.tables[0].rows
        assert [r[0] for r in rows] == ["-2", "-1", "0"]
        assert rows[0][1] == rows[1][1] == "0"

    def test_ext(self):
        (sec,) = run("ring R = QQ[x, y]; ext R (x, y);").sections
        rows = sec.tables[0].rows
        assert [r[1] for r in rows[:2]] == ["0", "0"]
        assert rows[2][1].startswith("dim 1")

    def test_omega_of_a_singular_curve(self):
        (sec,) = run("ring C = QQ[x, y] / (y^2 - x^3); omega C;").sections
        assert fields(sec)["rank"] == "not free"
        assert [r[0] for r in sec.tables[0].rows] == ["0", "1", "2"]

    def test_etale(self):
        (sec,) = run("ring E = QQ[x] / (x^2 + 1); etale E;").sections
        assert sec.status == "pass"
        assert all(row[1] == "yes" for row in sec.tables[0].rows)

    def test_base_mismatch_needs_over(self):
        (sec,) = run("ring B = ZZ[] / (2); sq B;").sections
        assert sec.status == "error"
        assert fields(sec)["error"].startswith("DomainError")

    def test_verb_filter(self):
        report = run("snf [[1]]; ring R = QQ[x]; groebner R; snf [[2]];", verb="snf")
        assert [s.verb for s in report.sections] == ["snf", "snf"]

    @pytest.mark.parametrize("text", [
        "oracle snf [[2, 4], [6, 8]];",
        "ring R = QQ[x, y] / (x^2 - y, x*y - 1) order lex; oracle groebner R;",
        "ring R = QQ[x, y]; oracle syzygy R (x, y);",
    ])
    def test_oracles_agree(self, text):
        (sec,) = run(text).sections
        assert sec.status == "pass", sec.render()

    @pytest.mark.slow
    def test_sq_of_the_dual_numbers(self):
        (sec,) = run("ring B = QQ[x] / (x^2); sq B window -2 0;", trace=True).sections
        assert sec.status == "pass"
        assert fields(sec)["nonzero degrees"] == "[0]"
        assert sec.trace[0].startswith("cutoff")

    @pytest.mark.slow
    def test_sq_oracle(self):
        (sec,) = run("ring B = ZZ[] / (2); oracle sq B over ZZ window -2 0;").sections
        assert sec.status == "pass", sec.render()
