"""The command line: compute verbs, settings and history."""

import io
import sqlite3
import sys

import pytest

from py_rigidsq import cli
from py_rigidsq.db import init_db, open_db

SNF = "snf [[2, 4], [6, 8]];\n"


def run_cli(monkeypatch, *argv):
    monkeypatch.setattr(sys, "argv", ["py-rigidsq", *argv])
    with pytest.raises(SystemExit) as info:
        cli.main()
    return info.value.code


@pytest.fixture
def source(tmp_path):
    def write(text, name="job.rsq"):
        path = tmp_path / name
        path.write_text(text)
        return str(path)
    return write


class TestCompute:
    def test_snf(self, monkeypatch, capsys, rigidsq_home, source):
        assert run_cli(monkeypatch, "snf", source(SNF)) == 0
        out = capsys.readouterr().out
        assert out.startswith("# py-rigidsq report\n")
        assert "invariant factors: [2, 4]" in out
        assert "status: pass" in out

    def test_run_executes_every_statement(self, monkeypatch, capsys, rigidsq_home, source):
        text = SNF + "ring R = QQ[x, y]; koszul R (x, y);\n"
        assert run_cli(monkeypatch, "run", source(text)) == 0
        assert "statements: 2" in capsys.readouterr().out

    def test_verb_filter(self, monkeypatch, capsys, rigidsq_home, source):
        text = SNF + "ring R = QQ[x, y]; koszul R (x, y);\n"
        assert run_cli(monkeypatch, "koszul", source(text)) == 0
        assert "statements: 1" in capsys.readouterr().out

    def test_parse_error(self, monkeypatch, capsys, rigidsq_home, source):
        path = source("frobnicate B;\n")
        assert run_cli(monkeypatch, "run", path) == 2
        assert capsys.readouterr().err == f"Error: {path}:1:1: unknown verb 'frobnicate'\n"

    def test_missing_verb(self, monkeypatch, capsys, rigidsq_home, source):
        assert run_cli(monkeypatch, "groebner", source(SNF)) == 2
        assert "no 'groebner' statements" in capsys.readouterr().err

    def test_empty_window(self, monkeypatch, capsys, rigidsq_home, source):
        assert run_cli(monkeypatch, "snf", source(SNF), "--window", "2", "0") == 2
        assert "empty window 2..0" in capsys.readouterr().err

    def test_missing_file(self, monkeypatch, capsys, rigidsq_home, tmp_path):
        assert run_cli(monkeypatch, "snf", str(tmp_path / "absent.rsq")) == 2

    def test_refused_statement(self, monkeypatch, capsys, rigidsq_home, source):
        assert run_cli(monkeypatch, "sq", source("ring B = ZZ[] / (2); sq B;")) == 2
        captured = capsys.readouterr()
        assert "error: DomainError" in captured.out
        assert "1 of 1 statement(s) error: line 1 error" in captured.err

    def test_base_option(self, monkeypatch, capsys, rigidsq_home, source):
        text = "ring E = Fp 5 [x] / (x^2 - 2); omega E;"
        assert run_cli(monkeypatch, "omega", source(text), "--base", "Fp", "5") == 0
        assert "rank: 0" in capsys.readouterr().out

    def test_stdin(self, monkeypatch, capsys, rigidsq_home):
        monkeypatch.setattr(sys, "stdin", io.StringIO(SNF))
        assert run_cli(monkeypatch, "snf", "-") == 0
        assert "rank: 2" in capsys.readouterr().out

    def test_out(self, monkeypatch, capsys, rigidsq_home, source, tmp_path):
        target = tmp_path / "reports" / "snf.txt"
        assert run_cli(monkeypatch, "snf", source(SNF), "--out", str(target)) == 0
        assert "Report written to" in capsys.readouterr().out
        assert "invariant factors: [2, 4]" in target.read_text()


class TestSettings:
    def test_init(self, monkeypatch, capsys, rigidsq_home):
        assert run_cli(monkeypatch, "init") == 0
        assert "Database created" in capsys.readouterr().out
        assert run_cli(monkeypatch, "init") == 0
        assert "already initialized" in capsys.readouterr().out

    def test_forced_init_asks(self, monkeypatch, capsys, rigidsq_home):
        init_db().close()
        monkeypatch.setattr("builtins.input", lambda prompt: "n")
        assert run_cli(monkeypatch, "init", "--force") == 0
        assert "Cancelled." in capsys.readouterr().out

    def test_config_set_and_show(self, monkeypatch, capsys, rigidsq_home):
        init_db().close()
        assert run_cli(monkeypatch, "config", "set", "default-depth", "3") == 0
        assert "updated: 6 -> 3" in capsys.readouterr().out
        assert run_cli(monkeypatch, "config") == 0
        assert "default_depth: 3" in capsys.readouterr().out

    def test_unknown_key(self, monkeypatch, capsys, rigidsq_home):
        init_db().close()
        assert run_cli(monkeypatch, "config", "set", "colour", "red") == 2
        assert "unknown setting 'colour'" in capsys.readouterr().err

    def test_config_needs_a_database(self, monkeypatch, capsys, rigidsq_home):
        assert run_cli(monkeypatch, "config") == 2
        assert "py-rigidsq init" in capsys.readouterr().err

    def test_window_setting(self, monkeypatch, capsys, rigidsq_home, source):
        db = init_db()
        db.set_config("default_window_lo", "1")
        db.close()
        assert run_cli(monkeypatch, "snf", source(SNF)) == 2
        assert "empty window 1..0" in capsys.readouterr().err

    def test_report_dir(self, monkeypatch, capsys, rigidsq_home, source, tmp_path):
        db = init_db()
        db.set_config("report_dir", str(tmp_path / "out"))
        db.close()
        assert run_cli(monkeypatch, "snf", source(SNF)) == 0
        (report,) = (tmp_path / "out").iterdir()
        assert report.name.endswith("-snf.txt")
        runs = open_db().recent_runs()
        assert runs[0]["report_path"] == str(report)

    def test_history(self, monkeypatch, capsys, rigidsq_home, source):
        init_db().close()
        assert run_cli(monkeypatch, "history") == 0
        assert "No runs recorded." in capsys.readouterr().out
        assert run_cli(monkeypatch, "snf", source(SNF)) == 0
        capsys.readouterr()
        assert run_cli(monkeypatch, "history") == 0
        lines = capsys.readouterr().out.splitlines()
        assert lines[0].split() == ["Run", "Verb", "Digest", "Exit", "Elapsed", "Date"]
        cells = lines[2].split()
        assert cells[1] == "snf"
        assert len(cells[2]) == 12
        assert cells[3] == "0"

    @pytest.mark.parametrize("verb, text, code", [
        ("run", "frobnicate B;\n", 2),
        ("groebner", SNF, 2),
        ("snf", SNF, 0),
    ])
    def test_settings_are_closed(self, monkeypatch, capsys, rigidsq_home, source, verb, text, code):
        init_db().close()
        opened = []

        def spy():
            db = open_db()
            opened.append(db)
            return db
        monkeypatch.setattr(cli, "_open_settings", spy)
        assert run_cli(monkeypatch, verb, source(text)) == code
        with pytest.raises(sqlite3.ProgrammingError):
            opened[0].conn.execute("SELECT 1")


def test_no_command_prints_help(monkeypatch, capsys):
    assert run_cli(monkeypatch) == 0
    assert "usage: py-rigidsq" in capsys.readouterr().out
