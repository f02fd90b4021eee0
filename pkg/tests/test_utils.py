"""Settings-key normalization, prompts, table rendering and owner-held caches."""

import pytest

from py_rigidsq.utils import confirm, error, format_table, info, memo_on, normalize_key


@pytest.mark.parametrize("raw, key", [
    ("default-depth", "default_depth"),
    ("Default.Window.Lo", "default_window_lo"),
    ("report__dir", "report_dir"),
    ("default_base", "default_base"),
])
def test_normalize_key(raw, key):
    assert normalize_key(raw) == key


class TestConfirm:
    @pytest.mark.parametrize("answer, default_yes, expected", [
        ("y", False, True),
        ("YES", False, True),
        ("n", True, False),
        ("", True, True),
        ("", False, False),
        ("c", True, False),
        ("cancel", True, False),
        ("maybe", True, False),
    ])
    def test_answers(self, monkeypatch, answer, default_yes, expected):
        monkeypatch.setattr("builtins.input", lambda prompt: answer)
        assert confirm("Proceed?", default_yes) is expected

    def test_prompt_suffix(self, monkeypatch):
        prompts = []
        monkeypatch.setattr("builtins.input", lambda prompt: prompts.append(prompt) or "")
        confirm("Reset?")
        confirm("Reset?", default_yes=False)
        assert prompts == ["Reset? [Y/n] ", "Reset? [y/N] "]


class TestTables:
    def test_alignment(self):
        text = format_table(["degree", "H"], [["-1", "Z/2"], ["0", "0"]])
        assert text.splitlines() == [
            "degree  H",
            "------  ---",
            "-1      Z/2",
            "0       0",
        ]

    def test_empty(self):
        assert format_table(["a"], []) == "  (none)"


def test_messages(capsys):
    error("bad input")
    info("done")
    captured = capsys.readouterr()
    assert captured.err == "Error: bad input\n"
    assert captured.out == "done\n"


class Owner:
    pass


class TestMemo:
    def test_builds_once_per_key(self):
        owner, key = Owner(), Owner()
        calls = []

        def build():
            calls.append(1)
            return object()
        first = memo_on(owner, "value", build, key)
        assert memo_on(owner, "value", build, key) is first
        assert memo_on(owner, "value", build, Owner()) is not first
        assert memo_on(owner, "other", build, key) is not first
        assert len(calls) == 3

    def test_values_live_on_the_owner(self):
        first, second = Owner(), Owner()
        a = memo_on(first, "value", object)
        assert memo_on(second, "value", object) is not a
        assert first.__dict__["_memo"][("value",)][1] is a
