"""The settings database and the run history."""

import pytest

from py_rigidsq.db import DB_FILENAME, DEFAULTS, Database, db_home, find_db, init_db, open_db


@pytest.fixture
def db(rigidsq_home):
    database = init_db()
    yield database
    database.close()


class TestLocation:
    def test_home_from_the_environment(self, rigidsq_home):
        assert db_home() == rigidsq_home
        assert find_db() is None

    def test_open_without_a_database(self, rigidsq_home):
        with pytest.raises(FileNotFoundError, match="py-rigidsq init"):
            open_db()

    def test_init_creates_the_file(self, db, rigidsq_home):
        assert db.db_path == rigidsq_home / DB_FILENAME
        assert find_db() == db.db_path

    def test_explicit_target(self, tmp_path):
        target = tmp_path / "nested" / "home"
        database = init_db(target)
        assert (target / DB_FILENAME).exists()
        database.close()


class TestConfig:
    def test_defaults(self, db):
        assert db.all_config() == DEFAULTS

    def test_set_normalizes_keys(self, db):
        db.set_config("default-depth", "9")
        assert db.get_config("default_depth") == "9"
        assert db.get_config("Default.Depth") == "9"

    def test_report_dir_is_known(self, db):
        db.set_config("report-dir", "/tmp/reports")
        assert db.all_config()["report_dir"] == "/tmp/reports"

    def test_unknown_key(self, db):
        with pytest.raises(KeyError, match="unknown setting 'colour'"):
            db.set_config("colour", "red")
        assert db.get_config("colour") is None

    def test_settings_survive_reopening(self, db):
        db.set_config("default_base", "ZZ")
        again = open_db()
        assert again.get_config("default_base") == "ZZ"
        again.close()

    def test_reinit_restores_defaults(self, db):
        db.set_config("default_depth", "2")
        fresh = init_db()
        assert fresh.get_config("default_depth") == DEFAULTS["default_depth"]
        fresh.close()


class TestRuns:
    def test_record_and_list(self, db):
        first = db.record_run("snf", "aaaaaaaaaaaa", 0, 0.25)
        second = db.record_run("sq", "bbbbbbbbbbbb", 3, 1.5, "/tmp/r.txt")
        assert second > first
        runs = db.recent_runs()
        assert [r["verb"] for r in runs] == ["sq", "snf"]
        assert runs[0]["status"] == 3
        assert runs[0]["report_path"] == "/tmp/r.txt"
        assert runs[1]["report_path"] is None

    def test_limit(self, db):
        for k in range(5):
            db.record_run("snf", f"{k:012d}", 0, 0.0)
        assert len(db.recent_runs(2)) == 2

    def test_migration_is_idempotent(self, db):
        again = Database(db.db_path)
        again.init_schema()
        assert again.recent_runs() == []
        again.close()
