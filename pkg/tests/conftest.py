"""Shared rings and an isolated settings home."""

import pytest

from py_rigidsq.exactlin import QQ_BASE, ZZ_BASE
from py_rigidsq.polyring import polynomial_ring


@pytest.fixture
def QQ0():
    return polynomial_ring(QQ_BASE, [])


@pytest.fixture
def Z():
    return polynomial_ring(ZZ_BASE, [])


@pytest.fixture
def Qx():
    return polynomial_ring(QQ_BASE, ["x"])


@pytest.fixture
def Qxy():
    return polynomial_ring(QQ_BASE, ["x", "y"])


@pytest.fixture
def dual_numbers():
    """QQ[x]/(x^2)."""
    return polynomial_ring(QQ_BASE, ["x"], ["x^2"])


@pytest.fixture
def Z2():
    return polynomial_ring(ZZ_BASE, [], ["2"])


@pytest.fixture
def Z6():
    return polynomial_ring(ZZ_BASE, [], ["6"])


@pytest.fixture
def rigidsq_home(tmp_path, monkeypatch):
    monkeypatch.setenv("RIGIDSQ_HOME", str(tmp_path))
    return tmp_path
