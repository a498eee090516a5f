import random

import pytest

from cayleywalk.cayley import build_ball
from cayleywalk.config import CONFIG_ENV_VAR
from cayleywalk.oracles import oracle_for


@pytest.fixture(scope="session")
def z2():
    return oracle_for("z2")


@pytest.fixture(scope="session")
def tree3():
    return oracle_for("tree:3")


@pytest.fixture(scope="session")
def bs12():
    return oracle_for("bs12")


@pytest.fixture(scope="session")
def grig():
    return oracle_for("grigorchuk")


@pytest.fixture(scope="session")
def z2_ball(z2):
    return build_ball(z2, 12)


@pytest.fixture(scope="session")
def tree3_ball(tree3):
    return build_ball(tree3, 12)


@pytest.fixture(scope="session")
def bs12_ball(bs12):
    return build_ball(bs12, 6)


@pytest.fixture(scope="session")
def grig_ball(grig):
    return build_ball(grig, 6)


@pytest.fixture
def rng():
    return random.Random(20240611)


@pytest.fixture
def isolated(tmp_path, monkeypatch):
    """Run with no config file in reach."""
    monkeypatch.delenv(CONFIG_ENV_VAR, raising=False)
    monkeypatch.chdir(tmp_path)
    return tmp_path
