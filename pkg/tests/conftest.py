import pytest

from exaperf.report import load_scenario


@pytest.fixture
def unit():
    return load_scenario("unit").machine


@pytest.fixture
def cpu2015():
    return load_scenario("cpu2015").machine
