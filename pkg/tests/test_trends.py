import math

from hypothesis import given, strategies as st
import pytest

from exaperf.errors import DegenerateSeries, InvalidHorizon, MissingDoublingTime, ValidationError
from exaperf.report import load_scenario
from exaperf.trends import (
    TrendSeries,
    fit_doubling_time,
    increase_factor,
    project,
    project_machine,
    read_trend_csv,
)


def test_fit_examples():
    assert fit_doubling_time(TrendSeries("a", ((2015, 100), (2017, 200), (2019, 400)))) \
        == pytest.approx(2.0, rel=1e-12)
    assert fit_doubling_time(TrendSeries("b", ((2010, 5), (2011, 10), (2012, 20)))) \
        == pytest.approx(1.0, rel=1e-12)
    assert fit_doubling_time(TrendSeries("c", ((2015, 100), (2016, 100)))) == math.inf
    assert fit_doubling_time(TrendSeries("d", ((2015, 100), (2016, 50)))) == math.inf


def test_series_validation():
    with pytest.raises(ValidationError):
        TrendSeries("x", ((2015, 1),))
    with pytest.raises(ValidationError):
        TrendSeries("x", ((2015, 1), (2014, 2)))
    with pytest.raises(ValidationError):
        TrendSeries("x", ((2015, 0), (2016, 2)))
    assert issubclass(DegenerateSeries, Exception)


def test_read_csv(tmp_path):
    path = tmp_path / "s.csv"
    path.write_text("year,value\n2000,1\n2003,2\n2006,4\n")
    assert fit_doubling_time(read_trend_csv(path)) == pytest.approx(3.0)


def test_project_examples():
    row = project(588.8e9, 2.0, 10)
    assert row.increase_factor == 32.0
    assert row.projected_value == pytest.approx(18.8416e12)
    row = project(1.45e12, 1.47, 10)
    assert row.increase_factor == pytest.approx(111.6, rel=1e-3)
    assert row.projected_value == pytest.approx(161.8e12, rel=1e-3)
    assert project(7.0, 3.3, 0).projected_value == 7.0
    with pytest.raises(InvalidHorizon):
        increase_factor(2.0, -1)
    assert increase_factor(math.inf, 10) == 1.0


@given(st.floats(0.5, 20), st.floats(0, 15), st.floats(0, 15))
def test_factor_composes(d, h1, h2):
    assert math.isclose(increase_factor(d, h1) * increase_factor(d, h2),
                        increase_factor(d, h1 + h2), rel_tol=1e-12)


def test_project_machine_cpu():
    scn = load_scenario("cpu2015")
    m, rows = project_machine(scn.machine, scn.doubling_times, 10)
    assert m.peak == pytest.approx(18.8e12, rel=0.01)
    assert m.mem_bandwidth == pytest.approx(258e9, rel=0.01)
    assert m.cores == pytest.approx(132, rel=0.01)
    assert m.P == pytest.approx(372e3, rel=0.01)
    assert m.link_bandwidth == pytest.approx(100e9, rel=0.01)
    assert m.t_c == pytest.approx(m.cores / m.peak)
    assert [r.parameter for r in rows][:2] == ["peak", "mem_bandwidth"]


def test_project_machine_gpu():
    scn = load_scenario("gpu2015")
    m, _ = project_machine(scn.machine, scn.doubling_times, 10)
    assert m.peak == pytest.approx(161.8e12, rel=0.01)
    assert m.cores == pytest.approx(101.6e3, rel=0.01)
    assert m.P == pytest.approx(43.3e3, rel=0.01)
    assert m.beta_pcie == pytest.approx(scn.machine.beta_pcie)  # no pcie doubling time


def test_project_machine_identity_and_missing():
    scn = load_scenario("cpu2015")
    m, _ = project_machine(scn.machine, scn.doubling_times, 0, name=scn.machine.name)
    assert m == scn.machine
    partial = {k: v for k, v in scn.doubling_times.items() if k != "L"}
    with pytest.raises(MissingDoublingTime) as info:
        project_machine(scn.machine, partial, 10)
    assert info.value.field == "L"
