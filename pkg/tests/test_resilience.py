from dataclasses import replace
import math

from hypothesis import given, strategies as st
import pytest

from exaperf import kernels, resilience
from exaperf.errors import MissingLevels
from exaperf.machine import Method, MethodConfig, ResilienceParams, Topology
from exaperf.report import load_scenario

R = ResilienceParams(fit=10, a=0.1, b=0.2, p_a=0.5, p_b=0.5)


def test_dvf_examples():
    assert resilience.dvf(R, 2, 3, 4) == 240
    assert resilience.dvf(R, 0, 3, 4) == 0
    assert resilience.dvf(R, 2, 3, 8) == 2 * resilience.dvf(R, 2, 3, 4)


@given(st.floats(0.01, 100), st.floats(0, 1e3), st.floats(0, 1e3), st.floats(0, 1e3))
def test_dvf_multilinear(c, t, s, n):
    base = resilience.dvf(R, t, s, n)
    assert math.isclose(resilience.dvf(R, c * t, s, n), c * base, rel_tol=1e-12, abs_tol=1e-300)
    assert math.isclose(resilience.dvf(replace(R, fit=10 * c), t, s, n), c * base,
                        rel_tol=1e-12, abs_tol=1e-300)


def test_rf_examples():
    assert resilience.effective_link_failure(R) == pytest.approx(0.2)
    assert resilience.network_resilience_factor(R, 2) == pytest.approx(0.45)
    assert resilience.network_resilience_factor(ResilienceParams(), 5) == 0
    sure = ResilienceParams(a=1, b=1, p_a=1, p_b=1)
    assert resilience.effective_link_failure(sure) == 1
    assert resilience.network_resilience_factor(sure, 3) == 4


def test_diameter():
    assert resilience.diameter(Topology.FULLY_CONNECTED, 10 ** 6) == 1
    assert resilience.diameter(Topology.TORUS3D, 8) == 3
    assert resilience.diameter(Topology.TORUS3D, 11889) == 3 * (22 // 2)
    assert resilience.diameter(Topology.TORUS3D, 64) == 6
    assert all(resilience.diameter(t, p) >= 1 for t in Topology for p in (2, 3, 7))


def test_cvf_example(unit):
    cb = kernels.CostBreakdown("MG", "smoother", 0, 0, 0, 0, 0, 0, 10,
                               per_level=(kernels.LevelCost("vcycle", 0, 6, 4, 10.0),))
    m = replace(unit, P=8)
    r = replace(R, h_bar_override=2)
    levels, total = resilience.cvf(cb, r, m)
    assert total == pytest.approx(27)
    assert levels[0][2] == pytest.approx(27)
    _, zero = resilience.cvf(cb, ResilienceParams(), m)
    assert zero == 0
    with pytest.raises(MissingLevels):
        resilience.cvf(replace(cb, per_level=()), r, m)


def test_mg_cvf_decreases_to_clamp(cpu2015):
    c = MethodConfig(Method.MG, 32 ** 3 * cpu2015.P, mg_gamma=2, mg_eta=2)
    cb = kernels.mg_cost(cpu2015, c)
    levels, _ = resilience.cvf(cb, ResilienceParams(a=0.01, p_a=0.1), cpu2015)
    values = [v for _, _, v in levels]
    clamp = next(i for i, lv in enumerate(cb.per_level) if lv.net_bytes == 8)
    assert all(a > b for a, b in zip(values[:clamp], values[1:clamp + 1]))
    assert len(set(values[clamp:])) == 1


@pytest.mark.parametrize("method", ["fft", "fmm", "mg"])
def test_report_totals_are_sums(method):
    s = load_scenario("cpu2015", f"{method}_32cubed")
    rep = resilience.vulnerability_report(s.machine, s.method, s.resilience)
    assert rep.dvf_total == sum(v for _, v in rep.per_structure)
    assert rep.cvf_total == sum(k[2] for k in rep.per_kernel)
    for _, levels, total in rep.per_kernel:
        assert total == sum(v for _, _, v in levels)
