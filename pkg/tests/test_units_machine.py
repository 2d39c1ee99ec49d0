import json
import math

from hypothesis import given, strategies as st
import pytest

from exaperf.errors import ParseError, UnitError, ValidationError
from exaperf.machine import (
    MachineSpec,
    Method,
    MethodConfig,
    Topology,
    cube_ok,
    icbrt,
    load_machine_spec,
    machine_from_dict,
    validate_scenario,
)
from exaperf.units import format_si, parse_quantity


def test_parse_prefixes():
    assert parse_quantity("68 GB/s") == (68e9, "byte_rate")
    assert parse_quantity("588.8 GF/s") == (588.8e9, "flop_rate")
    assert parse_quantity("40 MB") == (40e6, "bytes")
    assert parse_quantity("212 pJ") == (212e-12, "joules")
    assert parse_quantity("1 us") == (1e-6, "seconds")
    assert parse_quantity(3) == (3.0, None)


@pytest.mark.parametrize("bad", ["", "GB", "12 furlongs", "1 QB/s", True])
def test_parse_rejects(bad):
    with pytest.raises(UnitError):
        parse_quantity(bad)


def test_format_si():
    assert format_si(18.8416e12, "F/s") == "18.8 TF/s"
    assert format_si(2.4e12, "B/s") == "2.4 TB/s"
    assert format_si(0, "B") == "0 B"


def _write(tmp_path, machine):
    path = tmp_path / "m.json"
    path.write_text(json.dumps({"machine": machine}))
    return path


BASE = {"peak": "588.8 GF/s", "cores": 16, "beta_mem": "68 GB/s", "beta_link": "10 GB/s",
        "Z": "40 MB", "L": "64 B", "P": 11889}


def test_load_peak_to_t_c(tmp_path):
    m = load_machine_spec(_write(tmp_path, BASE))
    assert m.t_c == pytest.approx(16 / 588.8e9, rel=1e-15)
    assert m.t_c == pytest.approx(2.717e-11, rel=1e-3)
    assert m.beta_mem == pytest.approx(1 / 68e9, rel=1e-15)
    assert m.peak == pytest.approx(588.8e9)


def test_load_missing_P_names_field(tmp_path):
    data = {k: v for k, v in BASE.items() if k != "P"}
    with pytest.raises(ValidationError) as info:
        load_machine_spec(_write(tmp_path, data))
    assert info.value.field == "P"


def test_unknown_key_and_bad_json(tmp_path):
    with pytest.raises(ParseError):
        machine_from_dict({**BASE, "colour": "red"})
    path = tmp_path / "bad.json"
    path.write_text('{"machine": {\n  "P": ,\n}}')
    with pytest.raises(ParseError, match=r"bad.json:2:"):
        load_machine_spec(path)


def test_seconds_form_kept():
    m = machine_from_dict({**BASE, "beta_mem": "5.2 ps"})
    assert m.beta_mem == pytest.approx(5.2e-12)


@pytest.mark.parametrize("field,value", [("t_c", 0), ("beta_mem", -1), ("Z", 0), ("P", 0.5),
                                         ("element_size", 3), ("L", 1e9)])
def test_machine_invariants(field, value):
    kw = dict(name="x", t_c=1.0, beta_mem=1.0, beta_link=1.0, Z=1e6, L=64, cores=1, P=1)
    kw[field] = value
    with pytest.raises(ValidationError):
        MachineSpec(**kw)


def test_topology_aliases():
    assert Topology.parse("full") is Topology.FULLY_CONNECTED
    assert Topology.parse("torus3d") is Topology.TORUS3D
    with pytest.raises(ValidationError):
        Topology.parse("ring")


def test_validate_fmm_examples(unit):
    ok = MethodConfig(Method.FMM, 512, fmm_q=8, fmm_k=4, fmm_variant="KIFMM")
    assert validate_scenario(unit, ok) == []
    bad = MethodConfig(Method.FMM, 500, fmm_q=8, fmm_k=4, fmm_variant="KIFMM")
    assert validate_scenario(unit, bad) == ["N: not divisible by fmm_q"]
    not_pow8 = MethodConfig(Method.FMM, 8 * 24, fmm_q=8, fmm_k=4, fmm_variant="KIFMM")
    assert any("power of 8" in e for e in validate_scenario(unit, not_pow8))


def test_validate_mg_gamma(unit):
    errors = validate_scenario(unit, MethodConfig(Method.MG, 64, mg_gamma=1, mg_eta=2))
    assert errors == ["mg_gamma: must be >= 2"]


def test_validate_cache_overflow(unit):
    from dataclasses import replace
    tiny = replace(unit, Z=1000)
    c = MethodConfig(Method.FMM, 512, fmm_q=8, fmm_k=8, fmm_variant="ExaFMM")
    assert "fmm_k: cached M2L operators overflow fast memory" in validate_scenario(tiny, c)


@given(st.integers(1, 10 ** 6))
def test_icbrt_roundtrip(n):
    assert icbrt(n ** 3) == n
    if n > 1:
        assert icbrt(n ** 3 + 1) is None


def test_cube_ok_per_node():
    assert cube_ok(32 ** 3 * 11889, 11889)
    assert not cube_ok(10, 3)


@given(st.floats(1e-3, 1e3), st.sampled_from(["k", "M", "G", "T", "p", "n"]))
def test_parse_scale_property(x, prefix):
    scale = {"k": 1e3, "M": 1e6, "G": 1e9, "T": 1e12, "p": 1e-12, "n": 1e-9}[prefix]
    value, dim = parse_quantity(f"{x!r} {prefix}B")
    assert dim == "bytes"
    assert math.isclose(value, x * scale, rel_tol=1e-14)
