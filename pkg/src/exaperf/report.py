"""Scenario assembly and tabular (CSV/JSON) output for the command line."""

from concurrent.futures import ThreadPoolExecutor
import csv
from dataclasses import dataclass, field, replace
import datetime as _dt
import hashlib
import io
import json
import os
from pathlib import Path
import tempfile
from typing import Optional

from . import analysis, kernels, resilience, trends
from .errors import MixedMethods, ModelError, ValidationError
from .machine import (
    EnergyParams,
    MachineSpec,
    MethodConfig,
    ResilienceParams,
    Topology,
    energy_from_dict,
    machine_from_dict,
    method_from_dict,
    read_config,
    resilience_from_dict,
    validate_scenario,
)
from .units import format_si

DATA_DIR = Path(__file__).parent / "data"

COST_COLUMNS = ["method", "phase", "level", "n_flop", "n_mem_bytes", "msgs", "net_bytes",
                "t_comp", "t_mem", "t_net", "t_pcie"]
ROOFLINE_COLUMNS = ["ai", "attainable_flops"]
POINT_COLUMNS = ["method", "phase", "ai", "attainable_flops", "bound"]
ENERGY_COLUMNS = ["ai", "joules_per_flop"]
KERNEL_ENERGY_COLUMNS = ["method", "phase", "n_flop", "n_mem_bytes", "t_exe", "joules",
                         "joules_per_flop"]
PROJECTION_COLUMNS = ["parameter", "base", "doubling_time", "factor", "projected", "display"]
RESILIENCE_COLUMNS = ["method", "component", "level", "factor_type", "value"]
COMPARE_COLUMNS = ["method", "machine", "t_mem", "t_net", "t_pcie", "t_mem_net", "t_comm", "wins"]
TIER_COLUMNS = ["tier", "ai", "attainable_flops"]


@dataclass(frozen=True)
class Table:
    name: str
    columns: list
    rows: list


@dataclass(frozen=True)
class Scenario:
    machine: MachineSpec
    method: Optional[MethodConfig] = None
    energy: Optional[EnergyParams] = None
    resilience: Optional[ResilienceParams] = None
    overlap: str = "sum"
    outputs: tuple = ()
    doubling_times: Optional[dict] = None
    sources: tuple = field(default_factory=tuple)


# ---------------------------------------------------------------------------
# loading


def resolve_config(ref):
    """Map a bundled config name (``cpu2015``) or a path to a file path."""
    path = Path(ref)
    if path.is_file():
        return path
    for candidate in (DATA_DIR / f"{ref}.json", DATA_DIR / "methods" / f"{ref}.json"):
        if candidate.is_file():
            return candidate
    raise FileNotFoundError(f"no such config file or bundled config: {ref}")


def _merge(base, extra):
    out = dict(base)
    for key, value in extra.items():
        if isinstance(value, dict) and isinstance(out.get(key), dict):
            out[key] = {**out[key], **value}
        else:
            out[key] = value
    return out


SECTIONS = {"machine", "method", "energy", "resilience", "doubling_times"}
SELECTOR_NEEDS = {"energy": "energy", "resilience": "resilience", "project": "doubling_times"}


def load_scenario(machine_ref, method_ref=None, network=None, overlap="sum", outputs=()):
    """Merge a machine file and an optional method file into a :class:`Scenario`.

    A method file may carry a partial ``machine`` object whose keys
    override the machine file (for example a different ``P``).
    """
    paths = [resolve_config(machine_ref)]
    if method_ref is not None:
        paths.append(resolve_config(method_ref))
    raw = {}
    for path in paths:
        raw = _merge(raw, read_config(path))
    unknown = sorted(set(raw) - SECTIONS)
    if unknown:
        raise ValidationError(unknown[0], f"unknown top-level section(s) {', '.join(unknown)}")
    if "machine" not in raw:
        raise ValidationError("machine", "no machine section in the given files")
    machine = machine_from_dict(raw["machine"], name=paths[0].stem)
    if network is not None:
        machine = replace(machine, topology=Topology.parse(network))

    method = None
    if "method" in raw:
        section = dict(raw["method"])
        if "n_per_node" in section:
            if "N" in section:
                raise ValidationError("N", "give either N or n_per_node")
            n = section.pop("n_per_node") * machine.P
            section["N"] = int(n) if float(n).is_integer() else n
        method = method_from_dict(section)
    energy = energy_from_dict(raw["energy"]) if "energy" in raw else None
    res = resilience_from_dict(raw["resilience"]) if "resilience" in raw else None
    doubling = raw.get("doubling_times")
    scn = Scenario(machine, method, energy, res, str(overlap).lower(), tuple(outputs),
                   doubling, tuple(str(p) for p in paths))
    return scn


def scenario_errors(scn):
    """Validation messages for a scenario, including selector prerequisites."""
    errors = []
    if scn.method is not None:
        errors.extend(validate_scenario(scn.machine, scn.method))
    for selector in scn.outputs:
        needed = SELECTOR_NEEDS.get(selector)
        if needed and getattr(scn, needed) is None:
            errors.append(f"{selector}: scenario has no '{needed}' section")
        if selector in ("cost", "resilience", "compare") and scn.method is None:
            errors.append(f"{selector}: scenario has no 'method' section")
    if scn.overlap not in ("sum", "max"):
        errors.append(f"overlap: unknown mode {scn.overlap!r}")
    return errors


# ---------------------------------------------------------------------------
# tables


def _cost_row(cb, level=""):
    return {
        "method": cb.method, "phase": cb.phase, "level": level,
        "n_flop": cb.n_flop, "n_mem_bytes": cb.n_mem_bytes, "msgs": cb.msgs,
        "net_bytes": cb.net_bytes, "t_comp": cb.t_comp, "t_mem": cb.t_mem,
        "t_net": cb.t_net, "t_pcie": cb.t_pcie,
    }


def _level_row(method, lv):
    return {
        "method": method, "phase": lv.phase, "level": lv.level,
        "n_flop": "", "n_mem_bytes": "", "msgs": lv.msgs, "net_bytes": lv.net_bytes,
        "t_comp": "", "t_mem": "", "t_net": lv.t_net, "t_pcie": "",
    }


def cost_table(scn):
    m, c = scn.machine, scn.method
    rows = []
    parts = kernels.kernel_costs(m, c)
    for cb in parts:
        rows.append(_cost_row(cb))
        rows.extend(_level_row(cb.method, lv) for lv in cb.per_level)
    if len(parts) > 1:
        rows.append(_cost_row(kernels.method_cost(m, c)))
    return Table("cost", COST_COLUMNS, rows)


def cost_from_row(row):
    """Rebuild a level-free :class:`CostBreakdown` from a parsed cost row."""
    numeric = {k: float(row[k]) for k in COST_COLUMNS[3:]}
    return kernels.CostBreakdown(method=row["method"], phase=row["phase"], **numeric)


def roofline_table(m, lo, hi, points):
    rows = [{"ai": p.ai, "attainable_flops": p.attainable}
            for p in analysis.roofline_curve(m, lo, hi, points)]
    return Table("roofline", ROOFLINE_COLUMNS, rows)


def kernel_points_table(scn):
    m = scn.machine
    rows = []
    for cb in kernels.kernel_costs(m, scn.method):
        ai = analysis.kernel_ai(cb)
        point = analysis.roofline(m, ai)
        bound = "compute" if ai >= analysis.ridge_point(m) else "memory"
        rows.append({"method": cb.method, "phase": cb.phase, "ai": ai,
                     "attainable_flops": point.attainable, "bound": bound})
    return Table("roofline_points", POINT_COLUMNS, rows)


def memory_tiers_table(m, ai_values):
    rows = []
    for ai in ai_values:
        for tier, value in analysis.memory_aware_roofline(analysis.MEMORY_TIERS, m.peak, ai):
            rows.append({"tier": tier.name, "ai": float(ai), "attainable_flops": value})
    return Table("memory_tiers", TIER_COLUMNS, rows)


def energy_table(scn, lo, hi, points):
    rows = [{"ai": ai, "joules_per_flop": j}
            for ai, j in analysis.energy_curve(scn.energy, scn.machine, lo, hi, points)]
    return Table("energy", ENERGY_COLUMNS, rows)


def kernel_energy_table(scn):
    rows = []
    for cb in kernels.kernel_costs(scn.machine, scn.method):
        t_exe = kernels.execution_time(cb, scn.overlap)
        joules = analysis.energy(scn.energy, cb.n_flop, cb.n_mem_bytes, t_exe)
        rows.append({"method": cb.method, "phase": cb.phase, "n_flop": cb.n_flop,
                     "n_mem_bytes": cb.n_mem_bytes, "t_exe": t_exe, "joules": joules,
                     "joules_per_flop": joules / cb.n_flop if cb.n_flop else 0.0})
    return Table("energy_kernels", KERNEL_ENERGY_COLUMNS, rows)


def projection(scn, horizon):
    if not scn.doubling_times:
        raise ValidationError("doubling_times", "scenario has no doubling times")
    return trends.project_machine(scn.machine, scn.doubling_times, horizon)


def projection_table(rows):
    out = []
    for r in rows:
        out.append({
            "parameter": r.parameter, "base": r.base_value, "doubling_time": r.doubling_time,
            "factor": r.increase_factor, "projected": r.projected_value,
            "display": format_si(r.projected_value, r.unit) if r.unit
            else f"{r.projected_value:.3g}",
        })
    return Table("projection", PROJECTION_COLUMNS, out)


def resilience_table(report):
    rows = []
    for name, value in report.per_structure:
        rows.append({"method": report.method, "component": name, "level": "",
                     "factor_type": "dvf", "value": value})
    rows.append({"method": report.method, "component": "total", "level": "",
                 "factor_type": "dvf", "value": report.dvf_total})
    for kernel, levels, total in report.per_kernel:
        for phase, level, value in levels:
            rows.append({"method": report.method, "component": phase, "level": level,
                         "factor_type": "cvf", "value": value})
        rows.append({"method": report.method, "component": kernel, "level": "",
                     "factor_type": "cvf", "value": total})
    rows.append({"method": report.method, "component": "total", "level": "",
                 "factor_type": "cvf", "value": report.cvf_total})
    return Table("resilience", RESILIENCE_COLUMNS, rows)


def scenario_vulnerability(scn):
    return resilience.vulnerability_report(scn.machine, scn.method, scn.resilience, scn.overlap)


def compare(scenarios):
    """Side-by-side communication costs of one method on several machines.

    Each row's ``wins`` lists the columns where that machine is cheapest.
    """
    scenarios = list(scenarios)
    if len(scenarios) < 2:
        raise ValidationError("scenarios", "need at least two scenarios to compare")
    methods = {s.method.method for s in scenarios}
    if len(methods) != 1:
        raise MixedMethods(f"cannot compare different methods: {sorted(x.value for x in methods)}")
    rows = []
    for s in scenarios:
        cb = kernels.method_cost(s.machine, s.method)
        rows.append({"method": cb.method, "machine": s.machine.name, "t_mem": cb.t_mem,
                     "t_net": cb.t_net, "t_pcie": cb.t_pcie, "t_mem_net": cb.t_mem + cb.t_net,
                     "t_comm": cb.t_mem + cb.t_net + cb.t_pcie})
    for row in rows:
        wins = [col for col in ("t_mem", "t_net", "t_pcie", "t_mem_net", "t_comm")
                if row[col] == min(r[col] for r in rows)]
        row["wins"] = ";".join(wins)
    return Table("compare", COMPARE_COLUMNS, rows)


# ---------------------------------------------------------------------------
# formatting


def format_value(value):
    if isinstance(value, bool):
        return str(value).lower()
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        return format(value, ".9g")
    return str(value)


def render(table, fmt="csv"):
    if fmt == "json":
        return json.dumps([{c: row[c] for c in table.columns} for row in table.rows],
                          indent=2) + "\n"
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(table.columns)
    for row in table.rows:
        writer.writerow([format_value(row[c]) for c in table.columns])
    return buf.getvalue()


def read_csv_rows(text):
    return list(csv.DictReader(io.StringIO(text)))


def atomic_write(path, text):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _digest(path):
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def report_tables(scn, horizon=10.0, ai_range=(2.0 ** -4, 2.0 ** 10, 64)):
    """Every table the scenario supports, as ``(selector, [tables])`` in fixed order."""
    lo, hi, points = ai_range
    jobs = [("roofline", lambda: [roofline_table(scn.machine, lo, hi, points),
                                  memory_tiers_table(scn.machine, (1.0, 8.0, 64.0))])]
    if scn.method is not None:
        jobs.insert(0, ("cost", lambda: [cost_table(scn)]))
        jobs.append(("roofline_points", lambda: [kernel_points_table(scn)]))
    if scn.energy is not None:
        extra = [kernel_energy_table(scn)] if scn.method is not None else []
        jobs.append(("energy", lambda: [energy_table(scn, lo, hi, points)] + extra))
    if scn.doubling_times:
        jobs.append(("project", lambda: [projection_table(projection(scn, horizon)[1])]))
    if scn.resilience is not None and scn.method is not None:
        jobs.append(("resilience", lambda: [resilience_table(scenario_vulnerability(scn))]))
    # evaluation is pure; results are joined in the job order above
    with ThreadPoolExecutor() as pool:
        futures = [(sel, pool.submit(fn)) for sel, fn in jobs]
        return [(sel, fut.result()) for sel, fut in futures]


def write_report(scn, out_dir, fmt="csv", horizon=10.0, ai_range=(2.0 ** -4, 2.0 ** 10, 64)):
    out_dir = Path(out_dir)
    artifacts = []
    for selector, tables in report_tables(scn, horizon, ai_range):
        for table in tables:
            path = out_dir / f"{table.name}.{fmt}"
            atomic_write(path, render(table, fmt))
            artifacts.append({"selector": selector, "file": path.name, "sha256": _digest(path)})
    if scn.doubling_times:
        projected, _ = projection(scn, horizon)
        path = out_dir / "projected_machine.json"
        atomic_write(path, json.dumps({"machine": projected.to_dict()}, indent=2) + "\n")
        artifacts.append({"selector": "project", "file": path.name, "sha256": _digest(path)})
    manifest = {
        "created": _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds"),
        "inputs": [{"path": p, "sha256": _digest(p)} for p in scn.sources],
        "artifacts": artifacts,
    }
    atomic_write(out_dir / "manifest.json", json.dumps(manifest, indent=2) + "\n")
    return manifest


__all__ = [
    "Scenario", "Table", "load_scenario", "scenario_errors", "cost_table", "compare",
    "render", "write_report", "ModelError",
]
