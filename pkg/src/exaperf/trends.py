"""Exponential hardware-trend fitting and forward projection."""

import csv
from dataclasses import dataclass, replace
import math

import numpy as np

from .errors import DegenerateSeries, InvalidHorizon, MissingDoublingTime, ValidationError

# Parameters that project_machine must have a doubling time for.
SCALED_PARAMETERS = ("peak", "mem_bandwidth", "cores", "Z", "L", "link_bandwidth", "P")
OPTIONAL_PARAMETERS = ("pcie_bandwidth",)


@dataclass(frozen=True)
class TrendSeries:
    metric: str
    points: tuple

    def __post_init__(self):
        pts = tuple((float(y), float(v)) for y, v in self.points)
        if len(pts) < 2:
            raise ValidationError("points", "need at least two points")
        if any(v <= 0 for _, v in pts):
            raise ValidationError("points", "values must be positive")
        if any(b[0] <= a[0] for a, b in zip(pts, pts[1:])):
            raise ValidationError("points", "years must be strictly increasing")
        object.__setattr__(self, "points", pts)


@dataclass(frozen=True)
class ProjectionRow:
    parameter: str
    base_value: float
    doubling_time: float
    horizon: float
    increase_factor: float
    projected_value: float
    unit: str = ""


def fit_doubling_time(series):
    """Least-squares doubling time of ``series`` in years.

    Fits log2(value) against year; returns ``math.inf`` when the slope is
    zero or negative (no growth).
    """
    years = np.array([y for y, _ in series.points])
    if np.unique(years).size < 2:
        raise DegenerateSeries(f"{series.metric}: fewer than two distinct years")
    logs = np.log2([v for _, v in series.points])
    # centring keeps the normal equations well conditioned for calendar years
    x = years - years.mean()
    slope = float(np.dot(x, logs - logs.mean()) / np.dot(x, x))
    if slope <= 0 or abs(slope) < 1e-15:
        return math.inf
    return 1.0 / slope


def read_trend_csv(path, metric=None):
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    points = [(float(r["year"]), float(r["value"])) for r in rows]
    return TrendSeries(metric or str(path), tuple(points))


def increase_factor(doubling_time, horizon):
    if horizon < 0:
        raise InvalidHorizon(f"horizon must be >= 0, got {horizon}")
    if not doubling_time > 0:
        raise ValidationError("doubling_time", "must be positive")
    if math.isinf(doubling_time):
        return 1.0
    return 2.0 ** (horizon / doubling_time)


def project(base_value, doubling_time, horizon, parameter="", unit=""):
    factor = increase_factor(doubling_time, horizon)
    return ProjectionRow(parameter, base_value, doubling_time, horizon, factor,
                         base_value * factor, unit)


_PARAM_UNITS = {
    "peak": "F/s", "mem_bandwidth": "B/s", "link_bandwidth": "B/s",
    "pcie_bandwidth": "B/s", "cores": "", "Z": "B", "L": "B", "P": "",
}


def _base_values(m):
    values = {
        "peak": m.peak,
        "mem_bandwidth": m.mem_bandwidth,
        "cores": m.cores,
        "Z": m.Z,
        "L": m.L,
        "link_bandwidth": m.link_bandwidth,
        "P": m.P,
    }
    if m.beta_pcie > 0:
        values["pcie_bandwidth"] = 1.0 / m.beta_pcie
    return values


def project_machine(base, doubling_times, horizon, name=None):
    """Scale every rate/capacity of ``base`` forward by ``horizon`` years.

    Returns ``(machine, rows)``.  Inverse-time fields follow their rate:
    ``beta_*`` is divided by its bandwidth factor, and ``t_c`` is recomputed
    as ``cores / peak`` so the per-core definition survives projection.
    """
    for key in SCALED_PARAMETERS:
        if key not in doubling_times:
            raise MissingDoublingTime(key)
    values = _base_values(base)
    rows = []
    for key, value in values.items():
        if key not in doubling_times:
            continue
        rows.append(project(value, doubling_times[key], horizon, key, _PARAM_UNITS[key]))
    proj = {r.parameter: r.projected_value for r in rows}
    changes = dict(
        t_c=proj["cores"] / proj["peak"],
        beta_mem=1.0 / proj["mem_bandwidth"],
        beta_link=1.0 / proj["link_bandwidth"],
        cores=proj["cores"],
        Z=proj["Z"],
        L=proj["L"],
        P=proj["P"],
        name=name or f"{base.name}+{horizon:g}y",
    )
    if "pcie_bandwidth" in proj:
        changes["beta_pcie"] = 1.0 / proj["pcie_bandwidth"]
    if horizon == 0:
        # exact identity: avoid cores/(cores/t_c) rounding
        changes = {"name": changes["name"]}
    return replace(base, **changes), rows
