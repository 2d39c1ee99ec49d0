"""Data and communication vulnerability factors.

All factors are exposure indices (literal products of their inputs), not
probabilities.
"""

from dataclasses import dataclass
import math

from .errors import MissingLevels
from .kernels import (
    HALO_NEIGHBORS,
    M2L_INTERACTIONS,
    MG_NEIGHBORS,
    coeff_bytes,
    execution_time,
    fmm_m2l_mem_terms,
    fmm_p2p_mem_terms,
    kernel_costs,
    method_cost,
    mg_level_sum,
    octree_depth,
)
from .machine import Method, Topology, effective_element_size

SECONDS_PER_HOUR = 3600.0
BITS_PER_MBIT = 1e6
INDEX_BYTES = 8
MG_ARRAYS = 3  # solution, right-hand side, residual


@dataclass(frozen=True)
class VulnerabilityReport:
    method: str
    per_structure: tuple   # (name, dvf)
    dvf_total: float
    per_kernel: tuple      # (kernel, ((phase, level, cvf), ...), cvf)
    cvf_total: float


def dvf(r, t_exe_hours, s_d, n_ha):
    """FIT x execution time (hours) x structure size (Mbit) x memory accesses."""
    return r.fit * t_exe_hours * s_d * n_ha


def effective_link_failure(r):
    p_e = r.a * r.p_a + 2 * r.b * r.p_b - r.b * r.p_b ** 2
    return min(1.0, max(0.0, p_e))


def network_resilience_factor(r, h_bar):
    return h_bar * effective_link_failure(r) + r.b * r.p_b ** 2


def diameter(topology, P):
    if Topology(topology) is Topology.FULLY_CONNECTED:
        return 1
    side = math.floor(P ** (1.0 / 3.0) * (1 + 1e-12))
    return max(1, 3 * (side // 2))


def hop_count(r, m):
    if r.h_bar_override is not None:
        return r.h_bar_override
    return diameter(m.topology, m.P)


def cvf(cost, r, m):
    """CVF of one kernel breakdown: ``(per-level list, total)``.

    Hierarchical methods sum ``messages x level time x RF_n`` over levels;
    the message count is the per-exchange fan-out (26 for FMM, 6 for MG).
    """
    rf = network_resilience_factor(r, hop_count(r, m))
    if cost.method == Method.FFT.value:
        msgs = 2 * math.sqrt(m.P)
        value = msgs * cost.t_net * rf
        return ((cost.phase, 0, value),), value
    if not cost.per_level:
        raise MissingLevels(f"{cost.method}/{cost.phase} has no per-level data")
    fan_out = MG_NEIGHBORS if cost.method == Method.MG.value else HALO_NEIGHBORS
    levels = tuple((lv.phase, lv.level, fan_out * lv.t_net * rf) for lv in cost.per_level)
    return levels, sum(v for _, _, v in levels)


def _mbit(nbytes):
    return nbytes * 8 / BITS_PER_MBIT


def _structures(m, c):
    """(name, size in bytes, main-memory accesses in lines) per data structure."""
    es = effective_element_size(m, c)
    n = c.N / m.P
    line = m.L
    if c.method is Method.FFT:
        cost = method_cost(m, c)
        return [("pencil_array", es * n, cost.n_mem_bytes / line)]
    if c.method is Method.MG:
        cost = method_cost(m, c)
        points = mg_level_sum(c.N, m.P, c.mg_gamma)
        return [("level_grids", MG_ARRAYS * es * points, cost.n_mem_bytes / line)]
    # FMM: streaming terms hit bodies and coefficients, capacity terms the tree
    p2p_stream, p2p_capacity = fmm_p2p_mem_terms(m, c)
    m2l_coeff, m2l_capacity = fmm_m2l_mem_terms(m, c)
    leaves = n / c.fmm_q
    depth = octree_depth(leaves)
    boxes = sum(8 ** i for i in range(depth + 1))
    return [
        ("bodies", 4 * es * n, p2p_stream / line),
        ("local_tree", boxes * (HALO_NEIGHBORS + M2L_INTERACTIONS) * INDEX_BYTES,
         (p2p_capacity + m2l_capacity) / line),
        ("coefficients", 2 * boxes * coeff_bytes(m, c), m2l_coeff / line),
    ]


def vulnerability_report(m, c, r, overlap="sum"):
    cost = method_cost(m, c)
    hours = execution_time(cost, overlap) / SECONDS_PER_HOUR
    per_structure = tuple(
        (name, dvf(r, hours, _mbit(size), accesses))
        for name, size, accesses in _structures(m, c)
    )
    per_kernel = []
    if c.method is Method.FMM:
        for kernel in kernel_costs(m, c):
            levels, total = cvf(kernel, r, m)
            per_kernel.append((kernel.phase, levels, total))
    else:
        levels, total = cvf(cost, r, m)
        per_kernel.append((cost.phase, levels, total))
    return VulnerabilityReport(
        method=c.method.value,
        per_structure=per_structure,
        dvf_total=sum(v for _, v in per_structure),
        per_kernel=tuple(per_kernel),
        cvf_total=sum(k[2] for k in per_kernel),
    )
