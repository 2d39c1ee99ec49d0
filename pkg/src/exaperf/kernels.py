"""Closed-form computation, memory, network and PCIe cost models.

Every model returns a :class:`CostBreakdown` whose times are derived from
its counts with the machine's rates, so ``t_comp == n_flop * t_c`` and
friends hold exactly.  Logarithms in FLOP counts are base 2.
"""

from dataclasses import dataclass, field, replace
import math

from .errors import (
    CacheOverflow,
    InfeasibleDecomposition,
    InvalidKappa,
    InvalidRate,
    InvalidTree,
    ModelError,
    NotACube,
)
from .machine import Expansion, FMMVariant, Method, Topology, cube_ok, effective_element_size

# FMM interaction-list sizes
P2P_NEIGHBORS = 27          # near-field boxes including the box itself
HALO_NEIGHBORS = 26         # b_P2P: neighbor boxes and messages per level
M2L_INTERACTIONS = 189      # b_M2L = 6^3 - 3^3
M2L_OPERATORS = 316         # distinct translation operators, 7^3 - 3^3
GLOBAL_M2L_BOXES = 26 * 8
P2P_VALUES_PER_POINT = 4    # three coordinates plus one value
STENCIL_POINTS = 7
MG_NEIGHBORS = 6


@dataclass(frozen=True)
class LevelCost:
    phase: str
    level: int
    msgs: float
    net_bytes: float
    t_net: float


@dataclass(frozen=True)
class CostBreakdown:
    method: str
    phase: str
    n_flop: float
    n_mem_bytes: float
    msgs: float
    net_bytes: float
    t_comp: float
    t_mem: float
    t_net: float
    pcie_bytes: float = 0.0
    t_pcie: float = 0.0
    per_level: tuple = field(default_factory=tuple)

    @property
    def ai(self):
        if self.n_flop == 0:
            return 0.0
        if self.n_mem_bytes == 0:
            return math.inf
        return self.n_flop / self.n_mem_bytes


def _level(phase, level, msgs, net_bytes, m):
    return LevelCost(phase, level, msgs, net_bytes, msgs * m.alpha + net_bytes * m.beta_link)


def _breakdown(m, method, phase, n_flop, n_mem_bytes, msgs, net_bytes,
               per_level=(), pcie_bytes=0.0):
    if per_level:
        msgs = sum(lv.msgs for lv in per_level)
        net_bytes = sum(lv.net_bytes for lv in per_level)
        t_net = sum(lv.t_net for lv in per_level)
    else:
        t_net = msgs * m.alpha + net_bytes * m.beta_link
    return CostBreakdown(
        method=method,
        phase=phase,
        n_flop=n_flop,
        n_mem_bytes=n_mem_bytes,
        msgs=msgs,
        net_bytes=net_bytes,
        t_comp=n_flop * m.t_c,
        t_mem=n_mem_bytes * m.beta_mem,
        t_net=t_net,
        pcie_bytes=pcie_bytes,
        t_pcie=pcie_bytes * m.beta_pcie,
        per_level=tuple(per_level),
    )


def combine(parts, phase="total"):
    """Sum several breakdowns of the same method into one."""
    parts = list(parts)
    return CostBreakdown(
        method=parts[0].method,
        phase=phase,
        n_flop=sum(p.n_flop for p in parts),
        n_mem_bytes=sum(p.n_mem_bytes for p in parts),
        msgs=sum(p.msgs for p in parts),
        net_bytes=sum(p.net_bytes for p in parts),
        t_comp=sum(p.t_comp for p in parts),
        t_mem=sum(p.t_mem for p in parts),
        t_net=sum(p.t_net for p in parts),
        pcie_bytes=sum(p.pcie_bytes for p in parts),
        t_pcie=sum(p.t_pcie for p in parts),
        per_level=tuple(lv for p in parts for lv in p.per_level),
    )


# ---------------------------------------------------------------------------
# helpers


def p2p_halo_boxes(i):
    """Boxes in a one-box-wide shell around a (2^i)^3 block."""
    return (2 ** i + 2) ** 3 - 8 ** i


def m2l_halo_boxes(i):
    """Boxes in a two-box-wide shell around a (2^i)^3 block."""
    return (2 ** i + 4) ** 3 - 8 ** i


def octree_depth(count):
    """Depth of the full octree closest to holding ``count`` leaves."""
    if count < 1:
        raise InvalidTree(f"fewer than one leaf box per node ({count:g})")
    return max(0, round(math.log(count, 8)))


def ilog(x, base):
    """Largest i with base**i <= x (-1 when x < 1)."""
    i, power = -1, 1
    while power <= x * (1 + 1e-12):
        i += 1
        power *= base
    return i


def ceil_cbrt(x):
    """Smallest integer whose cube is at least ``x``."""
    c = max(0, round(x ** (1.0 / 3.0)) - 1)
    while c ** 3 < x * (1 - 1e-12):
        c += 1
    return c


def _per_node(m, c):
    return c.N / m.P


def pcie_cost(m, c):
    """Round-trip host/device transfer time of one node's data."""
    return pcie_bytes(m, c) * m.beta_pcie


def pcie_bytes(m, c):
    return 2.0 * _per_node(m, c) * effective_element_size(m, c)


def total_time(cb, overlap="sum"):
    overlap = str(getattr(overlap, "value", overlap)).lower()
    if overlap == "sum":
        return cb.t_comp + cb.t_mem + cb.t_net + cb.t_pcie
    if overlap == "max":
        return max(cb.t_comp, cb.t_mem) + cb.t_net + cb.t_pcie
    raise ModelError(f"unknown overlap mode {overlap!r}")


def execution_time(cb, overlap="sum"):
    """On-node time only: compute and memory, combined per ``overlap``."""
    overlap = str(getattr(overlap, "value", overlap)).lower()
    if overlap == "max":
        return max(cb.t_comp, cb.t_mem)
    return cb.t_comp + cb.t_mem


# ---------------------------------------------------------------------------
# FFT


def fft_cost(m, c):
    N, P = c.N, m.P
    if not cube_ok(N, P):
        raise NotACube(f"N={N:g} is not a perfect cube")
    if P > N ** (2.0 / 3.0) * (1 + 1e-12):
        raise InfeasibleDecomposition(f"P={P:g} exceeds N^(2/3)={N ** (2 / 3):g}")
    es = effective_element_size(m, c)
    log2_side = math.log2(N) / 3.0
    n_flop = 3 * 5 * N * log2_side / P
    z_elems = m.Z / es
    log_z_side = math.log(N) / 3.0 / math.log(z_elems)
    if c.fft_log_floor is not None:
        log_z_side = max(c.fft_log_floor, log_z_side)
    n_mem = es * 3 * N * log_z_side / P
    msgs = 2 * math.sqrt(P)
    if m.topology is Topology.TORUS3D:
        net = es * 2 * N / P ** (2.0 / 3.0)
    else:
        net = es * 2 * N / P
    return _breakdown(m, Method.FFT.value, "fft", n_flop, n_mem, msgs, net,
                      pcie_bytes=pcie_bytes(m, c))


# ---------------------------------------------------------------------------
# FMM


def expansion_complexity(expansion, k):
    """Operation count f(k) of one M2L translation for ``expansion``."""
    e = Expansion(expansion)
    lg = math.log2(k) if k > 1 else 0.0
    if e in (Expansion.CARTESIAN_TAYLOR, Expansion.CARTESIAN_CHEBYCHEV):
        return float(k) ** 6
    if e in (Expansion.SPHERICAL, Expansion.EQUIVALENT_CHARGES):
        return float(k) ** 4
    if e in (Expansion.SPHERICAL_ROTATION, Expansion.PLANEWAVE):
        return float(k) ** 3
    if e is Expansion.SPHERICAL_FFT:
        return float(k) ** 2 * lg ** 2
    return float(k) ** 3 * lg  # EQUIVALENT_CHARGES_FFT


def _expansion(c):
    if c.fmm_expansion is not None:
        return c.fmm_expansion
    if c.fmm_variant is FMMVariant.EXAFMM:
        return Expansion.CARTESIAN_TAYLOR
    return Expansion.EQUIVALENT_CHARGES_FFT


def coeff_bytes(m, c):
    """Bytes of one box's expansion coefficients sent over the network."""
    if c.fmm_coeff_bytes is not None:
        return float(c.fmm_coeff_bytes)
    es = effective_element_size(m, c)
    k = c.fmm_k
    e = _expansion(c)
    if e in (Expansion.CARTESIAN_TAYLOR, Expansion.CARTESIAN_CHEBYCHEV):
        return k * (k + 1) * (k + 2) / 6 * es
    if e in (Expansion.SPHERICAL, Expansion.SPHERICAL_ROTATION, Expansion.SPHERICAL_FFT):
        return k * k * es
    return float(k) ** 3 * es


def effective_cache_elements(m, c):
    """Fast memory left after caching every M2L operator, in elements."""
    es = effective_element_size(m, c)
    return m.Z / es - M2L_OPERATORS * expansion_complexity(_expansion(c), c.fmm_k)


def _check_fmm(m, c):
    if c.fmm_q is None or c.fmm_k is None or c.fmm_variant is None:
        raise ModelError("FMM needs fmm_q, fmm_k and fmm_variant")
    leaves = c.N / (c.fmm_q * m.P)
    return leaves, octree_depth(leaves)


def fmm_p2p_mem_terms(m, c):
    """(streaming, cache-capacity) byte terms of the P2P memory model."""
    es = effective_element_size(m, c)
    n = _per_node(m, c)
    l_elems, z_elems = m.L / es, m.Z / es
    stream = es * n
    capacity = es * n * l_elems / (z_elems ** (1 / 3) * c.fmm_q ** (2 / 3))
    return stream, capacity


def fmm_p2p_cost(m, c):
    leaves, _ = _check_fmm(m, c)
    es = effective_element_size(m, c)
    fpi = c.fmm_flops_per_interaction or 1.0
    n_flop = fpi * P2P_NEIGHBORS * c.fmm_q * c.N / m.P
    stream, capacity = fmm_p2p_mem_terms(m, c)
    side = ceil_cbrt(leaves)
    halo = (side + 2) ** 3 - leaves
    net = es * P2P_VALUES_PER_POINT * c.fmm_q * halo
    level = _level("p2p", 0, HALO_NEIGHBORS, net, m)
    return _breakdown(m, Method.FMM.value, "p2p", n_flop, stream + capacity,
                      HALO_NEIGHBORS, net, per_level=(level,))


def fmm_m2l_mem_terms(m, c):
    """(coefficient, cache-capacity) byte terms of the M2L memory model."""
    es = effective_element_size(m, c)
    zbar = effective_cache_elements(m, c)
    if zbar <= 0:
        raise CacheOverflow(
            f"{M2L_OPERATORS} cached M2L operators need more than Z={m.Z:g} bytes")
    f = expansion_complexity(_expansion(c), c.fmm_k)
    boxes = c.N / (c.fmm_q * m.P)
    coeff = es * boxes * f
    capacity = es * boxes * f ** (1 / 3) * (m.L / es) / zbar ** (1 / 3)
    return coeff, capacity


def fmm_m2l_cost(m, c):
    leaves, local_depth = _check_fmm(m, c)
    k = c.fmm_k
    boxes = c.N / (c.fmm_q * m.P)
    if c.fmm_variant is FMMVariant.EXAFMM:
        per_box = M2L_INTERACTIONS * float(k) ** 6
    else:
        per_box = float(k) ** 3 * math.log2(k) + M2L_INTERACTIONS * float(k) ** 3
    n_flop = per_box * boxes
    coeff, capacity = fmm_m2l_mem_terms(m, c)
    cb = coeff_bytes(m, c)
    levels = [_level("m2l_global", g, HALO_NEIGHBORS, GLOBAL_M2L_BOXES * cb, m)
              for g in range(1, octree_depth(m.P) + 1)]
    levels += [_level("m2l_local", i, HALO_NEIGHBORS, m2l_halo_boxes(i) * cb, m)
               for i in range(1, local_depth + 1)]
    return _breakdown(m, Method.FMM.value, "m2l", n_flop, coeff + capacity,
                      0, 0, per_level=levels)


def fmm_cost(m, c):
    """P2P plus M2L, with the node's PCIe round trip counted once."""
    total = combine([fmm_p2p_cost(m, c), fmm_m2l_cost(m, c)])
    pb = pcie_bytes(m, c)
    return replace(total, pcie_bytes=pb, t_pcie=pb * m.beta_pcie)


# ---------------------------------------------------------------------------
# multigrid


def mg_convergence_bound(kappa, mu):
    if not kappa > 1:
        raise InvalidKappa(f"condition number must exceed 1, got {kappa}")
    if mu < 1:
        raise ModelError(f"smoothing count must be >= 1, got {mu}")
    return ((kappa - 1) / kappa) ** mu


def mg_iterations(epsilon, rho):
    """V-cycles needed to reduce the error by ``epsilon`` at rate ``rho``."""
    if not 0 < rho < 1:
        raise InvalidRate(f"convergence rate must lie in (0, 1), got {rho}")
    if not 0 < epsilon < 1:
        raise InvalidRate(f"tolerance must lie in (0, 1), got {epsilon}")
    return max(1, math.ceil(math.log(epsilon) / math.log(rho) - 1e-9))


def mg_rate(c):
    if c.mg_rho is not None:
        return c.mg_rho
    if c.mg_kappa is not None and c.mg_mu is not None:
        return mg_convergence_bound(c.mg_kappa, c.mg_mu)
    return None


def mg_cycles(c):
    rho = mg_rate(c)
    if rho is not None and not 0 < rho < 1:
        raise InvalidRate(f"convergence rate must lie in (0, 1), got {rho}")
    if c.mg_epsilon is None or rho is None:
        return 1
    return mg_iterations(c.mg_epsilon, rho)


def mg_level_sum(N, P, gamma):
    """Points touched by one smoothing sweep over all levels on one node.

    Fine levels split the grid across nodes; once a level has fewer points
    than nodes each busy node holds a single point.
    """
    base = gamma ** 3
    fine = ilog(N / P, base)
    coarse = ilog(N, base)
    first = sum(N / (base ** i * P) for i in range(0, fine + 1))
    return first + max(0, coarse - fine)


def mg_cost(m, c):
    N, P = c.N, m.P
    if not cube_ok(N, P):
        raise NotACube(f"N={N:g} is not a perfect cube")
    if c.mg_gamma is None or c.mg_gamma < 2 or c.mg_eta is None:
        raise ModelError("MG needs mg_gamma >= 2 and mg_eta")
    cycles = mg_cycles(c)
    es = effective_element_size(m, c)
    gamma, eta = c.mg_gamma, c.mg_eta
    points = mg_level_sum(N, P, gamma)
    sweep = STENCIL_POINTS * eta
    n_flop = sweep * points * cycles
    n_mem = es * sweep * points * (m.L / es) / (m.Z / es) ** (1 / 3) * cycles
    face = (N / P) ** (2.0 / 3.0)
    levels = []
    for lv in range(0, ilog(N, gamma ** 3) + 1):
        elems = max(1.0, MG_NEIGHBORS * face / gamma ** (2 * lv))
        levels.append(_level("vcycle", lv, MG_NEIGHBORS * cycles, es * elems * cycles, m))
    return _breakdown(m, Method.MG.value, "smoother", n_flop, n_mem, 0, 0,
                      per_level=levels, pcie_bytes=pcie_bytes(m, c))


def method_cost(m, c):
    """Whole-method breakdown for any configured method."""
    if c.method is Method.FFT:
        return fft_cost(m, c)
    if c.method is Method.FMM:
        return fmm_cost(m, c)
    return mg_cost(m, c)


def kernel_costs(m, c):
    """Per-kernel breakdowns (one for FFT and MG, P2P and M2L for FMM)."""
    if c.method is Method.FMM:
        return [fmm_p2p_cost(m, c), fmm_m2l_cost(m, c)]
    return [method_cost(m, c)]
