"""Roofline, energy roofline, memory-aware roofline and technology scaling."""

from dataclasses import dataclass, replace

import numpy as np

from .errors import UnknownNode, ValidationError, ZeroTraffic
from .machine import EnergyParams


@dataclass(frozen=True)
class RooflinePoint:
    ai: float
    attainable: float


@dataclass(frozen=True)
class MemoryTier:
    name: str
    bandwidth: float
    capacity: float

    def __post_init__(self):
        if not (self.bandwidth > 0 and self.capacity > 0):
            raise ValidationError("bandwidth", "tier bandwidth and capacity must be positive")


@dataclass(frozen=True)
class TechNode:
    size_nm: float
    freq_ratio: float
    voltage_ratio: float
    capacitance_ratio: float
    power_ratio: float

    @property
    def cv2f(self):
        return self.capacitance_ratio * self.voltage_ratio ** 2 * self.freq_ratio


# Ratios relative to 45 nm.
TECH_NODES = {
    45: TechNode(45, 1.00, 1.00, 1.00, 1.00),
    32: TechNode(32, 1.10, 0.93, 0.75, 0.71),
    22: TechNode(22, 1.19, 0.88, 0.56, 0.52),
    16: TechNode(16, 1.25, 0.86, 0.42, 0.39),
    11: TechNode(11, 1.30, 0.84, 0.32, 0.29),
    8: TechNode(8, 1.34, 0.84, 0.24, 0.22),
}

GB = 1e9
# NVRAM capacity is quoted as 4-8x DRAM; the low end of one DIMM is used.
MEMORY_TIERS = (
    MemoryTier("HMC", 240 * GB, 16 * GB),
    MemoryTier("HBM", 200 * GB, 16 * GB),
    MemoryTier("DDR", 20 * GB, 64 * GB),
    MemoryTier("NVRAM", 10 * GB, 4 * 64 * GB),
)


def ridge_point(m, bandwidth_efficiency=1.0):
    """AI (FLOPs/byte) where the bandwidth line meets the processor peak."""
    return m.peak / (m.mem_bandwidth * bandwidth_efficiency)


def time_balance(m):
    """B_tau = beta_mem / t_c, the balance used by :func:`balance_time`."""
    return m.beta_mem / m.t_c


def _attainable(peak, bandwidth, ai):
    if ai >= peak / bandwidth:
        return peak
    return bandwidth * ai


def roofline(m, ai, bandwidth_efficiency=1.0):
    if ai < 0:
        raise ValueError("arithmetic intensity must be >= 0")
    bw = m.mem_bandwidth * bandwidth_efficiency
    return RooflinePoint(ai, _attainable(m.peak, bw, ai))


def ai_samples(lo=2.0 ** -4, hi=2.0 ** 10, points=64):
    if points == 1:
        return np.array([float(lo)])
    return np.geomspace(lo, hi, points)


def roofline_curve(m, lo=2.0 ** -4, hi=2.0 ** 10, points=64, bandwidth_efficiency=1.0):
    return [roofline(m, float(ai), bandwidth_efficiency) for ai in ai_samples(lo, hi, points)]


def balance_time(m, n_flop, ai):
    """Execution time n_flop * t_c * max(1, B_tau / ai)."""
    if ai <= 0:
        raise ValueError("arithmetic intensity must be > 0")
    return n_flop * m.t_c * max(1.0, time_balance(m) / ai)


def energy(e, n_flop, n_mem_bytes, t_exe):
    return n_flop * e.eps_flop + n_mem_bytes * e.eps_mem + e.pi0 * t_exe


def energy_roofline(e, m, ai):
    """Joules per FLOP at intensity ``ai``, leakage charged over the balance time."""
    if ai <= 0:
        raise ValueError("arithmetic intensity must be > 0")
    time_per_flop = m.t_c * max(1.0, time_balance(m) / ai)
    return e.eps_flop + e.eps_mem / ai + e.pi0 * time_per_flop


def energy_curve(e, m, lo=2.0 ** -4, hi=2.0 ** 10, points=64):
    return [(float(ai), energy_roofline(e, m, float(ai))) for ai in ai_samples(lo, hi, points)]


def memory_aware_roofline(tiers, peak, ai):
    tiers = list(tiers)
    if not tiers:
        raise ValueError("need at least one memory tier")
    return [(t, _attainable(peak, t.bandwidth, ai)) for t in tiers]


def tech_node(size_nm):
    try:
        return TECH_NODES[int(size_nm)]
    except (KeyError, ValueError):
        raise UnknownNode(f"no scaling data for {size_nm} nm") from None


def scale_energy_params(e, m, from_nm, to_nm):
    """Move energy and timing parameters between technology nodes.

    Dynamic power follows the node's power ratio and cycle times follow
    the inverse frequency ratio; energies are time x power so they pick up
    both.  Leakage ``pi0`` is left unchanged.
    """
    src, dst = tech_node(from_nm), tech_node(to_nm)
    if src is dst:
        return e, m
    time_scale = src.freq_ratio / dst.freq_ratio
    power_scale = dst.power_ratio / src.power_ratio
    scaled_e = EnergyParams(
        eps_flop=e.eps_flop * power_scale * time_scale,
        eps_mem=e.eps_mem * power_scale * time_scale,
        pi0=e.pi0,
    )
    scaled_m = replace(m, t_c=m.t_c * time_scale, beta_mem=m.beta_mem * time_scale)
    return scaled_e, scaled_m


def kernel_ai(cb):
    if cb.n_flop == 0:
        return 0.0
    if cb.n_mem_bytes <= 0:
        raise ZeroTraffic(f"{cb.method}/{cb.phase} moves no memory traffic")
    return cb.n_flop / cb.n_mem_bytes
