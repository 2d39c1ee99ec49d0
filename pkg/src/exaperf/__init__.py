"""Analytical performance, energy and resilience models for FFT, FMM and multigrid."""

from .analysis import (
    MEMORY_TIERS,
    TECH_NODES,
    balance_time,
    energy,
    energy_roofline,
    kernel_ai,
    memory_aware_roofline,
    ridge_point,
    roofline,
    scale_energy_params,
    tech_node,
)
from .errors import ModelError, ValidationError
from .kernels import CostBreakdown, fft_cost, fmm_cost, kernel_costs, method_cost, mg_cost
from .machine import (
    EnergyParams,
    MachineSpec,
    Method,
    MethodConfig,
    ResilienceParams,
    Topology,
    load_machine_spec,
    validate_scenario,
)
from .report import Scenario, compare, load_scenario
from .resilience import vulnerability_report
from .trends import TrendSeries, fit_doubling_time, project, project_machine

__version__ = "0.1.0"
