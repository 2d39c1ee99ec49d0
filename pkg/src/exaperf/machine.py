"""Machine, method, energy and resilience parameter types and their loaders.

Configuration files are JSON with top-level objects ``machine``, ``method``,
``energy`` and ``resilience``.  Scalars are either plain numbers in SI base
units or strings carrying a unit suffix (``"68 GB/s"``, ``"40 MB"``,
``"212 pJ"``).  Bandwidth strings given for an inverse-bandwidth field are
inverted on load, and a ``peak`` rate is turned into the per-core FLOP time
``t_c = cores / peak``.
"""

from dataclasses import asdict, dataclass, fields, replace
from enum import Enum
import json
import math
from pathlib import Path
from typing import Optional

from .errors import ParseError, UnitError, ValidationError
from .units import parse_quantity

DEFAULT_ALPHA = 1e-6
DEFAULT_ELEMENT_SIZE = 8
ELEMENT_SIZES = (1, 2, 4, 8, 16)


class Topology(str, Enum):
    FULLY_CONNECTED = "FullyConnected"
    TORUS3D = "Torus3D"

    @classmethod
    def parse(cls, text):
        key = str(text).replace("_", "").replace("-", "").lower()
        aliases = {
            "fullyconnected": cls.FULLY_CONNECTED,
            "full": cls.FULLY_CONNECTED,
            "torus3d": cls.TORUS3D,
            "torus": cls.TORUS3D,
        }
        try:
            return aliases[key]
        except KeyError:
            raise ValidationError("topology", f"unknown topology {text!r}") from None


class Method(str, Enum):
    FFT = "FFT"
    FMM = "FMM"
    MG = "MG"


class Expansion(str, Enum):
    CARTESIAN_TAYLOR = "cartesian_taylor"
    CARTESIAN_CHEBYCHEV = "cartesian_chebychev"
    SPHERICAL = "spherical_harmonics"
    SPHERICAL_ROTATION = "spherical_harmonics_rotation"
    SPHERICAL_FFT = "spherical_harmonics_fft"
    PLANEWAVE = "planewave"
    EQUIVALENT_CHARGES = "equivalent_charges"
    EQUIVALENT_CHARGES_FFT = "equivalent_charges_fft"


class FMMVariant(str, Enum):
    KIFMM = "KIFMM"
    EXAFMM = "ExaFMM"


@dataclass(frozen=True)
class MachineSpec:
    """One processor/node/network parameterization, all in SI base units.

    ``t_c`` is seconds per FLOP per core, so the processor peak is
    ``cores / t_c``.  The ``beta_*`` fields are inverse bandwidths in
    seconds per byte.  ``beta_pcie == 0`` means the processor has no
    host-device bus to cross (a plain CPU node or an on-package part).
    """

    name: str
    t_c: float
    beta_mem: float
    beta_link: float
    Z: float
    L: float
    cores: float
    P: float
    alpha: float = DEFAULT_ALPHA
    beta_pcie: float = 0.0
    element_size: int = DEFAULT_ELEMENT_SIZE
    topology: Topology = Topology.FULLY_CONNECTED

    def __post_init__(self):
        for name in ("t_c", "beta_mem", "beta_link", "alpha", "Z", "L", "cores"):
            value = getattr(self, name)
            if not (isinstance(value, (int, float)) and math.isfinite(value) and value > 0):
                raise ValidationError(name, f"must be a finite positive number, got {value!r}")
        if not (math.isfinite(self.beta_pcie) and self.beta_pcie >= 0):
            raise ValidationError("beta_pcie", "must be finite and nonnegative")
        if not self.P >= 1:
            raise ValidationError("P", f"must be >= 1, got {self.P!r}")
        if self.L > self.Z:
            raise ValidationError("L", "cache line larger than fast memory")
        if self.element_size not in ELEMENT_SIZES:
            raise ValidationError("element_size", f"must be one of {ELEMENT_SIZES}")
        if self.Z <= self.element_size:
            raise ValidationError("Z", "fast memory must hold more than one element")
        if not isinstance(self.topology, Topology):
            object.__setattr__(self, "topology", Topology.parse(self.topology))

    @property
    def peak(self):
        """Processor peak in FLOP/s."""
        return self.cores / self.t_c

    @property
    def mem_bandwidth(self):
        return 1.0 / self.beta_mem

    @property
    def link_bandwidth(self):
        return 1.0 / self.beta_link

    def to_dict(self):
        d = asdict(self)
        d["topology"] = self.topology.value
        return d


@dataclass(frozen=True)
class MethodConfig:
    """Method selection plus the knobs its cost model reads.

    Fields that belong to other methods stay ``None``.  Invariants are not
    enforced here; :func:`validate_scenario` reports them and the cost
    models raise on the ones they depend on.
    """

    method: Method
    N: float
    element_size: Optional[int] = None
    fft_log_floor: Optional[float] = None
    fmm_q: Optional[int] = None
    fmm_k: Optional[int] = None
    fmm_expansion: Optional[Expansion] = None
    fmm_variant: Optional[FMMVariant] = None
    fmm_flops_per_interaction: Optional[float] = None
    fmm_coeff_bytes: Optional[float] = None
    mg_gamma: Optional[int] = None
    mg_eta: Optional[int] = None
    mg_rho: Optional[float] = None
    mg_epsilon: Optional[float] = None
    mg_kappa: Optional[float] = None
    mg_mu: Optional[int] = None

    def __post_init__(self):
        if not isinstance(self.method, Method):
            object.__setattr__(self, "method", Method(self.method))
        if self.fmm_variant is not None and not isinstance(self.fmm_variant, FMMVariant):
            object.__setattr__(self, "fmm_variant", FMMVariant(self.fmm_variant))
        if self.fmm_expansion is not None and not isinstance(self.fmm_expansion, Expansion):
            object.__setattr__(self, "fmm_expansion", Expansion(self.fmm_expansion))

    def to_dict(self):
        out = {}
        for f in fields(self):
            value = getattr(self, f.name)
            if value is None:
                continue
            out[f.name] = value.value if isinstance(value, Enum) else value
        return out


@dataclass(frozen=True)
class EnergyParams:
    eps_flop: float
    eps_mem: float
    pi0: float

    def __post_init__(self):
        for f in fields(self):
            value = getattr(self, f.name)
            if not (math.isfinite(value) and value >= 0):
                raise ValidationError(f.name, "must be finite and nonnegative")

    @property
    def energy_balance(self):
        """B_eps = eps_mem / eps_flop (inf when FLOPs are free)."""
        if self.eps_flop == 0:
            return math.inf
        return self.eps_mem / self.eps_flop

    def to_dict(self):
        return asdict(self)


@dataclass(frozen=True)
class ResilienceParams:
    fit: float = 10.0
    a: float = 0.0
    b: float = 0.0
    p_a: float = 0.0
    p_b: float = 0.0
    h_bar_override: Optional[float] = None

    def __post_init__(self):
        if not (math.isfinite(self.fit) and self.fit >= 0):
            raise ValidationError("fit", "must be finite and nonnegative")
        for name in ("a", "b", "p_a", "p_b"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise ValidationError(name, f"probability must lie in [0, 1], got {value!r}")
        if self.h_bar_override is not None and self.h_bar_override < 0:
            raise ValidationError("h_bar_override", "must be nonnegative")

    def to_dict(self):
        return {k: v for k, v in asdict(self).items() if v is not None}


# ---------------------------------------------------------------------------
# field coercion

_INVERSE_FIELDS = {"beta_mem": "byte_rate", "beta_link": "byte_rate", "beta_pcie": "byte_rate"}


def _quantity(section, key, value, allowed):
    try:
        number, dim = parse_quantity(value)
    except UnitError as exc:
        raise UnitError(f"{section}.{key}: {exc}") from None
    if dim is not None and dim not in allowed:
        raise UnitError(f"{section}.{key}: unit of {value!r} is not one of {sorted(allowed)}")
    return number, dim


def machine_from_dict(data, name=None):
    """Build a :class:`MachineSpec` from a raw ``machine`` mapping."""
    if not isinstance(data, dict):
        raise ParseError("machine: expected an object")
    raw = dict(data)
    known = {f.name for f in fields(MachineSpec)} | {"peak"}
    unknown = sorted(set(raw) - known)
    if unknown:
        raise ParseError(f"machine: unknown key(s) {', '.join(unknown)}")

    out = {"name": str(raw.pop("name", name or "machine"))}
    for key in ("cores", "P", "element_size"):
        if key in raw:
            out[key] = _quantity("machine", key, raw.pop(key), set())[0]
    if "element_size" in out:
        if out["element_size"] != int(out["element_size"]):
            raise ValidationError("element_size", "must be an integer")
        out["element_size"] = int(out["element_size"])

    peak = raw.pop("peak", None)
    if "t_c" in raw:
        out["t_c"] = _quantity("machine", "t_c", raw.pop("t_c"), {"seconds"})[0]
        if peak is not None:
            raise ParseError("machine: give either t_c or peak, not both")
    elif peak is not None:
        rate, _ = _quantity("machine", "peak", peak, {"flop_rate"})
        if "cores" not in out:
            raise ValidationError("cores", "required to derive t_c from peak")
        if rate <= 0:
            raise ValidationError("peak", "must be positive")
        out["t_c"] = out["cores"] / rate

    for key, rate_dim in _INVERSE_FIELDS.items():
        if key in raw:
            number, dim = _quantity("machine", key, raw.pop(key), {"seconds", rate_dim})
            if dim == rate_dim:
                if number <= 0:
                    raise ValidationError(key, "bandwidth must be positive")
                number = 1.0 / number
            out[key] = number
    if "alpha" in raw:
        out["alpha"] = _quantity("machine", "alpha", raw.pop("alpha"), {"seconds"})[0]
    for key in ("Z", "L"):
        if key in raw:
            out[key] = _quantity("machine", key, raw.pop(key), {"bytes"})[0]
    if "topology" in raw:
        out["topology"] = Topology.parse(raw.pop("topology"))

    for required in ("t_c", "beta_mem", "beta_link", "Z", "L", "cores", "P"):
        if required not in out:
            raise ValidationError(required, "required field is missing")
    return MachineSpec(**out)


def method_from_dict(data):
    if not isinstance(data, dict):
        raise ParseError("method: expected an object")
    raw = dict(data)
    known = {f.name for f in fields(MethodConfig)} | {"n_per_node"}
    unknown = sorted(set(raw) - known)
    if unknown:
        raise ParseError(f"method: unknown key(s) {', '.join(unknown)}")
    if "method" not in raw:
        raise ValidationError("method", "required field is missing")
    if "n_per_node" in raw:
        raise ParseError("method: n_per_node needs a machine; use load_scenario")
    if "N" not in raw:
        raise ValidationError("N", "required field is missing")
    try:
        return MethodConfig(**raw)
    except ValueError as exc:
        raise ValidationError("method", str(exc)) from None


def energy_from_dict(data):
    raw = dict(data)
    units = {"eps_flop": {"joules"}, "eps_mem": {"joules"}, "pi0": {"watts"}}
    unknown = sorted(set(raw) - set(units))
    if unknown:
        raise ParseError(f"energy: unknown key(s) {', '.join(unknown)}")
    out = {}
    for key, allowed in units.items():
        if key not in raw:
            raise ValidationError(key, "required field is missing")
        out[key] = _quantity("energy", key, raw[key], allowed)[0]
    return EnergyParams(**out)


def resilience_from_dict(data):
    raw = dict(data)
    known = {f.name for f in fields(ResilienceParams)}
    unknown = sorted(set(raw) - known)
    if unknown:
        raise ParseError(f"resilience: unknown key(s) {', '.join(unknown)}")
    return ResilienceParams(**{k: float(v) for k, v in raw.items() if v is not None})


def read_config(path):
    """Read a JSON config file, mapping decode failures to :class:`ParseError`."""
    path = Path(path)
    text = path.read_text()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from None
    if not isinstance(data, dict):
        raise ParseError(f"{path}: top level must be an object")
    return data


def load_machine_spec(path):
    path = Path(path)
    data = read_config(path)
    if "machine" not in data:
        raise ParseError(f"{path}: no 'machine' object")
    return machine_from_dict(data["machine"], name=path.stem)


def dump_machine_spec(machine, path):
    Path(path).write_text(json.dumps({"machine": machine.to_dict()}, indent=2) + "\n")


# ---------------------------------------------------------------------------
# scenario validation


def _is_power_of(x, base):
    if x < 1 or x != int(x):
        return False
    x = int(x)
    while x % base == 0:
        x //= base
    return x == 1


def icbrt(n):
    """Integer cube root of an integral value, or None if ``n`` is not a cube."""
    if n < 1 or n != int(n):
        return None
    n = int(n)
    r = round(n ** (1.0 / 3.0))
    for c in (r - 1, r, r + 1):
        if c >= 0 and c * c * c == n:
            return c
    return None


def cube_ok(N, P):
    """True when the global grid or each node's block is a perfect cube."""
    return icbrt(N) is not None or icbrt(N / P) is not None


def effective_element_size(m, c):
    return c.element_size if c.element_size is not None else m.element_size


def validate_scenario(m, c):
    """Return every violated invariant as a message, in a fixed order."""
    errors = []
    if not c.N >= 1:
        errors.append("N: must be >= 1")
    if c.element_size is not None and c.element_size not in ELEMENT_SIZES:
        errors.append(f"element_size: must be one of {ELEMENT_SIZES}")

    if c.method is Method.FFT:
        if c.N >= 1 and not cube_ok(c.N, m.P):
            errors.append("N: FFT problem size is not a perfect cube")
        if c.N >= 1 and m.P > c.N ** (2.0 / 3.0) * (1 + 1e-12):
            errors.append("P: exceeds N^(2/3), pencil decomposition infeasible")
        if c.fft_log_floor is not None and c.fft_log_floor < 0:
            errors.append("fft_log_floor: must be >= 0")
    elif c.method is Method.FMM:
        if c.fmm_q is None or c.fmm_q < 1:
            errors.append("fmm_q: must be >= 1")
        elif c.N % c.fmm_q:
            errors.append("N: not divisible by fmm_q")
        else:
            leaves = c.N // c.fmm_q
            per_node = c.N / (c.fmm_q * m.P)
            if not (_is_power_of(leaves, 8) or _is_power_of(per_node, 8)):
                errors.append("N: leaf count N/q (global or per node) is not a power of 8")
        if c.fmm_k is None or c.fmm_k < 1:
            errors.append("fmm_k: must be >= 1")
        if c.fmm_variant is None:
            errors.append("fmm_variant: required for FMM")
        if c.fmm_flops_per_interaction is not None and c.fmm_flops_per_interaction <= 0:
            errors.append("fmm_flops_per_interaction: must be > 0")
        if c.fmm_k is not None and c.fmm_k >= 1 and c.fmm_variant is not None:
            from .kernels import effective_cache_elements

            if effective_cache_elements(m, c) <= 0:
                errors.append("fmm_k: cached M2L operators overflow fast memory")
    elif c.method is Method.MG:
        if c.N >= 1 and not cube_ok(c.N, m.P):
            errors.append("N: MG problem size is not a perfect cube")
        if c.mg_gamma is None or c.mg_gamma < 2:
            errors.append("mg_gamma: must be >= 2")
        if c.mg_eta is None or c.mg_eta < 1:
            errors.append("mg_eta: must be >= 1")
        if c.mg_rho is not None and not 0 < c.mg_rho < 1:
            errors.append("mg_rho: must lie in (0, 1)")
        if c.mg_epsilon is not None and not 0 < c.mg_epsilon < 1:
            errors.append("mg_epsilon: must lie in (0, 1)")
        if c.mg_kappa is not None and not c.mg_kappa > 1:
            errors.append("mg_kappa: must be > 1")
        if c.mg_mu is not None and c.mg_mu < 1:
            errors.append("mg_mu: must be >= 1")
    return errors


def with_topology(m, topology):
    return replace(m, topology=Topology.parse(topology))
