"""Parsing of quantities such as ``"68 GB/s"`` or ``"212 pJ"`` into SI base units.

Conversion goes through :mod:`decimal` so power-of-ten prefixes never add
rounding beyond the final conversion to binary float.
"""

from decimal import Decimal, InvalidOperation
import re

from .errors import UnitError

PREFIXES = {
    "": 0,
    "k": 3, "M": 6, "G": 9, "T": 12, "P": 15, "E": 18,
    "m": -3, "u": -6, "µ": -6, "n": -9, "p": -12, "f": -15,
}

# base unit -> dimension tag
BASE_UNITS = {
    "FLOP/s": "flop_rate",
    "F/s": "flop_rate",
    "B/s": "byte_rate",
    "B": "bytes",
    "s": "seconds",
    "W": "watts",
    "J": "joules",
}

_NUMBER = re.compile(r"^\s*([-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?)\s*(.*?)\s*$")


def parse_quantity(text):
    """Return ``(value_in_SI, dimension)``; dimension is None for a bare number."""
    if isinstance(text, bool):
        raise UnitError(f"not a quantity: {text!r}")
    if isinstance(text, (int, float)):
        return float(text), None
    m = _NUMBER.match(str(text))
    if not m:
        raise UnitError(f"cannot parse quantity {text!r}")
    number, unit = m.groups()
    try:
        value = Decimal(number)
    except InvalidOperation as exc:  # pragma: no cover - regex guards this
        raise UnitError(f"bad number in {text!r}") from exc
    if not unit:
        return float(value), None
    for base in sorted(BASE_UNITS, key=len, reverse=True):
        if unit.endswith(base):
            prefix = unit[: -len(base)]
            if prefix in PREFIXES:
                scaled = value.scaleb(PREFIXES[prefix])
                return float(scaled), BASE_UNITS[base]
    raise UnitError(f"unrecognized unit {unit!r} in {text!r}")


def format_si(value, unit, digits=3):
    """Render ``value`` with an SI prefix and ``digits`` significant figures."""
    if value == 0:
        return f"0 {unit}"
    exp = 0
    mag = abs(value)
    for e in (18, 15, 12, 9, 6, 3):
        if mag >= 10 ** e:
            exp = e
            break
    prefix = {18: "E", 15: "P", 12: "T", 9: "G", 6: "M", 3: "k", 0: ""}[exp]
    return f"{value / 10 ** exp:.{digits}g} {prefix}{unit}"
