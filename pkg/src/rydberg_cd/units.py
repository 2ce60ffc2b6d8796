"""Unit handling for configuration values.

Internally every frequency is angular (rad/us) and every time is in us.
Configuration files carry explicit unit tags, e.g. ``"20 MHz_over_2pi"``
means a frequency whose value divided by 2*pi is 20 MHz.
"""

from __future__ import annotations

import math
from fractions import Fraction

TWO_PI = 2.0 * math.pi

# factor taking a tagged value to internal units
_FREQUENCY = {
    "rad_per_us": 1.0,
    "MHz_over_2pi": TWO_PI,
    "GHz_over_2pi": TWO_PI * 1e3,
    "kHz_over_2pi": TWO_PI * 1e-3,
}
_TIME = {"us": 1.0, "ns": 1e-3, "ms": 1e3}
_RATE = {"per_us": 1.0, "per_ns": 1e3, "per_ms": 1e-3}
_ANGLE = {"rad": 1.0, "deg": math.pi / 180.0}

UNIT_KINDS = {
    "frequency": _FREQUENCY,
    "time": _TIME,
    "rate": _RATE,
    "angle": _ANGLE,
}


class UnitError(ValueError):
    """Raised for a missing, unknown or mismatched unit tag."""


def mhz(f_over_2pi: float) -> float:
    """Angular frequency (rad/us) for a value quoted as f/(2*pi) in MHz."""
    return TWO_PI * f_over_2pi


def ghz(f_over_2pi: float) -> float:
    """Angular frequency (rad/us) for a value quoted as f/(2*pi) in GHz."""
    return TWO_PI * 1e3 * f_over_2pi


def to_mhz(omega: float) -> float:
    return omega / TWO_PI


def unit_factor(unit: str, kind: str | None = None) -> float:
    if kind is not None:
        table = UNIT_KINDS[kind]
        if unit not in table:
            raise UnitError(f"unit {unit!r} is not a {kind} unit (expected one of {sorted(table)})")
        return table[unit]
    for table in UNIT_KINDS.values():
        if unit in table:
            return table[unit]
    raise UnitError(f"unknown unit {unit!r}")


def parse_number(value) -> float:
    """Parse a bare number, allowing exact fractions such as ``"7/8"``."""
    if isinstance(value, bool):
        raise ValueError(f"expected a number, got {value!r}")
    if isinstance(value, (int, float)):
        return float(value)
    return float(Fraction(str(value).strip()))


def parse_quantity(value, kind: str) -> float:
    """Convert a tagged quantity to internal units.

    Accepts ``"20 MHz_over_2pi"``, ``{"value": 20, "unit": "MHz_over_2pi"}``
    or ``[20, "MHz_over_2pi"]``. Bare numbers are rejected for dimensional
    quantities.
    """
    if isinstance(value, dict):
        try:
            number, unit = value["value"], value["unit"]
        except KeyError as exc:
            raise UnitError(f"quantity mapping needs 'value' and 'unit': {value!r}") from exc
    elif isinstance(value, (list, tuple)) and len(value) == 2:
        number, unit = value
    elif isinstance(value, str):
        parts = value.split()
        if len(parts) != 2:
            raise UnitError(f"expected '<number> <unit>', got {value!r}")
        number, unit = parts
    else:
        raise UnitError(f"{kind} value {value!r} has no unit tag")
    return parse_number(number) * unit_factor(unit, kind)


def format_quantity(value: float, unit: str) -> str:
    """Inverse of :func:`parse_quantity` for a single unit."""
    return f"{value / unit_factor(unit):.17g} {unit}"
