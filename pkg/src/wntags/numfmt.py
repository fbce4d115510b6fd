"""Decimal formatting used for persisted values and the JSON wire format."""

from __future__ import annotations

SIG_DIGITS = 12


def fmt12(x: float) -> str:
    """Render with 12 significant digits."""
    return format(x, ".12g")


def sig12(x: float) -> float:
    """Quantize to the nearest 12-significant-digit decimal.

    Idempotent: values that came out of fmt12 pass through unchanged, so
    text round-trips are exact.
    """
    return float(fmt12(x))


def round_floats(obj):
    """Recursively quantize every float in a JSON-ready structure."""
    if isinstance(obj, float):
        return sig12(obj)
    if isinstance(obj, dict):
        return {k: round_floats(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [round_floats(v) for v in obj]
    return obj
