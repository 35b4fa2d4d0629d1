"""Serialization primitives: exact rationals, elements, canonical JSON.

Rationals travel as "num/den" strings (always with the denominator, so the
byte form is unique). Elements travel as sorted [index, coefficient] pairs.
Canonical JSON is sorted-key, two-space-indented, newline-terminated; reports
rendered through here are byte-stable for a fixed input.
"""

from __future__ import annotations

import json
from fractions import Fraction

from .errors import InputError


def frac_to_str(value: Fraction) -> str:
    value = Fraction(value)
    return f"{value.numerator}/{value.denominator}"


def frac_from_str(text) -> Fraction:
    if isinstance(text, int) and not isinstance(text, bool):
        return Fraction(text)
    if not isinstance(text, str):
        raise InputError(f"expected a rational as 'num/den' string, got {text!r}")
    try:
        if "/" in text:
            num, den = text.split("/", 1)
            return Fraction(int(num), int(den))
        return Fraction(int(text))
    except (ValueError, ZeroDivisionError) as exc:
        raise InputError(f"bad rational literal {text!r}: {exc}") from None


def element_to_pairs(g) -> list:
    """Serialize an element as a sorted list of [index, coefficient] pairs."""
    return [[i, c] for i, c in g.items]


def element_from_pairs(p, pairs):
    from .fpcore import GroupElement

    if not isinstance(pairs, (list, tuple)):
        raise InputError(f"expected a list of [index, coefficient] pairs, got {pairs!r}")
    out = []
    for entry in pairs:
        if not isinstance(entry, (list, tuple)) or len(entry) != 2:
            raise InputError(f"bad coefficient pair {entry!r}")
        out.append((entry[0], entry[1]))
    return GroupElement.make(p, out)


def canonical_dumps(obj) -> str:
    """Deterministic JSON text for report documents."""
    return json.dumps(obj, sort_keys=True, indent=2, ensure_ascii=True) + "\n"


def require_list(value, *, what="array"):
    """Reject config fields that should be JSON arrays but are not."""
    if not isinstance(value, list):
        raise InputError(f"{what} must be a JSON array, got {type(value).__name__}")
    return value


def require_keys(mapping, required, optional=(), *, what="object"):
    """Strict key check for config documents: fail fast on unknown keys."""
    if not isinstance(mapping, dict):
        raise InputError(f"{what} must be a JSON object, got {type(mapping).__name__}")
    missing = [k for k in required if k not in mapping]
    if missing:
        raise InputError(f"{what} is missing required key(s): {', '.join(missing)}")
    allowed = set(required) | set(optional)
    unknown = [k for k in mapping if k not in allowed]
    if unknown:
        raise InputError(f"{what} has unknown key(s): {', '.join(sorted(unknown))}")
    return mapping
