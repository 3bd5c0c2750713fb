"""Tolerance policy and small numeric helpers.

Every equality decision in the package goes through this module so that the
CLI can adjust the tolerance globally.  Comparisons are absolute, scaled by
``max(1, |a|, |b|)``.  Quantities that must be integers are snapped when
within ``INT_TOL`` of one and rejected otherwise.  Membership tests carry a
guard band: a value within ``MARGINAL_FACTOR * EPS`` of the boundary but not
within ``EPS`` raises instead of silently classifying.
"""

from __future__ import annotations

import numpy as np

from .errors import ConsistencyError, MarginalClassificationError

EPS = 1e-8
INT_TOL = 1e-6
NULL_TOL = 1e-6
MARGINAL_FACTOR = 10.0
DEFAULT_SEED = 12345


def scale_of(*values) -> float:
    return max(1.0, *(abs(v) for v in values))


def close(a, b) -> bool:
    return abs(a - b) <= EPS * scale_of(a, b)


def decide_equal(value, target, what="membership test") -> bool:
    """Equality with a guard band; near misses raise rather than exclude."""
    gap = abs(value - target)
    s = scale_of(value, target)
    if gap <= EPS * s:
        return True
    if gap <= MARGINAL_FACTOR * EPS * s:
        raise MarginalClassificationError(
            f"{what}: value {value!r} lies within {MARGINAL_FACTOR:g}*EPS of target "
            f"{target!r} (gap {gap:.3e}) without reaching it; refusing to classify"
        )
    return False


def near_int(value):
    """Nearest integer if within INT_TOL (imaginary part included), else None."""
    v = complex(value)
    if abs(v.imag) > INT_TOL:
        return None
    nearest = int(round(v.real))
    if abs(v.real - nearest) > INT_TOL:
        return None
    return nearest


def snap_int(value, what="value") -> int:
    n = near_int(value)
    if n is None:
        raise ConsistencyError(f"{what} is not integral: {value!r}")
    return n


def snap_int_array(values, what="values", nonnegative=False) -> np.ndarray:
    out = np.empty(len(values), dtype=np.int64)
    for i, v in enumerate(np.asarray(values).ravel()):
        out[i] = snap_int(v, what=f"{what}[{i}]")
        if nonnegative and out[i] < 0:
            raise ConsistencyError(f"{what}[{i}] is negative: {out[i]}")
    return out
