"""Input validation helpers shared by the estimators and generators."""

from __future__ import annotations

import math
from numbers import Integral, Real

import numpy as np

PROB_TOL = 1e-12


def check_positive_int(value, name: str) -> int:
    if isinstance(value, bool) or not isinstance(value, Integral):
        raise TypeError(f"{name} must be an integer, got {type(value).__name__}")
    if value < 1:
        raise ValueError(f"{name} must be >= 1, got {value}")
    return int(value)


def check_unit_interval(value, name: str, *, open_left=False, open_right=False) -> float:
    if isinstance(value, bool) or not isinstance(value, Real):
        raise TypeError(f"{name} must be a real number, got {type(value).__name__}")
    value = float(value)
    if not math.isfinite(value):
        raise ValueError(f"{name} must be finite, got {value}")
    lo_ok = value > 0.0 if open_left else value >= 0.0
    hi_ok = value < 1.0 if open_right else value <= 1.0
    if not (lo_ok and hi_ok):
        lb = "(" if open_left else "["
        rb = ")" if open_right else "]"
        raise ValueError(f"{name} must lie in {lb}0, 1{rb}, got {value}")
    return value


def check_eta(eta) -> float:
    """Confidence parameter of a pessimistic buyer, in (0, 1]."""
    return check_unit_interval(eta, "eta", open_left=True)


def check_probability_vector(q, d: int | None = None) -> np.ndarray:
    q = np.asarray(q, dtype=float)
    if q.ndim != 1 or q.size == 0:
        raise ValueError("q must be a non-empty 1-d vector")
    if d is not None and q.size != d:
        raise ValueError(f"q has {q.size} entries, expected {d}")
    if not np.all(np.isfinite(q)) or np.any(q <= 0.0) or np.any(q > 1.0):
        raise ValueError(f"every type probability must lie in (0, 1], got {q.tolist()}")
    if abs(math.fsum(q.tolist()) - 1.0) > PROB_TOL:
        raise ValueError(f"type probabilities must sum to 1, got {math.fsum(q.tolist())!r}")
    return q


def check_theta(theta, d: int | None = None) -> np.ndarray:
    theta = np.asarray(theta, dtype=float)
    if theta.ndim != 1 or theta.size == 0:
        raise ValueError("theta must be a non-empty 1-d vector")
    if d is not None and theta.size != d:
        raise ValueError(f"theta has {theta.size} entries, expected {d}")
    if not np.all(np.isfinite(theta)) or np.any(theta < 0.0) or np.any(theta > 1.0):
        raise ValueError("ex-ante values must lie in [0, 1]")
    if np.any(np.diff(theta) < 0.0):
        raise ValueError("theta must be sorted non-decreasing")
    return theta


def check_type_index(i, d: int) -> int:
    if isinstance(i, bool) or not isinstance(i, Integral):
        raise TypeError(f"type index must be an integer, got {type(i).__name__}")
    if not 0 <= i < d:
        raise IndexError(f"type index {i} out of range for d={d}")
    return int(i)


def check_type_subset(Q, d: int) -> tuple[int, ...]:
    """Normalise a collection of type indices into a sorted tuple."""
    if Q is None:
        return tuple(range(d))
    out = sorted({check_type_index(i, d) for i in Q})
    return tuple(out)
