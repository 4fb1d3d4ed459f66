"""Outward rounding and small numeric helpers shared across modules."""

import math
from typing import Callable, Tuple

import numpy as np

from .exceptions import InternalError


# Absolute band around 1.0 inside which window sums are treated as >= 1.
GUARD_BAND = 1e-12

# Relative slack applied to logarithms of long floating-point sums/products.
LOG_SLACK = 64 * np.finfo(float).eps


def round_down(value: float) -> float:
    """Return the next float toward -inf."""
    return math.nextafter(value, -math.inf)


def round_up(value: float) -> float:
    """Return the next float toward +inf."""
    return math.nextafter(value, math.inf)


def outward(lo: float, hi: float) -> Tuple[float, float]:
    """Widen [lo, hi] by one ulp on each side."""
    return round_down(lo), round_up(hi)


def pad_up(value: float, terms: int = 1) -> float:
    """Raise an already computed logarithm by the rounding allowance."""
    if not math.isfinite(value):
        return value
    return round_up(value + LOG_SLACK * max(terms, 1) * (1.0 + abs(value)))


def pad_down(value: float, terms: int = 1) -> float:
    """Lower counterpart of :func:`pad_up`."""
    if not math.isfinite(value):
        return value
    return round_down(value - LOG_SLACK * max(terms, 1) * (1.0 + abs(value)))


def log_sum_exp(values: np.ndarray) -> float:
    """
    Stable log(sum(exp(values))).

    numpy's pairwise summation fixes the reduction tree for a given array
    length, so equal inputs give bit-identical results.
    """
    values = np.asarray(values, dtype=float)
    if values.size == 0:
        return -math.inf
    peak = float(np.max(values))
    if peak == -math.inf:
        return -math.inf
    return peak + math.log(float(np.sum(np.exp(values - peak))))


def bisect_decreasing(
    func: Callable[[float], float],
    lo: float,
    hi: float,
    tol: float,
    max_iter: int = 200
) -> Tuple[float, float]:
    """
    Bracket the root of a nonincreasing function.

    Args:
        func: Function with func(lo) >= 0 > func(hi)
        lo: Left end of the search interval
        hi: Right end of the search interval
        tol: Target bracket width
        max_iter: Iteration cap

    Returns:
        (a, b) with func(a) >= 0, func(b) < 0 and b - a <= tol

    Raises:
        InternalError: If the bracket does not shrink to tol
    """
    a, b = lo, hi
    for _ in range(max_iter):
        if b - a <= tol:
            return a, b
        mid = 0.5 * (a + b)
        if func(mid) >= 0.0:
            a = mid
        else:
            b = mid
    if b - a <= tol:
        return a, b
    raise InternalError(
        f"bisection did not reach width {tol} within {max_iter} steps"
    )
