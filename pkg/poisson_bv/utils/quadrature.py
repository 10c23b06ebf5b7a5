"""Quadrature rules: adaptive Gauss-Legendre on intervals and trapezoid sums on circles."""

import logging
from collections.abc import Callable
from functools import lru_cache

import numpy as np
from scipy.special import roots_legendre

from poisson_bv.utils.errors import QuadratureError

logger = logging.getLogger(__name__)


@lru_cache(maxsize=32)
def legendre_rule(order: int) -> tuple[np.ndarray, np.ndarray]:
    """Gauss-Legendre nodes and weights on [-1, 1]."""
    nodes, weights = roots_legendre(order)
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return nodes, weights


def gauss_legendre(f: Callable, a: float, b: float, order: int = 20) -> complex:
    """Fixed-order Gauss-Legendre on [a, b]; f must accept an array of nodes."""
    nodes, weights = legendre_rule(order)
    mid = 0.5 * (a + b)
    half = 0.5 * (b - a)
    values = np.asarray(f(mid + half * nodes), dtype=complex)
    return complex(half * np.sum(weights * values))


def adaptive_gauss_legendre(
    f: Callable,
    a: float,
    b: float,
    tol: float = 1e-13,
    order: int = 20,
    max_depth: int = 40,
    rtol: float = 0.0,
) -> tuple[complex, float]:
    """Adaptive composite Gauss-Legendre integration of a complex-valued f.

    A panel is accepted when the one-panel and two-half-panel values agree to
    max(tol, rtol * |panel value|); otherwise both halves are refined with the
    same tolerance.

    Args:
        f: Vectorized integrand
        a: Lower bound
        b: Upper bound
        tol: Absolute tolerance per panel
        order: Nodes per panel
        max_depth: Maximum bisection depth
        rtol: Relative tolerance per panel, for integrands with large peaks

    Returns:
        Tuple of (integral_value, error_estimate)

    Raises:
        QuadratureError: If a panel still disagrees at max_depth
    """
    if a == b:
        return 0j, 0.0
    if a > b:
        value, error = adaptive_gauss_legendre(f, b, a, tol, order, max_depth, rtol)
        return -value, error

    panels = 0

    def _adaptive(lo: float, hi: float, whole: complex, depth: int) -> tuple[complex, float]:
        nonlocal panels
        mid = 0.5 * (lo + hi)
        left = gauss_legendre(f, lo, mid, order)
        right = gauss_legendre(f, mid, hi, order)
        combined = left + right
        error = abs(combined - whole)
        panels += 1
        if error <= max(tol, rtol * abs(combined)):
            return combined, error
        if depth >= max_depth:
            raise QuadratureError(
                f"Adaptive quadrature on [{lo:.3e}, {hi:.3e}] stalled at error {error:.3e}"
            )
        left_value, left_error = _adaptive(lo, mid, left, depth + 1)
        right_value, right_error = _adaptive(mid, hi, right, depth + 1)
        return left_value + right_value, left_error + right_error

    value, error = _adaptive(a, b, gauss_legendre(f, a, b, order), 0)
    logger.debug(f"Adaptive Gauss-Legendre used {panels} panels, error {error:.3e}")
    return value, error


def circle_nodes(count: int) -> np.ndarray:
    """Uniform angles 2 pi j / count."""
    return 2 * np.pi * np.arange(count) / count


def refine_periodic(
    integrate: Callable[[int], np.ndarray],
    tol: float,
    start: int = 32,
    max_nodes: int = 1 << 16,
) -> tuple[np.ndarray, int]:
    """Double the trapezoid grid until two successive values agree to tol.

    Args:
        integrate: Maps a node count to the trapezoid value(s) on that grid
        tol: Tolerance between successive refinements, relative to max(1, |value|)
        start: Initial node count
        max_nodes: Largest grid tried

    Returns:
        Tuple of (value, node_count)

    Raises:
        QuadratureError: If the largest grid still changes the value by more than tol
    """
    count = start
    previous = np.asarray(integrate(count))
    while count < max_nodes:
        count *= 2
        current = np.asarray(integrate(count))
        change = float(np.max(np.abs(current - previous)))
        if change <= tol * max(1.0, float(np.max(np.abs(current)))):
            logger.debug(f"Trapezoid rule settled at {count} nodes (change {change:.3e})")
            return current, count
        previous = current
    raise QuadratureError(f"Trapezoid rule did not settle below {tol} with {max_nodes} nodes")
