"""Solvers for Fuchsian-form operators p(theta) + tQ with theta = t d/dt.

Operators act on series t^sigma * sum u_k t^k through the rule
t^i c(theta) t^{sigma+k} = c(sigma+k) t^{sigma+k+i}, and on delta layers through
theta delta^(k) = -(k+1) delta^(k) and t delta^(k) = -k delta^(k-1).
"""

import logging
import math
from collections.abc import Callable

import numpy as np
from scipy.linalg import solve_triangular

from poisson_bv.models.operator import DividedThetaOperator, MatrixThetaOperator, ThetaOperator
from poisson_bv.models.series import (
    DeltaLayer,
    FixedPointSolution,
    FormalSeries,
    MonicPolynomial,
    taylor_shift,
)
from poisson_bv.utils.errors import (
    CertificationError,
    ConsistencyError,
    NotDivisibleError,
    NotFuchsianError,
    PreconditionError,
    ResonanceError,
)

logger = logging.getLogger(__name__)

RESONANCE_TOL = 1e-10
DIVISIBILITY_TOL = 1e-10
RESUBSTITUTION_TOL = 1e-8


def _column(values: np.ndarray, ndim: int) -> np.ndarray:
    """Reshape per-index scalars so they broadcast against (N+1, ...) coefficients."""
    return np.reshape(values, (-1,) + (1,) * (ndim - 1))


def _check_resonance(p: MonicPolynomial, points: list[int], label: str) -> None:
    m = p.degree
    for k in points:
        if abs(p(k)) < RESONANCE_TOL * (1 + abs(k)) ** m:
            raise ResonanceError(f"Indicial polynomial vanishes at {label}={k}", k)


def indicial_polynomial(P: ThetaOperator) -> tuple[MonicPolynomial, complex]:
    """Return the monic indicial polynomial of P and the factor divided out.

    Raises:
        NotFuchsianError: If the t^0 slice has degree below the operator order
    """
    if not P.is_fuchsian:
        raise NotFuchsianError(
            f"t^0 slice has degree below the operator order {P.order}"
        )
    return MonicPolynomial.normalize(P.slice(0))


def shift_conjugate(P: ThetaOperator, lam: complex) -> ThetaOperator:
    """Return t^{-lam} P t^{lam}: every slice c_i(theta) becomes c_i(theta + lam)."""
    return ThetaOperator(np.array([taylor_shift(row, lam) for row in P.coeffs]))


def divide_by_t(P: ThetaOperator) -> DividedThetaOperator:
    """Write t^{-1} P as d/dt q(theta) + R where p(s) = s q(s).

    Raises:
        NotDivisibleError: If the t^0 slice does not vanish at 0
    """
    row0 = P.slice(0)
    if np.any(row0):
        indicial_polynomial(P)
        scale = max(1.0, float(np.max(np.abs(row0))))
        if abs(row0[0]) > DIVISIBILITY_TOL * scale:
            raise NotDivisibleError(f"p(0) = {row0[0]} is not zero; t^-1 P does not extend")
        quotient = row0[1:] if len(row0) > 1 else np.zeros(1, dtype=complex)
    else:
        quotient = np.zeros(1, dtype=complex)
    if P.t_degree >= 1:
        remainder = ThetaOperator(P.coeffs[1:])
    else:
        remainder = ThetaOperator(np.zeros((1, 1), dtype=complex))
    return DividedThetaOperator(quotient=quotient, remainder=remainder)


def apply_to_shifted_series(P: ThetaOperator, u: FormalSeries) -> FormalSeries:
    """Return t^{-sigma} P (t^sigma sum u_k t^k), truncated at the order of u."""
    n = u.truncation
    sigma = u.exponent_offset
    out = np.zeros_like(u.coeffs)
    for i in range(min(P.t_degree, n) + 1):
        idx = np.arange(n + 1 - i)
        values = P.slice_values(i, sigma + idx)
        out[i:] += _column(values, u.coeffs.ndim) * u.coeffs[: n + 1 - i]
    return FormalSeries(out, sigma)


def apply_divided_to_extension(
    D: DividedThetaOperator, v: FormalSeries
) -> tuple[complex, FormalSeries]:
    """Apply t^{-1} P to the extension by zero of t^mu * v across t = 0.

    Returns the coefficient of delta(t) and the regular part (offset mu - 1).
    A delta only appears when mu = 0, with coefficient q(0) v_0.

    Raises:
        ValueError: If Re(mu) < 0 with mu != 0, where the extension is not locally integrable
    """
    mu = v.exponent_offset
    if abs(mu) <= 1e-12:
        mu = 0j
        delta = complex(D.q(0.0) * v.coeffs[0])
    elif mu.real > 0:
        delta = 0j
    else:
        raise ValueError(f"Extension of t^{mu} by zero is not locally integrable")

    n = v.truncation
    idx = np.arange(n + 1)
    regular = _column((mu + idx) * D.q(mu + idx), v.coeffs.ndim) * v.coeffs
    regular = np.array(regular, dtype=complex)
    R = D.remainder
    for r in range(min(R.t_degree, n - 1) + 1):
        shift = r + 1
        src = np.arange(n + 1 - shift)
        values = R.slice_values(r, mu + src)
        regular[shift:] += _column(values, v.coeffs.ndim) * v.coeffs[: n + 1 - shift]
    return delta, FormalSeries(regular, mu - 1)


def hp_apply(p: MonicPolynomial, f: FormalSeries) -> FormalSeries:
    """Apply H_p by its monomial action t^n -> t^n / p(n).

    Raises:
        PreconditionError: If some root of p has non-negative real part
        ValueError: If f carries a non-zero exponent offset
    """
    roots = p.roots()
    if np.any(roots.real >= 0):
        raise PreconditionError(f"H_p needs roots with negative real part, got {roots}")
    if f.exponent_offset != 0:
        raise ValueError("H_p acts on power series with exponent offset 0")
    n = np.arange(f.truncation + 1)
    return FormalSeries(f.coeffs / _column(p(n), f.coeffs.ndim))


def solve_formal(
    P: ThetaOperator, f: FormalSeries, N: int | None = None, method: str = "recursion"
) -> FormalSeries:
    """Solve P u = f + O(t^{N+1}) in formal power series.

    Args:
        P: Operator of Fuchsian form
        f: Right-hand side with exponent offset 0
        N: Truncation order (defaults to the order of f)
        method: "recursion" for forward substitution, "triangular" for a dense
            lower-triangular solve

    Raises:
        ResonanceError: If p(k) = 0 for some 0 <= k <= N
        ConsistencyError: If re-substitution leaves a residual
    """
    p, lead = indicial_polynomial(P)
    N = f.truncation if N is None else N
    if f.exponent_offset != 0:
        raise ValueError("solve_formal needs a right-hand side with exponent offset 0")
    f = f.padded(N)
    _check_resonance(p, list(range(N + 1)), "k")

    if method == "recursion":
        u = np.zeros_like(f.coeffs)
        diagonal = P.slice_values(0, np.arange(N + 1))
        for k in range(N + 1):
            acc = np.array(f.coeffs[k], dtype=complex)
            for i in range(1, min(k, P.t_degree) + 1):
                acc = acc - P.slice_values(i, k - i) * u[k - i]
            u[k] = acc / diagonal[k]
    elif method == "triangular":
        A = np.zeros((N + 1, N + 1), dtype=complex)
        for i in range(min(P.t_degree, N) + 1):
            src = np.arange(N + 1 - i)
            A[src + i, src] = P.slice_values(i, src)
        u = solve_triangular(A, f.coeffs, lower=True)
    else:
        raise ValueError(f"Unknown method '{method}'")

    solution = FormalSeries(u)
    _verify_resubstitution(P, solution, f)
    return solution


def _verify_resubstitution(P: ThetaOperator, u: FormalSeries, f: FormalSeries) -> None:
    residual = apply_to_shifted_series(P, u).coeffs - f.coeffs
    scale = max(
        1.0,
        float(np.max(np.abs(f.coeffs))),
        float(np.max(np.abs(P.coeffs))) * float(np.max(np.abs(u.coeffs))),
    )
    err = float(np.max(np.abs(residual))) / scale
    logger.debug(f"Re-substitution residual {err:.3e} at truncation {u.truncation}")
    if err > RESUBSTITUTION_TOL:
        raise ConsistencyError(f"Re-substitution residual {err:.3e} exceeds tolerance")


def radial_series(P: ThetaOperator, r: complex, N: int) -> FormalSeries:
    """Return the series t^r (1 + sum_{k>=1} u_k t^k) annihilated by P.

    Raises:
        ValueError: If r is not a root of the indicial polynomial
        ResonanceError: If r + k is another root for some 1 <= k <= N
    """
    Pr = shift_conjugate(P, r)
    row0 = Pr.slice(0)
    if abs(row0[0]) > DIVISIBILITY_TOL * max(1.0, float(np.max(np.abs(row0)))):
        raise ValueError(f"{r} is not a characteristic exponent")
    coeffs = np.zeros(N + 1, dtype=complex)
    coeffs[0] = 1.0
    if N == 0:
        return FormalSeries(coeffs, r)
    rhs = np.zeros(N, dtype=complex)
    for i in range(1, min(Pr.t_degree, N) + 1):
        rhs[i - 1] = -Pr.slice_values(i, 0.0)
    try:
        tail = solve_formal(shift_conjugate(Pr, 1.0), FormalSeries(rhs), N - 1)
    except ResonanceError as e:
        raise ResonanceError(f"Exponent {r} resonates at k={e.k + 1}", e.k + 1) from e
    coeffs[1:] = tail.coeffs
    return FormalSeries(coeffs, r)


def taylor_coefficients(f: Callable, radius: float, N: int) -> FormalSeries:
    """Taylor coefficients of an analytic callback from samples on |t| = radius."""
    count = 64
    while count < 2 * (N + 1):
        count *= 2
    nodes = radius * np.exp(2j * np.pi * np.arange(count) / count)
    values = np.asarray([f(z) for z in nodes], dtype=complex)
    coeffs = np.fft.fft(values) / count
    return FormalSeries(coeffs[: N + 1] / radius ** np.arange(N + 1))


def _newton_coefficients(row: np.ndarray, roots: np.ndarray) -> np.ndarray:
    """Coefficients a_j with c(s) = sum_j a_j prod_{k<j} (s - s_k)."""
    m = len(roots)
    basis = np.zeros((m + 1, m + 1), dtype=complex)
    column = np.array([1.0 + 0j])
    for j in range(m + 1):
        basis[: j + 1, j] = column
        if j < m:
            column = np.convolve(column, np.array([-roots[j], 1.0]))
    padded = np.zeros(m + 1, dtype=complex)
    width = min(len(row), m + 1)
    padded[:width] = row[:width]
    return solve_triangular(basis, padded, lower=False, unit_diagonal=True)


def _certify(P_tilde: ThetaOperator, p_tilde: MonicPolynomial, radius_hint: float):
    """Radius and ratio from the majorant bound C = K (m+1) (2e)^m."""
    m = p_tilde.degree
    roots = p_tilde.roots()
    work = radius_hint / 2
    sums = np.zeros(m + 1)
    for i in range(1, P_tilde.t_degree + 1):
        a = _newton_coefficients(P_tilde.slice(i), roots)
        sums += np.abs(a) * work ** (i - 1)
    K = max(1.0, float(np.max(sums)))
    C = K * (m + 1) * (2 * math.e) ** m
    radius = min(work, 0.5 / C)
    if not np.isfinite(radius) or radius <= 0:
        raise CertificationError(f"No positive radius from coefficient bound K={K}")
    return radius, C * radius


def solve_fixed_point(
    P: ThetaOperator,
    f: FormalSeries | Callable,
    radius_hint: float,
    tol: float = 1e-14,
    truncation: int = 40,
    max_iterations: int = 500,
) -> FixedPointSolution:
    """Solve P u = f by successive approximation with a certified radius.

    Finitely many coefficients are fixed by the formal recursion; the rest is
    shifted by t^k so that all roots of p(k + .) have real part <= -2, and
    v = f - tQ H_p v is iterated until the increment norm drops below tol.

    Args:
        P: Operator of Fuchsian form
        f: Right-hand side as a series or as an analytic callback on |t| < radius_hint
        radius_hint: Radius of the disk on which f and the coefficients are bounded
        tol: Stopping threshold for the increment norm
        truncation: Number of series coefficients kept
        max_iterations: Iteration cap

    Raises:
        ResonanceError: If a non-negative integer is a characteristic exponent
        CertificationError: If no positive radius can be certified or iteration stalls
    """
    if radius_hint <= 0:
        raise ValueError("radius_hint must be positive")
    p, lead = indicial_polynomial(P)
    Pn = P.scaled(1 / lead)
    roots = p.roots()
    for s in roots:
        k = int(round(s.real))
        if k >= 0 and abs(s - k) <= 1e-9:
            raise ResonanceError(f"Characteristic exponent {s} is a non-negative integer", k)

    shift = 0 if p.degree == 0 else max(0, math.ceil(float(np.max(roots.real)) + 2))
    if callable(f):
        rhs = taylor_coefficients(f, radius_hint / 2, truncation)
    else:
        if f.exponent_offset != 0:
            raise ValueError("Right-hand side must have exponent offset 0")
        rhs = f.padded(truncation)
    if shift > truncation:
        raise ValueError(f"Truncation {truncation} below the required shift {shift}")

    if shift > 0:
        prefix = solve_formal(Pn, rhs.padded(shift - 1), shift - 1).padded(truncation)
        residual = rhs.coeffs - apply_to_shifted_series(Pn, prefix).coeffs
    else:
        prefix = FormalSeries.zeros(truncation)
        residual = np.array(rhs.coeffs)
    f_tilde = residual[shift:]

    P_tilde = shift_conjugate(Pn, shift)
    p_tilde = p.shifted(shift)
    radius, ratio = _certify(P_tilde, p_tilde, radius_hint)
    tQ = ThetaOperator(np.vstack([np.zeros((1, P_tilde.order + 1)), P_tilde.coeffs[1:]]))

    n_work = len(f_tilde)
    weights = radius ** np.arange(n_work)
    denominators = p_tilde(np.arange(n_work))
    w = f_tilde.copy()
    v = w.copy()
    norms = [float(np.sum(np.abs(w) * weights))]
    iterations = 0
    while norms[-1] > tol:
        if iterations >= max_iterations:
            raise CertificationError(
                f"Successive approximation did not reach {tol} in {max_iterations} steps"
            )
        w = -apply_to_shifted_series(tQ, FormalSeries(w / denominators)).coeffs
        v = v + w
        norms.append(float(np.sum(np.abs(w) * weights)))
        iterations += 1
    logger.debug(f"Fixed point reached after {iterations} iterations (shift {shift})")

    coeffs = np.array(prefix.coeffs)
    coeffs[shift:] += v / denominators
    return FixedPointSolution(
        series=FormalSeries(coeffs),
        certified_radius=radius,
        bound_factor=ratio,
        increment_norms=norms,
        iterations=iterations,
        shift=shift,
    )


def apply_to_delta_layer(P: ThetaOperator, v: DeltaLayer) -> DeltaLayer:
    """Apply P to sum_k v_k delta^(k)(t)."""
    K = v.order
    out = np.zeros_like(v.coeffs)
    for k in range(K + 1):
        for i in range(0, min(P.t_degree, K - k) + 1):
            j = k + i
            factor = P.slice_values(i, -j - 1) * (-1) ** i * math.perm(j, i)
            out[k] = out[k] + factor * v.coeffs[j]
    return DeltaLayer(out)


def solve_delta_layer(P: ThetaOperator, f: DeltaLayer, headroom: int = 0) -> DeltaLayer:
    """Solve P v = f for a layer v supported at t = 0, back-substituting from the top.

    Raises:
        ResonanceError: If p(-k-1) = 0 for some required k
    """
    p, _ = indicial_polynomial(P)
    K = f.order
    _check_resonance(p, [-k - 1 for k in range(K + headroom + 1)], "-k-1")
    v = np.zeros_like(f.coeffs)
    for k in range(K, -1, -1):
        acc = np.array(f.coeffs[k], dtype=complex)
        for i in range(1, min(P.t_degree, K - k) + 1):
            j = k + i
            acc = acc - P.slice_values(i, -j - 1) * (-1) ** i * math.perm(j, i) * v[j]
        v[k] = acc / P.slice_values(0, -k - 1)
    return DeltaLayer(v)


def _system_coeffs(f, n: int) -> np.ndarray:
    coeffs = f.coeffs if isinstance(f, (FormalSeries, DeltaLayer)) else np.asarray(f, dtype=complex)
    coeffs = np.asarray(coeffs, dtype=complex)
    if coeffs.ndim != 2 or coeffs.shape[1] != n:
        raise ValueError(f"System data must have shape (N+1, {n})")
    return coeffs


def apply_system(M: MatrixThetaOperator, u: FormalSeries) -> FormalSeries:
    """Apply p(theta) I + tQ to a vector-valued shifted series."""
    coeffs = _system_coeffs(u, M.size)
    sigma = u.exponent_offset
    N = coeffs.shape[0] - 1
    out = coeffs * M.indicial(sigma + np.arange(N + 1))[:, np.newaxis]
    for k in range(N + 1):
        for i in range(1, min(k, M.perturbation.shape[0]) + 1):
            out[k] = out[k] + M.perturbation_at(i, sigma + k - i) @ coeffs[k - i]
    return FormalSeries(out, sigma)


def solve_formal_system(M: MatrixThetaOperator, f, N: int | None = None) -> FormalSeries:
    """Vector analogue of solve_formal with scalar indicial polynomial.

    Raises:
        ResonanceError: If p(k) = 0 for some 0 <= k <= N
    """
    coeffs = _system_coeffs(f, M.size)
    N = coeffs.shape[0] - 1 if N is None else N
    if coeffs.shape[0] < N + 1:
        coeffs = np.vstack([coeffs, np.zeros((N + 1 - coeffs.shape[0], M.size))])
    coeffs = coeffs[: N + 1]
    p = M.indicial
    _check_resonance(p, list(range(N + 1)), "k")
    u = np.zeros_like(coeffs)
    for k in range(N + 1):
        acc = coeffs[k].copy()
        for i in range(1, min(k, M.perturbation.shape[0]) + 1):
            acc = acc - M.perturbation_at(i, k - i) @ u[k - i]
        u[k] = acc / p(k)
    return FormalSeries(u)


def apply_delta_layer_system(M: MatrixThetaOperator, v: DeltaLayer) -> DeltaLayer:
    """Apply p(theta) I + tQ to a vector-valued delta layer."""
    coeffs = _system_coeffs(v, M.size)
    K = coeffs.shape[0] - 1
    out = coeffs * M.indicial(-np.arange(K + 1) - 1)[:, np.newaxis]
    for k in range(K + 1):
        for i in range(1, min(K - k, M.perturbation.shape[0]) + 1):
            j = k + i
            factor = (-1) ** i * math.perm(j, i)
            out[k] = out[k] + factor * (M.perturbation_at(i, -j - 1) @ coeffs[j])
    return DeltaLayer(out)


def solve_delta_layer_system(M: MatrixThetaOperator, f, headroom: int = 0) -> DeltaLayer:
    """Vector analogue of solve_delta_layer.

    Raises:
        ResonanceError: If p(-k-1) = 0 for some required k
    """
    coeffs = _system_coeffs(f, M.size)
    K = coeffs.shape[0] - 1
    p = M.indicial
    _check_resonance(p, [-k - 1 for k in range(K + headroom + 1)], "-k-1")
    v = np.zeros_like(coeffs)
    for k in range(K, -1, -1):
        acc = coeffs[k].copy()
        for i in range(1, min(K - k, M.perturbation.shape[0]) + 1):
            j = k + i
            acc = acc - (-1) ** i * math.perm(j, i) * (M.perturbation_at(i, -j - 1) @ v[j])
        v[k] = acc / p(-k - 1)
    return DeltaLayer(v)
