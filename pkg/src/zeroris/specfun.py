"""Special functions used by the closed-form performance expressions.

Regularized upper incomplete gamma, integer-order Bessel functions of the
first kind, the half-order Laguerre function that appears in Rician envelope
moments, and Gauss-Laguerre quadrature rules.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import linalg, special

_EPS = 1e-16
_MAX_ITER = 10_000
_TINY = 1e-300
MAX_QUADRATURE_ORDER = 128


def _gammainc_series(a: float, x: float) -> float:
    """Lower regularized P(a, x) by its power series; use for x < a + 1."""
    term = 1.0 / a
    total = term
    ap = a
    for _ in range(_MAX_ITER):
        ap += 1.0
        term *= x / ap
        total += term
        if abs(term) < abs(total) * _EPS:
            break
    else:
        raise ArithmeticError(f"incomplete gamma series did not converge (a={a}, x={x})")
    return total * math.exp(-x + a * math.log(x) - math.lgamma(a))


def _gammaincc_cf(a: float, x: float) -> float:
    """Upper regularized Q(a, x) by modified-Lentz continued fraction; x >= a + 1."""
    b = x + 1.0 - a
    c = 1.0 / _TINY
    d = 1.0 / b
    h = d
    for i in range(1, _MAX_ITER):
        an = -i * (i - a)
        b += 2.0
        d = an * d + b
        if abs(d) < _TINY:
            d = _TINY
        c = b + an / c
        if abs(c) < _TINY:
            c = _TINY
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _EPS:
            break
    else:
        raise ArithmeticError(f"incomplete gamma fraction did not converge (a={a}, x={x})")
    return math.exp(-x + a * math.log(x) - math.lgamma(a)) * h


def _gammaincc_scalar(a: float, x: float) -> float:
    a = float(a)
    x = float(x)
    if not a > 0.0:
        raise ValueError(f"shape must be positive, got {a}")
    if x < 0.0 or math.isnan(x):
        raise ValueError(f"argument must be nonnegative, got {x}")
    if x == 0.0:
        return 1.0
    if math.isinf(x):
        return 0.0
    if x < a + 1.0:
        return max(0.0, 1.0 - _gammainc_series(a, x))
    return min(1.0, _gammaincc_cf(a, x))


_gammaincc_vec = np.frompyfunc(_gammaincc_scalar, 2, 1)


def regularized_upper_gamma(shape, x):
    """Q(a, x) = Gamma(a, x) / Gamma(a).

    Accepts scalars or array-likes (broadcast); returns a float for scalar
    input. Raises ``ValueError`` for a nonpositive shape or negative ``x``.
    """
    if np.ndim(shape) == 0 and np.ndim(x) == 0:
        return _gammaincc_scalar(shape, x)
    return _gammaincc_vec(shape, x).astype(float)


def regularized_lower_gamma(shape, x):
    if np.ndim(shape) == 0 and np.ndim(x) == 0:
        return 1.0 - _gammaincc_scalar(shape, x)
    return 1.0 - regularized_upper_gamma(shape, x)


def bessel_j(order, x):
    """Bessel function of the first kind J_n(x) for integer n >= 0, x >= 0."""
    n = np.asarray(order)
    xv = np.asarray(x, dtype=float)
    if np.any(n < 0) or np.any(np.asarray(n) != np.floor(n)):
        raise ValueError("order must be a nonnegative integer")
    if np.any(xv < 0):
        raise ValueError("argument must be nonnegative")
    out = special.jv(n, xv)
    return float(out) if np.ndim(out) == 0 else out


def laguerre_half(x):
    """L_{1/2}(-x) for x >= 0.

    Uses L_{1/2}(-x) = e^{-x/2} [(1 + x) I0(x/2) + x I1(x/2)], evaluated with
    exponentially scaled Bessel functions so large x does not overflow.
    """
    xv = np.asarray(x, dtype=float)
    if np.any(xv < 0):
        raise ValueError("argument must be nonnegative")
    half = 0.5 * xv
    out = (1.0 + xv) * special.i0e(half) + xv * special.i1e(half)
    return float(out) if np.ndim(out) == 0 else out


def laguerre_half_moments(noncentrality: float) -> tuple[float, float]:
    """Mean and variance of |h| for h ~ CN(mu, 1) with mu^2 = ``noncentrality``.

    Returns ``(sqrt(pi)/2 * L_{1/2}(-mu^2), L_1(-mu^2) - pi/4 * L_{1/2}(-mu^2)^2)``.
    """
    mu_sq = float(noncentrality)
    if mu_sq < 0:
        raise ValueError("noncentrality must be nonnegative")
    lh = laguerre_half(mu_sq)
    mean = 0.5 * math.sqrt(math.pi) * lh
    # L_1(-x) = 1 + x; subtract in a way that keeps the small variance accurate
    variance = (1.0 + mu_sq) - mean * mean
    return mean, variance


@dataclass(frozen=True)
class QuadratureRule:
    """Gauss-Laguerre rule for integrals of the form int_0^inf f(x) e^{-x} dx."""

    order: int
    nodes: np.ndarray
    weights: np.ndarray

    def integrate(self, func) -> float:
        return float(np.dot(self.weights, func(self.nodes)))


def _laguerre_pair(n: int, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """(L_n(x), L_{n-1}(x)) via the three-term recurrence."""
    prev = np.ones_like(x)
    cur = 1.0 - x
    if n == 1:
        return cur, prev
    for k in range(1, n):
        prev, cur = cur, ((2 * k + 1 - x) * cur - k * prev) / (k + 1)
    return cur, prev


def gauss_laguerre(order: int) -> QuadratureRule:
    """Nodes and weights of the order-L Gauss-Laguerre rule, 1 <= L <= 128.

    Nodes are eigenvalues of the symmetric tridiagonal Jacobi matrix. Weights
    come from ``x_i / ((L+1)^2 L_{L+1}(x_i)^2)``, which keeps relative accuracy
    for the tiny weights at the largest nodes (eigenvector weights lose it),
    followed by renormalization to unit total mass.
    """
    if isinstance(order, bool) or int(order) != order:
        raise ValueError("order must be an integer")
    order = int(order)
    if not 1 <= order <= MAX_QUADRATURE_ORDER:
        raise ValueError(f"quadrature order must be in [1, {MAX_QUADRATURE_ORDER}], got {order}")
    if order == 1:
        return QuadratureRule(1, np.array([1.0]), np.array([1.0]))
    diag = 2.0 * np.arange(order) + 1.0
    off = np.arange(1, order, dtype=float)
    nodes = np.sort(linalg.eigh_tridiagonal(diag, off, eigvals_only=True))
    lnext, _ = _laguerre_pair(order + 1, nodes)
    weights = nodes / ((order + 1) ** 2 * lnext**2)
    weights /= weights.sum()
    return QuadratureRule(order, nodes, weights)
