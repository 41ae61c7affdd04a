"""Energy-detection error probabilities, thresholds and repetition combining.

A bit is decided by comparing z = sum_m |x_m|^2 against gamma_th. Given the
per-bit variance v, z / v is Gamma(M, 1), so the conditional error
probabilities are regularized incomplete gamma functions. The unconditional
per-repetition BER averages them over v = sigma_chi^2 D + sum_k P_k I_k + N0
with D gamma-distributed and I_k exponential.

Three evaluation routes are offered for that average:

``exact``
    Adaptive integration of the Bessel-kernel MGF integral. Reference path;
    it becomes ill-conditioned when gamma_th / N0 is very large because the
    integrand then oscillates over a huge range before decaying.
``laguerre``
    Gauss-Laguerre quadrature of the same integral after scaling by N0.
    Cheap, accurate only while gamma_th / N0 is moderate.
``inversion``
    Bromwich inversion of the Laplace transform of Q(M, gamma_th / v),
    weighted by the moment generating function of v. Well conditioned at
    every scale; used by ``auto``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import integrate, special

from .linkstats import DesiredLinkMoments, InterferenceLinkStats, aggregate_noise
from .specfun import QuadratureRule, gauss_laguerre, regularized_upper_gamma
from .sysmodel import SystemConfig

METHODS = ("auto", "exact_integral", "laguerre", "inversion", "lower_bound")


class NumericalConvergenceError(ArithmeticError):
    """An integral failed to reach its tolerance; ``error_estimate`` holds the achieved bound."""

    def __init__(self, message: str, error_estimate: float):
        super().__init__(f"{message} (error estimate {error_estimate:.3g})")
        self.error_estimate = error_estimate


@dataclass(frozen=True)
class BerReport:
    per_rep_ber: float
    combined_ber: float
    method: str
    threshold_used: float
    quadrature_order: int | None = None
    error_estimate: float = 0.0
    # majority vote applied to each bit's own error probability (inversion only)
    combined_ber_per_bit: float | None = None


def conditional_error_probs(variance_bit0: float, variance_bit1: float, threshold: float, samples: int):
    """(false alarm on bit 0, miss on bit 1) for known per-bit variances."""
    p0 = regularized_upper_gamma(samples, threshold / variance_bit0)
    p1 = 1.0 - regularized_upper_gamma(samples, threshold / variance_bit1)
    return p0, p1


def ber_conditional(variance_bit0, variance_bit1, threshold, samples: int):
    """1/2 + Q(M, gamma/v0)/2 - Q(M, gamma/v1)/2, vectorized over the arguments."""
    g0 = special.gammaincc(samples, np.asarray(threshold) / np.asarray(variance_bit0))
    g1 = special.gammaincc(samples, np.asarray(threshold) / np.asarray(variance_bit1))
    out = 0.5 + 0.5 * (g0 - g1)
    return float(out) if np.ndim(out) == 0 else out


def ber_threshold_derivative(variance_bit0, variance_bit1, threshold, samples: int):
    """d/d gamma_th of :func:`ber_conditional`, in closed form."""
    m = samples
    t = np.asarray(threshold, dtype=float)

    def term(v):
        x = t / v
        return np.exp(m * np.log(x) - x - special.gammaln(m)) / t

    out = 0.5 * (term(variance_bit1) - term(variance_bit0))
    return float(out) if np.ndim(out) == 0 else out


# ------------------------------------------------------------------ helpers

@dataclass(frozen=True)
class _VarianceLaw:
    """Law of v = scale_d * Gamma(shape) + sum_k b_k Exp(1) + n0."""

    shape: float
    scale_d: float
    mean_d: float
    b: np.ndarray
    n0: float

    @property
    def mean(self) -> float:
        return self.mean_d + float(self.b.sum()) + self.n0

    def mgf(self, p):
        """E[exp(p v)] for complex p with Re p inside the convergence strip."""
        p = np.asarray(p)
        out = np.exp(p * self.n0)
        if self.scale_d > 0.0:
            out = out * np.exp(-self.shape * np.log1p(-p * self.scale_d))
        else:
            out = out * np.exp(p * self.mean_d)
        for bk in self.b:
            out = out / (1.0 - p * bk)
        return out

    def strip_limit(self) -> float:
        rates = [1.0 / self.scale_d] if self.scale_d > 0 else []
        rates += [1.0 / bk for bk in self.b if bk > 0]
        return min(rates) if rates else math.inf


def _variance_law(bit_variance, moments, istats, noise_floor) -> _VarianceLaw:
    b = np.asarray(istats.powers * istats.per_interferer_variance, dtype=float)
    b = b[b > 0]
    if moments.variance > 0.0 and moments.mean > 0.0:
        return _VarianceLaw(moments.gamma_shape, bit_variance * moments.gamma_scale,
                            bit_variance * moments.mean, b, noise_floor)
    return _VarianceLaw(1.0, 0.0, bit_variance * max(moments.mean, 0.0), b, noise_floor)


def _bit_variances(config: SystemConfig) -> tuple[float, float]:
    ns = config.noise_source
    return ns.sigma0_sq, ns.sigma1_sq


def _quad(func, lo, hi, **kw):
    # convergence is judged from the returned error estimate, not from warnings
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        return integrate.quad(func, lo, hi, **kw)


# ------------------------------------------------------------------ exact

def ber_per_repetition_exact(
    config: SystemConfig,
    moments: DesiredLinkMoments,
    istats: InterferenceLinkStats,
    threshold: float,
    tol: float = 1e-10,
    max_doublings: int = 40,
    return_error: bool = False,
):
    """Bessel-kernel integral with u = 2 sqrt(S), integrated on doubling intervals.

    Integration stops once two consecutive interval contributions fall below
    ``tol``. Raises :class:`NumericalConvergenceError` when the accumulated
    quadrature error exceeds ``10 * max(tol, 1e-6 * |integral|)`` or the tail never
    settles.
    """
    s0, s1 = _bit_variances(config)
    if s0 == s1:
        return (0.5, 0.0) if return_error else 0.5
    m = config.samples_per_symbol
    n0 = config.noise_floor
    b = istats.powers * istats.per_interferer_variance / threshold
    k = moments.gamma_shape if moments.variance > 0 else None

    def mgf_d(sx, s):
        if k is None:
            return np.exp(-s * sx * moments.mean / threshold)
        return np.exp(-k * np.log1p(s * sx * moments.gamma_scale / threshold))

    log_norm = -(m - 1) * math.log(2.0) - special.gammaln(m) - math.log(2.0)

    def integrand(u):
        s = 0.25 * u * u
        common = np.exp(-s * n0 / threshold)
        for bk in b:
            common = common / (1.0 + s * bk)
        diff = mgf_d(s1, s) - mgf_d(s0, s)
        return math.exp(log_norm) * u ** (m - 1) * special.jv(m, u) * common * diff

    # first interval covers the leading Bessel lobes
    upper = max(4.0 * m, 20.0)
    total, err = _quad(integrand, 0.0, upper, limit=400, epsabs=tol * 0.1, epsrel=1e-12)
    lower = upper
    small = 0
    for _ in range(max_doublings):
        upper = 2.0 * lower
        piece, perr = _quad(integrand, lower, upper, limit=400, epsabs=tol * 0.1, epsrel=1e-12)
        total += piece
        err += perr
        lower = upper
        small = small + 1 if abs(piece) < tol else 0
        if small >= 2:
            break
    else:
        raise NumericalConvergenceError("Bessel integral tail did not settle", err)
    if err > max(tol, 1e-6 * abs(total)) * 10:
        raise NumericalConvergenceError("Bessel integral did not reach tolerance", err)
    ber = min(0.5, max(0.0, 0.5 + total))
    return (ber, err) if return_error else ber


# ------------------------------------------------------------------ laguerre

def ber_per_repetition_laguerre(
    config: SystemConfig,
    moments: DesiredLinkMoments,
    istats: InterferenceLinkStats,
    threshold: float,
    rule: QuadratureRule | None = None,
):
    """Gauss-Laguerre evaluation after substituting S = Omega gamma_th / N0."""
    rule = rule or gauss_laguerre(30)
    if rule.order < 10:
        raise ValueError("Laguerre path needs a rule of order at least 10")
    s0, s1 = _bit_variances(config)
    if s0 == s1:
        return 0.5
    m = config.samples_per_symbol
    n0 = config.noise_floor
    ratio = threshold / n0
    nodes, weights = rule.nodes, rule.weights
    b = istats.powers * istats.per_interferer_variance / n0
    inter = np.prod(1.0 / (1.0 + np.multiply.outer(nodes, b)), axis=-1) if b.size else np.ones_like(nodes)

    def mgf_d(sx):
        if moments.variance <= 0:
            return np.exp(-nodes * sx * moments.mean / n0)
        return np.exp(-moments.gamma_shape * np.log1p(nodes * sx * moments.gamma_scale / n0))

    kernel = nodes ** (m / 2 - 1) * special.jv(m, 2.0 * np.sqrt(nodes * ratio))
    total = np.dot(weights, kernel * inter * (mgf_d(s1) - mgf_d(s0)))
    log_pref = 0.5 * m * math.log(ratio) - special.gammaln(m) - math.log(2.0)
    return float(0.5 + math.exp(log_pref) * total)


# ------------------------------------------------------------------ inversion

def _laplace_tail(p, m: int):
    """Laplace transform of Q(m, 1/v) in v, at complex p (threshold scaled to 1)."""
    z = 2.0 * np.sqrt(p)
    ez = np.exp(-z)
    out = 0.0
    log_fact = 0.0
    for j in range(m):
        if j > 0:
            log_fact += math.log(j)
        out = out + 2.0 * np.exp((j - 1) / 2.0 * np.log(p) - log_fact) * special.kve(j - 1, z) * ez
    return out


def expected_tail(law: _VarianceLaw, threshold: float, m: int, tol: float = 1e-13) -> tuple[float, float]:
    """E[Q(m, threshold / v)] by Bromwich inversion; returns (value, error estimate).

    The contour Re p = c sits inside the strip where E[exp(p v)] exists. With
    p = c + i x^2 the integrand decays like exp(-sqrt(2) x), independent of
    the scale of ``threshold``.
    """
    scaled = _VarianceLaw(law.shape, law.scale_d / threshold, law.mean_d / threshold,
                          law.b / threshold, law.n0 / threshold)
    c = min(0.5 * scaled.strip_limit(), 1.0 / scaled.mean)

    def integrand(x):
        p = c + 1j * x * x
        return 2.0 * x * (_laplace_tail(p, m) * scaled.mgf(p)).real

    # beyond x_max the exp(-sqrt(2) x) decay beats the x^(m-1) prefactor by far
    x_max = 40.0 + 4.0 * m
    edges = np.linspace(0.0, x_max, 9)
    total = 0.0
    err = 0.0
    for lo, hi in zip(edges[:-1], edges[1:]):
        val, e = _quad(integrand, lo, hi, limit=200, epsabs=tol, epsrel=1e-12)
        total += val
        err += e
    return total / math.pi, err / math.pi


def per_bit_error_probs(
    config: SystemConfig,
    moments: DesiredLinkMoments,
    istats: InterferenceLinkStats,
    threshold: float,
    return_error: bool = False,
):
    """Unconditional (false alarm, miss) probabilities by Bromwich inversion."""
    s0, s1 = _bit_variances(config)
    m = config.samples_per_symbol
    e0, err0 = expected_tail(_variance_law(s0, moments, istats, config.noise_floor), threshold, m)
    e1, err1 = expected_tail(_variance_law(s1, moments, istats, config.noise_floor), threshold, m)
    p_fa = min(1.0, max(0.0, e0))
    p_miss = min(1.0, max(0.0, 1.0 - e1))
    return (p_fa, p_miss, err0 + err1) if return_error else (p_fa, p_miss)


def ber_per_repetition_inversion(
    config: SystemConfig,
    moments: DesiredLinkMoments,
    istats: InterferenceLinkStats,
    threshold: float,
    return_error: bool = False,
):
    s0, s1 = _bit_variances(config)
    if s0 == s1:
        return (0.5, 0.0) if return_error else 0.5
    p_fa, p_miss, err = per_bit_error_probs(config, moments, istats, threshold, return_error=True)
    ber = min(0.5, max(0.0, 0.5 * (p_fa + p_miss)))
    return (ber, 0.5 * err) if return_error else ber


# ------------------------------------------------------------------ bounds & combining

def ber_lower_bound(config: SystemConfig, moments: DesiredLinkMoments, istats: InterferenceLinkStats, threshold: float) -> float:
    """Replace every random gain by its mean in the conditional BER.

    Jensen's inequality makes this a lower bound only where Q(M, gamma_th / v)
    is convex in v, which holds around the operating threshold but not for
    thresholds far from it.
    """
    s0, s1 = _bit_variances(config)
    agg = aggregate_noise(config, istats)
    return ber_conditional(s0 * moments.mean + agg, s1 * moments.mean + agg, threshold, config.samples_per_symbol)


def combine_repetitions(per_rep, repetitions: int):
    """Majority-vote error probability over an odd number of independent repetitions."""
    if repetitions < 1 or repetitions % 2 == 0:
        raise ValueError("repetitions must be odd")
    p = np.asarray(per_rep, dtype=float)
    if np.any((p < 0) | (p > 1)):
        raise ValueError("probability must lie in [0, 1]")
    # binomial survival: P(X >= (R+1)/2) = I_p((R+1)/2, (R+1)/2)
    half = (repetitions + 1) // 2
    out = special.betainc(half, repetitions - half + 1, p)
    return float(out) if out.ndim == 0 else out


def combine_repetitions_per_bit(p_false_alarm, p_miss, repetitions: int):
    """Majority-vote BER when bit 0 and bit 1 are voted on separately.

    Equals :func:`combine_repetitions` of the mean only for R = 1 or equal
    error types; otherwise it is larger, since the vote tail is convex in p.
    """
    return 0.5 * (combine_repetitions(p_false_alarm, repetitions) + combine_repetitions(p_miss, repetitions))


def threshold_conditional_optimal(variance_bit0: float, variance_bit1: float, samples: int) -> float:
    """Stationary point of the conditional BER in gamma_th."""
    if variance_bit1 == variance_bit0:
        raise ZeroDivisionError("threshold undefined for equal bit variances")
    if not variance_bit1 > variance_bit0 > 0:
        raise ValueError("need variance_bit1 > variance_bit0 > 0")
    v0, v1 = variance_bit0, variance_bit1
    return samples * v0 * v1 / (v1 - v0) * math.log(v1 / v0)


def threshold_average_approx(config: SystemConfig, moments: DesiredLinkMoments, istats: InterferenceLinkStats) -> float:
    """Conditional optimum with the random variances replaced by their means."""
    ratio = config.noise_source.resistance_ratio
    if ratio <= 1:
        raise ZeroDivisionError("resistance ratio C must exceed 1")
    if moments.mean <= 0:
        raise ValueError("desired gain mean must be positive")
    s0 = config.noise_source.sigma0_sq
    agg = aggregate_noise(config, istats)
    v0 = s0 * moments.mean + agg
    v1 = ratio * s0 * moments.mean + agg
    return config.samples_per_symbol * v0 * v1 * math.log(v1 / v0) / (s0 * moments.mean * (ratio - 1.0))


def ber_asymptotic() -> float:
    return 0.5


# ------------------------------------------------------------------ dispatch

def ber_per_repetition(config, moments, istats, threshold, method: str = "auto", order: int = 30):
    """(BER, error estimate) through the named route; ``auto`` means inversion."""
    if method in ("auto", "inversion"):
        return ber_per_repetition_inversion(config, moments, istats, threshold, return_error=True)
    if method in ("exact", "exact_integral"):
        return ber_per_repetition_exact(config, moments, istats, threshold, return_error=True)
    if method == "laguerre":
        return ber_per_repetition_laguerre(config, moments, istats, threshold, gauss_laguerre(order)), 0.0
    if method == "lower_bound":
        return ber_lower_bound(config, moments, istats, threshold), 0.0
    raise ValueError(f"unknown BER method {method!r}; choose from {', '.join(METHODS)}")


def ber_report(config, moments, istats, threshold=None, method: str = "auto", order: int = 30) -> BerReport:
    if threshold is None:
        threshold = config.threshold_override or threshold_average_approx(config, moments, istats)
    resolved = "inversion" if method == "auto" else ("exact_integral" if method == "exact" else method)
    per_bit = None
    s0, s1 = _bit_variances(config)
    if resolved == "inversion" and s0 != s1:
        p_fa, p_miss, err = per_bit_error_probs(config, moments, istats, threshold, return_error=True)
        per_rep, err = min(0.5, max(0.0, 0.5 * (p_fa + p_miss))), 0.5 * err
        per_bit = combine_repetitions_per_bit(p_fa, p_miss, config.repetitions)
    else:
        per_rep, err = ber_per_repetition(config, moments, istats, threshold, method, order)
    return BerReport(
        per_rep_ber=per_rep,
        combined_ber=combine_repetitions(per_rep, config.repetitions),
        method=resolved,
        threshold_used=threshold,
        quadrature_order=order if method == "laguerre" else None,
        error_estimate=err,
        combined_ber_per_bit=per_bit,
    )
