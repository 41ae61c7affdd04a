"""Moments of the composite desired gain and of the interference gains.

The desired gain is D = D_R^2 + D_I^2 with

    D_R = L_d |h_d| + L_B sum_{beamforming} |h||g| cos(phi) + L_B sum_{blind} h^R g^R
    D_I =             L_B sum_{beamforming} |h||g| sin(phi) + L_B sum_{blind} h^I g^I

where the number of beamforming elements is Binomial(N2, Ps). D is then
approximated by a gamma law with matched mean and variance.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .specfun import laguerre_half_moments
from .sysmodel import SystemConfig


@dataclass(frozen=True)
class ElementMoments:
    """Per-element moments for a Q-level phase quantizer.

    A = |h||g| cos(phi), B = |h||g| sin(phi) with phi ~ U(-pi/Q, pi/Q), and
    the blind-element product h^R g^R of two N(0, 1/2) variables.
    """

    levels: float

    @property
    def mean_a(self) -> float:
        q = self.levels
        return q * math.sin(math.pi / q) / 4.0 if math.isfinite(q) else math.pi / 4.0

    @property
    def var_a(self) -> float:
        q = self.levels
        if not math.isfinite(q):
            return 1.0 - math.pi**2 / 16.0
        return 0.5 + q * math.sin(2 * math.pi / q) / (4 * math.pi) - (q * math.sin(math.pi / q)) ** 2 / 16.0

    @property
    def mean_b(self) -> float:
        return 0.0

    @property
    def var_b(self) -> float:
        q = self.levels
        if not math.isfinite(q):
            return 0.0
        return 0.5 - q * math.sin(2 * math.pi / q) / (4 * math.pi)

    blind_mean: float = 0.0
    blind_var: float = 0.25


def compound_moments(count: int, prob: float, mean: float, var: float) -> tuple[float, float]:
    """Mean and variance of sum_{i=1}^{X} Y_i with X ~ Binomial(count, prob).

    E = E[X] E[Y]; V = E[X] V[Y] + V[X] E[Y]^2.
    """
    ex = count * prob
    vx = count * prob * (1.0 - prob)
    return ex * mean, ex * var + vx * mean * mean


@dataclass(frozen=True)
class DesiredLinkMoments:
    mean: float
    variance: float
    ecsr_used: float
    components: dict = field(default_factory=dict)

    @property
    def gamma_shape(self) -> float:
        return self.mean**2 / self.variance

    @property
    def gamma_scale(self) -> float:
        return self.variance / self.mean


def desired_moments_from_parts(
    direct_loss: float,
    cascade_loss: float,
    n2: int,
    ecsr: float,
    levels: float,
    direct_mean: float = 1.0,
) -> DesiredLinkMoments:
    """Build mu_D and sigma_D^2 from path losses and the element count.

    ``levels`` may be ``math.inf`` for continuous (unquantized) phases.
    """
    if not 0.0 <= ecsr <= 1.0:
        raise ValueError("ecsr must lie in [0, 1]")
    el = ElementMoments(levels)
    env_mean, env_var = laguerre_half_moments(direct_mean**2)

    g1 = compound_moments(n2, ecsr, el.mean_a, el.var_a)
    g3 = compound_moments(n2, ecsr, el.mean_b, el.var_b)
    g2 = compound_moments(n2, 1.0 - ecsr, el.blind_mean, el.blind_var)
    g4 = g2

    lb2 = cascade_loss**2
    e_r = direct_loss * env_mean + cascade_loss * (g1[0] + g2[0])
    v_r = direct_loss**2 * env_var + lb2 * (g1[1] + g2[1])
    e_i = cascade_loss * (g3[0] + g4[0])
    v_i = lb2 * (g3[1] + g4[1])

    # E[D_I] = 0 exactly, so the cross term of the imaginary part drops
    mean = v_r + v_i + e_r * e_r
    variance = 2.0 * v_r * (v_r + 2.0 * e_r * e_r) + 2.0 * v_i * v_i
    comps = {
        "mean_real": e_r,
        "var_real": v_r,
        "mean_imag": e_i,
        "var_imag": v_i,
        "g1": g1,
        "g2": g2,
        "g3": g3,
        "g4": g4,
        "envelope": (env_mean, env_var),
    }
    return DesiredLinkMoments(mean=mean, variance=variance, ecsr_used=ecsr, components=comps)


def desired_moments(config: SystemConfig, ecsr: float) -> DesiredLinkMoments:
    """Moments of D for ``config`` with beamforming probability ``ecsr``."""
    geo = config.geometry
    n2 = config.ris.reflect_elements if config.ris_link else 0
    return desired_moments_from_parts(
        direct_loss=geo.direct_loss,
        cascade_loss=geo.cascade_loss,
        n2=n2,
        ecsr=ecsr,
        levels=config.ris.levels,
        direct_mean=geo.direct_link_mean,
    )


@dataclass(frozen=True)
class InterferenceLinkStats:
    per_interferer_variance: np.ndarray
    powers: np.ndarray

    @property
    def mean_power(self) -> float:
        """Sum_k P_k sigma_Fk^2, the average interference power at the Rx."""
        return float(np.dot(self.powers, self.per_interferer_variance))

    @property
    def power_variance(self) -> float:
        """Sum_k P_k^2 sigma_Fk^4."""
        return float(np.sum((self.powers * self.per_interferer_variance) ** 2))


def interference_stats(config: SystemConfig, reflect_elements: int | None = None) -> InterferenceLinkStats:
    """Variance (L_D^k)^2 + (L_B^k)^2 N2 of each Gaussian interference gain."""
    geo = config.geometry
    if reflect_elements is None:
        reflect_elements = config.ris.reflect_elements if config.ris_link else 0
    direct = geo.interferer_direct_loss
    cascade = geo.interferer_cascade_loss
    var = direct**2 + cascade**2 * reflect_elements
    return InterferenceLinkStats(
        per_interferer_variance=var,
        powers=np.asarray(config.interferer_powers, dtype=float),
    )


def aggregate_noise(config: SystemConfig, istats: InterferenceLinkStats) -> float:
    """Sum_k P_k sigma_Fk^2 + N0."""
    return istats.mean_power + config.noise_floor


def mgf_desired(moments: DesiredLinkMoments, bit_variance: float, s, threshold: float):
    """E[exp(-s sigma_chi^2 D / gamma_th)] under the matched gamma law."""
    s = np.asarray(s, dtype=float)
    if moments.variance <= 0.0:
        out = np.exp(-s * bit_variance * moments.mean / threshold)
    else:
        scale = bit_variance * moments.gamma_scale / threshold
        out = np.exp(-moments.gamma_shape * np.log1p(s * scale))
    return float(out) if out.ndim == 0 else out


def mgf_interference(stats: InterferenceLinkStats, k: int, s, threshold: float, power: float | None = None):
    """E[exp(-s P_k I_k / gamma_th)] for exponential I_k."""
    p = stats.powers[k] if power is None else power
    out = 1.0 / (1.0 + np.asarray(s, dtype=float) * p * stats.per_interferer_variance[k] / threshold)
    return float(out) if out.ndim == 0 else out


def mgf_interference_total(stats: InterferenceLinkStats, s, threshold: float):
    """Product of the K interference MGFs; 1 when K = 0."""
    s = np.asarray(s, dtype=float)
    b = stats.powers * stats.per_interferer_variance / threshold
    out = np.prod(1.0 / (1.0 + np.multiply.outer(s, b)), axis=-1)
    return float(out) if np.ndim(out) == 0 else out
