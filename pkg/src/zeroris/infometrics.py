"""Mutual information under the Gaussian (second-order Taylor) approximation, and energy efficiency.

Given the channel, the received sample is CN(0, v_chi) with
v_chi = sigma_chi^2 D + sum_k P_k I_k + N0, so

    I = 1/2 E[ln v0 + ln v1] - E[ln(sum_k P_k I_k + N0)]

in nats per sample (the pi e factors cancel). Each expectation of a log is
expanded to second order about its mean.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .linkstats import DesiredLinkMoments, InterferenceLinkStats, aggregate_noise, desired_moments, interference_stats
from .sysmodel import SystemConfig


@dataclass(frozen=True)
class InfoReport:
    mi_per_sample: float
    mi_per_symbol: float
    ee: float
    total_power: float
    aggregate_noise: float
    mi_unclamped: float


def mutual_information_raw(config: SystemConfig, moments: DesiredLinkMoments, istats: InterferenceLinkStats) -> float:
    """Taylor-approximated MI per sample in nats, without clamping (may dip below 0)."""
    ns = config.noise_source
    agg = aggregate_noise(config, istats)
    interf_var = istats.power_variance
    mu, var_d = moments.mean, moments.variance
    value = 0.5 * (math.log1p(ns.sigma0_sq * mu / agg) + math.log1p(ns.sigma1_sq * mu / agg))
    value += interf_var / (2.0 * agg * agg)
    for s2 in (ns.sigma0_sq, ns.sigma1_sq):
        value -= (s2 * s2 * var_d + interf_var) / (4.0 * (s2 * mu + agg) ** 2)
    return value


def mutual_information(config: SystemConfig, moments: DesiredLinkMoments, istats: InterferenceLinkStats) -> float:
    """MI per sample in nats, clamped at zero."""
    return max(0.0, mutual_information_raw(config, moments, istats))


def energy_efficiency(config: SystemConfig, mi_per_sample: float, conventional: bool = False) -> float:
    """Bits per joule: I / (ln 2 * (P_Tx + P_Rx)).

    ``conventional`` charges the transmitter the mean noise-source power
    (sigma0^2 + sigma1^2) / 2 instead of the configured P_Tx.
    """
    total = total_power(config, conventional)
    if total <= 0:
        raise ValueError("total power must be positive")
    return mi_per_sample / (math.log(2.0) * total)


def total_power(config: SystemConfig, conventional: bool = False) -> float:
    if conventional:
        ns = config.noise_source
        tx = 0.5 * (ns.sigma0_sq + ns.sigma1_sq)
    else:
        tx = config.tx_power
    return tx + config.rx_power


def info_report(config: SystemConfig, ecsr: float, conventional: bool = False) -> InfoReport:
    moments = desired_moments(config, ecsr)
    istats = interference_stats(config)
    raw = mutual_information_raw(config, moments, istats)
    mi = max(0.0, raw)
    return InfoReport(
        mi_per_sample=mi,
        mi_per_symbol=config.samples_per_symbol * mi,
        ee=energy_efficiency(config, mi, conventional),
        total_power=total_power(config, conventional),
        aggregate_noise=aggregate_noise(config, istats),
        mi_unclamped=raw,
    )


def mc_entropy_oracle(config: SystemConfig, trials: int, seed, ecsr: float | None = None, workers: int | None = None):
    """Monte Carlo average of the pre-expansion log terms over sampled channels.

    Returns a :class:`~zeroris.montecarlo.McEstimate` in nats per sample.
    ``ecsr`` defaults to the analytic success rate of ``config``.
    """
    from . import energy
    from .montecarlo import entropy_gap_estimate

    if ecsr is None:
        ecsr = config.ecsr_override if config.ecsr_override is not None else _safe_ecsr(config, energy)
    return entropy_gap_estimate(config, ecsr, trials, seed, workers=workers)


def _safe_ecsr(config, energy_mod) -> float:
    if config.num_interferers == 0:
        return 0.0
    return energy_mod.ecsr(config)


def info_asymptotics() -> tuple[float, float]:
    """MI and EE as interference power grows without bound."""
    return 0.0, 0.0
