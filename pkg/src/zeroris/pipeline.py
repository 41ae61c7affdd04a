"""End-to-end analytic evaluation of one scenario."""

from __future__ import annotations

from dataclasses import dataclass

from . import detection, energy, infometrics
from .linkstats import desired_moments, interference_stats
from .sysmodel import SystemConfig


@dataclass(frozen=True)
class PerformanceReport:
    ecsr: float
    per_rep_ber: float
    combined_ber: float
    threshold: float
    mi: float
    mi_unclamped: float
    ee: float
    method: str
    error_estimate: float = 0.0
    combined_ber_per_bit: float | None = None
    # filled only by Monte Carlo runs
    ecsr_std_error: float | None = None
    ber_std_error: float | None = None
    mi_std_error: float | None = None


def scenario_ecsr(config: SystemConfig) -> float:
    """Configured override, else the analytic success rate (0 without interferers)."""
    if config.ecsr_override is not None:
        return config.ecsr_override
    if config.num_interferers == 0:
        return 1.0 if energy.energy_budget(config).consumption_power <= 0 else 0.0
    return energy.ecsr(config)


def evaluate(config: SystemConfig, method: str = "auto", conventional: bool = False) -> PerformanceReport:
    ecsr = scenario_ecsr(config)
    moments = desired_moments(config, ecsr)
    istats = interference_stats(config)
    ber = detection.ber_report(config, moments, istats, method=method)
    raw = infometrics.mutual_information_raw(config, moments, istats)
    mi = max(0.0, raw)
    return PerformanceReport(
        ecsr=ecsr,
        per_rep_ber=ber.per_rep_ber,
        combined_ber=ber.combined_ber,
        threshold=ber.threshold_used,
        mi=mi,
        mi_unclamped=raw,
        ee=infometrics.energy_efficiency(config, mi, conventional),
        method=ber.method,
        error_estimate=ber.error_estimate,
        combined_ber_per_bit=ber.combined_ber_per_bit,
    )
