"""Harvested energy, RIS consumption and the energy constraint success rate.

The aggregate harvested power over K interferers is a weighted sum of
exponentials. It is modelled by a moment-matched gamma law, so the success
rate in both harvesting models reduces to a regularized upper incomplete
gamma evaluated at the power the harvester must collect.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import TYPE_CHECKING, Union

import numpy as np

from .specfun import regularized_upper_gamma

if TYPE_CHECKING:
    from .sysmodel import SystemConfig

_UNIT_SCALE = {"W": 1.0, "mW": 1e-3}


@dataclass(frozen=True)
class LinearEh:
    """Constant conversion efficiency: E_H = t * efficiency * P_H."""

    efficiency: float = 0.9

    def output_power(self, harvested):
        return self.efficiency * np.asarray(harvested, dtype=float)

    def required_input(self, demand: float) -> float:
        return demand / self.efficiency


@dataclass(frozen=True)
class NonLinearEh:
    """Saturating curve-fit harvester, (a1 P + a2) / (P + a3) - a2 / a3.

    ``unit`` names the power unit the curve-fit constants are expressed in;
    inputs and outputs of the methods stay in watts.
    """

    a1: float = 2.463
    a2: float = 1.635
    a3: float = 0.826
    unit: str = "W"

    @property
    def scale(self) -> float:
        return _UNIT_SCALE[self.unit]

    @property
    def ceiling(self) -> float:
        """Output power approached as the input power grows without bound (W)."""
        return (self.a1 - self.a2 / self.a3) * self.scale

    def output_power(self, harvested):
        p = np.asarray(harvested, dtype=float) / self.scale
        return ((self.a1 * p + self.a2) / (p + self.a3) - self.a2 / self.a3) * self.scale

    def required_input(self, demand: float) -> float:
        """Input power needed to deliver ``demand`` watts; inf past the ceiling."""
        c = demand / self.scale
        denom = self.a1 * self.a3 - self.a3 * c - self.a2
        if denom <= 0.0:
            return math.inf
        return self.a3**2 * c / denom * self.scale


EhModel = Union[LinearEh, NonLinearEh]


@dataclass(frozen=True)
class GammaShapeRate:
    shape: float
    rate: float

    @property
    def mean(self) -> float:
        return self.shape / self.rate

    @property
    def variance(self) -> float:
        return self.shape / self.rate**2


@dataclass(frozen=True)
class EnergyBudget:
    """RIS power draw while reflecting: N2 elements plus controller and EH circuit."""

    consumption_power: float
    slot_duration: float = 1.0

    @property
    def energy(self) -> float:
        return self.slot_duration * self.consumption_power


def interferer_harvest_gains(config: SystemConfig) -> np.ndarray:
    """P_k (d1^(k))^-a for each interferer, before the N1 array factor."""
    geo = config.geometry
    d = np.asarray(geo.interferer_ris, dtype=float)
    return np.asarray(config.interferer_powers, dtype=float) * d ** (-geo.pathloss_exponent)


def harvested_power_moments(config: SystemConfig) -> tuple[float, float]:
    """Mean and variance of P_H for the configured N1."""
    n1 = config.ris.eh_elements
    terms = interferer_harvest_gains(config) * n1
    return float(terms.sum()), float((terms**2).sum())


def aggregate_power_model(config: SystemConfig) -> GammaShapeRate:
    if config.num_interferers == 0:
        raise ValueError("no interference power available")
    if config.ris.eh_elements < 1:
        raise ValueError("at least one harvesting element required")
    mean, var = harvested_power_moments(config)
    if mean <= 0.0:
        raise ValueError("no interference power available")
    return GammaShapeRate(shape=mean**2 / var, rate=mean / var)


def energy_budget(config: SystemConfig) -> EnergyBudget:
    ris = config.ris
    power = ris.reflect_elements * ris.element_power + ris.controller_power
    return EnergyBudget(consumption_power=power, slot_duration=ris.slot_duration)


def _success_rate(gamma: GammaShapeRate, required_power: float) -> float:
    if math.isinf(required_power):
        return 0.0
    return regularized_upper_gamma(gamma.shape, gamma.rate * max(required_power, 0.0))


def ecsr_linear(model: LinearEh, gamma: GammaShapeRate, budget: EnergyBudget) -> float:
    if model.efficiency <= 0.0:
        return 0.0
    return _success_rate(gamma, model.required_input(budget.consumption_power))


def ecsr_nonlinear(model: NonLinearEh, gamma: GammaShapeRate, budget: EnergyBudget) -> float:
    # past the ceiling the closed form has a nonpositive denominator; no P_H suffices
    if budget.consumption_power >= model.ceiling:
        return 0.0
    return _success_rate(gamma, model.required_input(budget.consumption_power))


def ecsr(config: SystemConfig) -> float:
    """Energy constraint success rate of ``config`` under its harvesting model."""
    gamma = aggregate_power_model(config)
    budget = energy_budget(config)
    model = config.eh_model
    if isinstance(model, LinearEh):
        return ecsr_linear(model, gamma, budget)
    return ecsr_nonlinear(model, gamma, budget)


def ecsr_asymptotic() -> float:
    """Limit of the success rate as the interference power or count grows.

    Holds for the linear model and for the nonlinear model below its output
    ceiling; above the ceiling the success rate is 0 at any interference level.
    """
    return 1.0
