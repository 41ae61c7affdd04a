"""Splitting RIS elements between harvesting and reflection.

The goal is the smallest N1 whose success rate reaches 1. Since the success
rate is monotone in N1, a bisection finds it; exhaustive and random scans are
kept as evaluation-count baselines.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import energy
from .energy import LinearEh
from .sysmodel import SystemConfig

FEASIBILITY_TOL = 1e-9


@dataclass(frozen=True)
class AllocationResult:
    n1_star: int
    n2_star: int
    achieved_ecsr: float
    ecsr_evaluations: int
    method: str


@lru_cache(maxsize=65536)
def _ecsr_at(config: SystemConfig, n1: int) -> float:
    return energy.ecsr(config.with_n1(n1))


class _CountingOracle:
    def __init__(self, config: SystemConfig, tol: float):
        if config.num_interferers == 0:
            raise ValueError("no interference power available")
        self.config = config
        self.tol = tol
        self.calls = 0

    def __call__(self, n1: int) -> float:
        self.calls += 1
        return _ecsr_at(self.config, n1)

    def feasible(self, value: float) -> bool:
        return value >= 1.0 - self.tol


def _result(oracle: _CountingOracle, n1: int, value: float | None, method: str) -> AllocationResult:
    n = oracle.config.ris.total_elements
    if value is None:
        value = _ecsr_at(oracle.config, n1)
    return AllocationResult(n1, n - n1, value, oracle.calls, method)


def allocate_binary(config: SystemConfig, tol: float = FEASIBILITY_TOL) -> AllocationResult:
    """Bisection with the indicator-adjusted bound updates.

    A feasible midpoint pulls the upper bound down to the midpoint itself
    (one further if it already was the upper bound); an infeasible one pushes
    the lower bound up likewise. Reaching N1 = N-1 infeasible ends the search
    with a single reflecting element.
    """
    oracle = _CountingOracle(config, tol)
    n = config.ris.total_elements
    if n < 2:
        raise ValueError("need at least two elements")
    lo, hi = 1, n - 1
    best: tuple[int, float] | None = None
    while lo <= hi:
        mid = (lo + hi) // 2
        value = oracle(mid)
        if oracle.feasible(value):
            best = (mid, value)
            hi = mid - (mid == hi)
        elif mid == n - 1:
            return _result(oracle, n - 1, value, "binary")
        else:
            lo = mid + (mid == lo)
    if best is None:
        return _result(oracle, n - 1, None, "binary")
    return _result(oracle, best[0], best[1], "binary")


def allocate_exhaustive(config: SystemConfig, tol: float = FEASIBILITY_TOL) -> AllocationResult:
    oracle = _CountingOracle(config, tol)
    n = config.ris.total_elements
    value = None
    for n1 in range(1, n):
        value = oracle(n1)
        if oracle.feasible(value):
            return _result(oracle, n1, value, "exhaustive")
    return _result(oracle, n - 1, value, "exhaustive")


def allocate_random(config: SystemConfig, seed: int, tol: float = FEASIBILITY_TOL) -> AllocationResult:
    """First feasible split in a seeded random order of 1..N-1 (not necessarily minimal)."""
    oracle = _CountingOracle(config, tol)
    n = config.ris.total_elements
    order = np.random.default_rng(seed).permutation(np.arange(1, n))
    for n1 in order:
        value = oracle(int(n1))
        if oracle.feasible(value):
            return _result(oracle, int(n1), value, "random")
    return _result(oracle, n - 1, None, "random")


def allocate_closed_form(config: SystemConfig) -> int:
    """Average-energy estimate ceil((N E + E_con) / (eta sum_k P_k d_k^-a + E)).

    Only defined for the linear harvester; typically at or below the
    bisection answer because it ignores the spread of the harvested power.
    """
    model = config.eh_model
    if not isinstance(model, LinearEh):
        raise NotImplementedError("closed-form allocation needs the linear harvesting model")
    ris = config.ris
    gain = float(energy.interferer_harvest_gains(config).sum())
    ratio = (ris.total_elements * ris.element_power + ris.controller_power) / (model.efficiency * gain + ris.element_power)
    return int(math.ceil(ratio))


def allocate(config: SystemConfig, method: str = "binary", seed: int = 0) -> AllocationResult:
    if method == "binary":
        return allocate_binary(config)
    if method == "exhaustive":
        return allocate_exhaustive(config)
    if method == "random":
        return allocate_random(config, seed)
    if method == "closed_form":
        n1 = allocate_closed_form(config)
        n = config.ris.total_elements
        clipped = min(max(n1, 1), n - 1)
        return AllocationResult(n1, n - n1, _ecsr_at(config, clipped), 0, "closed_form")
    raise ValueError(f"unknown allocation method {method!r}")
