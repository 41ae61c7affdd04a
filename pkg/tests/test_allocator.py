import dataclasses
import math

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from zeroris import LinearEh, NonLinearEh, SystemConfig, energy
from zeroris.allocator import (
    FEASIBILITY_TOL,
    allocate,
    allocate_binary,
    allocate_closed_form,
    allocate_exhaustive,
    allocate_random,
)


def _feasible_config(n: int, k: int = 4, power: float = 1000.0) -> SystemConfig:
    return SystemConfig().with_interferers(k, power=power).with_n1(n // 2, n)


class TestBinary:
    @pytest.mark.parametrize("n", [300, 500])
    def test_evaluation_count_default_scenario(self, n):
        res = allocate_binary(SystemConfig().with_n1(n // 2, n))
        assert res.ecsr_evaluations == 11
        assert res.ecsr_evaluations == math.ceil(math.log2(n)) + 2

    def test_infeasible_returns_single_reflector(self):
        res = allocate_binary(SystemConfig().with_n1(150, 300))
        assert (res.n1_star, res.n2_star) == (299, 1)

    def test_feasible_everywhere(self):
        res = allocate_binary(SystemConfig(interferer_powers=(1e7,) * 4))
        assert res.n1_star == 1
        assert res.achieved_ecsr >= 1 - FEASIBILITY_TOL

    def test_minimality(self):
        cfg = _feasible_config(200)
        res = allocate_binary(cfg)
        assert res.n1_star + res.n2_star == 200 and res.n2_star >= 1
        assert res.achieved_ecsr >= 1 - FEASIBILITY_TOL
        assert energy.ecsr(cfg.with_n1(res.n1_star - 1)) < 1 - FEASIBILITY_TOL

    @given(st.integers(2, 700), st.floats(1.0, 1e5), st.integers(1, 6))
    @settings(max_examples=60, deadline=None)
    def test_count_bound(self, n, power, k):
        res = allocate_binary(_feasible_config(n, k, power))
        assert res.ecsr_evaluations <= math.ceil(math.log2(n)) + 2

    def test_no_interferers(self):
        cfg = SystemConfig()
        geo = dataclasses.replace(cfg.geometry, interferer_ris=(), interferer_rx=())
        with pytest.raises(ValueError, match="no interference power available"):
            allocate_binary(dataclasses.replace(cfg, geometry=geo, interferer_powers=()))


class TestExhaustive:
    @given(st.integers(2, 400), st.floats(1.0, 1e5), st.integers(1, 6), st.sampled_from(["leh", "nleh"]))
    @settings(max_examples=50, deadline=None)
    def test_agrees_with_binary(self, n, power, k, model):
        cfg = _feasible_config(n, k, power)
        if model == "nleh":
            cfg = dataclasses.replace(cfg, eh_model=NonLinearEh())
        b, e = allocate_binary(cfg), allocate_exhaustive(cfg)
        assert (b.n1_star, b.n2_star) == (e.n1_star, e.n2_star)
        assert e.ecsr_evaluations <= n - 1

    def test_infeasible_full_scan(self):
        res = allocate_exhaustive(SystemConfig().with_n1(150, 300))
        assert res.n1_star == 299
        assert res.ecsr_evaluations == 299

    def test_count_is_first_feasible_position(self):
        cfg = _feasible_config(300)
        res = allocate_exhaustive(cfg)
        first = next(n1 for n1 in range(1, 300) if energy.ecsr(cfg.with_n1(n1)) >= 1 - FEASIBILITY_TOL)
        assert res.n1_star == first
        assert res.ecsr_evaluations == first


class TestRandom:
    def test_deterministic(self):
        cfg = _feasible_config(300)
        assert allocate_random(cfg, 17) == allocate_random(cfg, 17)

    def test_two_elements(self):
        res = allocate_random(SystemConfig(interferer_powers=(1e7,) * 4).with_n1(1, 2), 0)
        assert res.ecsr_evaluations == 1

    def test_hit_is_feasible(self):
        cfg = _feasible_config(300)
        res = allocate_random(cfg, 5)
        assert res.achieved_ecsr >= 1 - FEASIBILITY_TOL
        assert res.n1_star >= allocate_binary(cfg).n1_star


class TestClosedForm:
    def test_hand_value(self):
        cfg = SystemConfig()
        denom = 0.9 * 0.1 * sum(d**-2 for d in (12, 14, 18, 20)) + 1e-3
        assert (200 * 1e-3 + 50e-3) / denom == pytest.approx(96.6, abs=0.1)
        assert allocate_closed_form(cfg) == 97

    def test_nonlinear_unsupported(self):
        with pytest.raises(NotImplementedError):
            allocate_closed_form(SystemConfig(eh_model=NonLinearEh()))

    def test_doubling_power(self):
        cfg = SystemConfig()
        doubled = dataclasses.replace(cfg, interferer_powers=tuple(2 * p for p in cfg.interferer_powers))
        assert allocate_closed_form(doubled) <= allocate_closed_form(cfg)

    @given(st.floats(0.001, 1.0), st.floats(5.0, 40.0))
    @settings(max_examples=50)
    def test_extra_interferer_never_increases(self, p, d):
        cfg = SystemConfig()
        more = cfg.with_interferers(5)
        more = dataclasses.replace(
            more,
            interferer_powers=cfg.interferer_powers + (p,),
            geometry=dataclasses.replace(more.geometry, interferer_ris=cfg.geometry.interferer_ris + (d,)),
        )
        assert allocate_closed_form(more) <= allocate_closed_form(cfg)

    @given(st.integers(20, 400), st.floats(50.0, 5e4), st.integers(1, 6), st.floats(0.3, 1.0))
    @settings(max_examples=50, deadline=None)
    def test_not_above_binary(self, n, power, k, eta):
        cfg = dataclasses.replace(_feasible_config(n, k, power), eh_model=LinearEh(eta))
        # only meaningful where a feasible split exists
        assume(energy.ecsr(cfg.with_n1(n - 1)) >= 1 - FEASIBILITY_TOL)
        assert allocate_closed_form(cfg) <= allocate_binary(cfg).n1_star


def test_dispatch():
    cfg = _feasible_config(100)
    assert allocate(cfg, "binary").method == "binary"
    assert allocate(cfg, "closed_form").ecsr_evaluations == 0
    with pytest.raises(ValueError):
        allocate(cfg, "genetic")
