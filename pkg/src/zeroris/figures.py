"""Named sweep recipes, one per results figure, each returning a CSV-ready table.

Every recipe runs from defaults with no arguments; keyword arguments narrow
or refine its grid (tests use coarse grids).
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import optimize

from . import allocator, detection
from .energy import LinearEh, NonLinearEh
from .linkstats import desired_moments, interference_stats
from .pipeline import evaluate, scenario_ecsr
from .sysmodel import NoiseSource, SystemConfig, dbm_to_watt, range_geometry


@dataclass(frozen=True)
class Table:
    columns: tuple[str, ...]
    rows: list[tuple]

    def column(self, name: str) -> list:
        i = self.columns.index(name)
        return [r[i] for r in self.rows]

    def where(self, **match) -> Table:
        idx = {k: self.columns.index(k) for k in match}
        rows = [r for r in self.rows if all(r[i] == match[k] for k, i in idx.items())]
        return Table(self.columns, rows)


@dataclass(frozen=True)
class FigureRecipe:
    name: str
    description: str
    build: Callable[..., Table]
    base_config: Callable[[], SystemConfig] = SystemConfig
    overrides: tuple[tuple[str, str], ...] = ()

    def run(self, base: SystemConfig | None = None, **kw) -> Table:
        return self.build(base if base is not None else self.base_config(), **kw)


def _db(x: float) -> float:
    return 10.0 * math.log10(x)


# ------------------------------------------------------------------ RE allocation (N = 200)

def fig_ecsr_vs_n1(base: SystemConfig, k_values=(2, 4), n1_values=range(10, 195, 5)) -> Table:
    rows = []
    for k in k_values:
        cfg_k = base.with_interferers(k)
        for n1 in n1_values:
            rows.append((k, n1, scenario_ecsr(cfg_k.with_n1(n1))))
    return Table(("K", "N1", "ecsr"), rows)


def _phase_variants(config: SystemConfig):
    yield "quantized", config
    yield "ideal", dataclasses.replace(config, ris=dataclasses.replace(config.ris, ideal_phase=True))


def fig_ber_vs_n1(base: SystemConfig, k_values=(2, 4), n1_values=range(10, 195, 5), method: str = "auto") -> Table:
    rows = []
    for k in k_values:
        for phase, cfg in _phase_variants(base.with_interferers(k)):
            for n1 in n1_values:
                r = evaluate(cfg.with_n1(n1), method=method)
                rows.append((k, phase, n1, r.ecsr, r.per_rep_ber, r.combined_ber))
    return Table(("K", "phase", "N1", "ecsr", "per_rep_ber", "combined_ber"), rows)


def fig_mi_vs_n1(base: SystemConfig, k_values=(2, 4), n1_values=range(10, 195, 5)) -> Table:
    rows = []
    for k in k_values:
        for phase, cfg in _phase_variants(base.with_interferers(k)):
            for n1 in n1_values:
                r = evaluate(cfg.with_n1(n1))
                rows.append((k, phase, n1, r.ecsr, r.mi, r.mi_unclamped))
    return Table(("K", "phase", "N1", "ecsr", "mi_nats", "mi_unclamped"), rows)


# ------------------------------------------------------------------ repetition coding

def repetition_config(base: SystemConfig, snr_db: float, inr_db: float = 5.0) -> SystemConfig:
    """N2 = 50 of N = 200, ECSR pinned at 0.9, three interferers, M = 3, powers set relative to N0."""
    n0 = base.noise_floor
    ns = NoiseSource.from_variance(n0 * 10 ** (snr_db / 10), base.noise_source.resistance_ratio)
    cfg = dataclasses.replace(base, noise_source=ns, samples_per_symbol=3, ecsr_override=0.9)
    return cfg.with_interferers(3, power=n0 * 10 ** (inr_db / 10)).with_n1(150, 200)


def fig_ber_vs_snr_reps(base: SystemConfig, snr_db=tuple(range(-15, 6)), repetitions=(1, 3, 5)) -> Table:
    """``combined_ber`` votes on the averaged per-repetition BER; ``combined_ber_per_bit`` votes per bit value."""
    rows = []
    for snr in snr_db:
        cfg = repetition_config(base, snr)
        moments = desired_moments(cfg, cfg.ecsr_override)
        istats = interference_stats(cfg)
        threshold = detection.threshold_average_approx(cfg, moments, istats)
        p_fa, p_miss = detection.per_bit_error_probs(cfg, moments, istats, threshold)
        per_rep = 0.5 * (p_fa + p_miss)
        for r in repetitions:
            rows.append((r, snr, per_rep, detection.combine_repetitions(per_rep, r),
                         detection.combine_repetitions_per_bit(p_fa, p_miss, r)))
    return Table(("R", "snr_db", "per_rep_ber", "combined_ber", "combined_ber_per_bit"), rows)


# ------------------------------------------------------------------ threshold

THRESHOLD_CASES = ((4, 20), (8, 20), (8, 40))


def threshold_config(base: SystemConfig, m: int, n2: int, snr_db: float = 1.0, inr_db: float = 5.0) -> SystemConfig:
    n0 = base.noise_floor
    ns = NoiseSource.from_variance(n0 * 10 ** (snr_db / 10), base.noise_source.resistance_ratio)
    cfg = dataclasses.replace(base, noise_source=ns, samples_per_symbol=m, repetitions=3, ecsr_override=0.5)
    n = base.ris.total_elements
    return cfg.with_interferers(3, power=n0 * 10 ** (inr_db / 10)).with_n1(n - n2, n)


def threshold_curve(config: SystemConfig, span_db: float = 30.0, points: int = 61):
    """(approximate threshold, grid, exact per-repetition BER, lower bound) around the approximation."""
    moments = desired_moments(config, config.ecsr_override)
    istats = interference_stats(config)
    approx = detection.threshold_average_approx(config, moments, istats)
    grid = approx * 10 ** (np.linspace(-span_db, span_db, points) / 10)
    ber = np.array([detection.ber_per_repetition(config, moments, istats, g)[0] for g in grid])
    lower = np.array([detection.ber_lower_bound(config, moments, istats, g) for g in grid])
    return approx, grid, ber, lower


def fig_ber_vs_threshold(base: SystemConfig, cases=THRESHOLD_CASES, span_db: float = 30.0, points: int = 61) -> Table:
    """Thresholds in dB relative to N0."""
    rows = []
    n0 = base.noise_floor
    for m, n2 in cases:
        cfg = threshold_config(base, m, n2)
        approx, grid, ber, lower = threshold_curve(cfg, span_db, points)
        for g, b, lb in zip(grid, ber, lower):
            rows.append((m, n2, "grid", _db(g / n0), float(b), float(lb)))
        moments = desired_moments(cfg, cfg.ecsr_override)
        istats = interference_stats(cfg)
        b_approx = detection.ber_per_repetition(cfg, moments, istats, approx)[0]
        rows.append((m, n2, "approx", _db(approx / n0), b_approx, detection.ber_lower_bound(cfg, moments, istats, approx)))
    return Table(("M", "N2", "kind", "threshold_db", "per_rep_ber", "lower_bound"), rows)


# ------------------------------------------------------------------ energy efficiency

def ee_config(base: SystemConfig, sigma0_dbm: float, model) -> SystemConfig:
    ns = NoiseSource.from_variance(dbm_to_watt(sigma0_dbm), base.noise_source.resistance_ratio)
    cfg = dataclasses.replace(base, noise_source=ns, eh_model=model)
    return cfg.with_interferers(3).with_n1(base.ris.total_elements - 50)


def fig_ee_models(base: SystemConfig, sigma0_dbm=tuple(range(-10, 31, 2)), efficiency: float = 0.5) -> Table:
    """EE of LEH and NLEH against a conventional RIS (always beamforming, active Tx)."""
    rows = []
    for s in sigma0_dbm:
        for label, model in (("leh", LinearEh(efficiency)), ("nleh", NonLinearEh())):
            r = evaluate(ee_config(base, s, model))
            rows.append((label, s, r.ecsr, r.mi, r.ee))
        conv = dataclasses.replace(ee_config(base, s, LinearEh(efficiency)), ecsr_override=1.0)
        r = evaluate(conv, conventional=True)
        rows.append(("conventional", s, r.ecsr, r.mi, r.ee))
    return Table(("model", "sigma0_dbm", "ecsr", "mi_nats", "ee_bit_per_j"), rows)


# ------------------------------------------------------------------ LEH vs NLEH allocation

def lnl_models(efficiencies=(0.5, 0.75, 1.0)):
    models = [("leh", eta, LinearEh(eta)) for eta in efficiencies]
    models.append(("nleh", float("nan"), NonLinearEh()))
    return models


def fig_lnl_comparison(base: SystemConfig, n1_values=range(100, 300, 5), efficiencies=(0.5, 0.75, 1.0)) -> Table:
    rows = []
    cfg = base.with_interferers(4)
    for label, eta, model in lnl_models(efficiencies):
        m_cfg = dataclasses.replace(cfg, eh_model=model)
        for n1 in n1_values:
            r = evaluate(m_cfg.with_n1(n1, 300))
            rows.append((label, eta, n1, r.ecsr, r.combined_ber, r.ee))
    return Table(("model", "eta", "N1", "ecsr", "combined_ber", "ee_bit_per_j"), rows)


# ------------------------------------------------------------------ search complexity

def fig_search_complexity(base: SystemConfig, n_values=(100, 200, 300, 400, 500), seeds: int = 200) -> Table:
    """ECSR evaluations per search method; the random baseline is averaged over seeds."""
    rows = []
    for n in n_values:
        cfg = base.with_n1(n // 2, n)
        rows.append((n, "binary", allocator.allocate_binary(cfg).ecsr_evaluations))
        rows.append((n, "exhaustive", allocator.allocate_exhaustive(cfg).ecsr_evaluations))
        counts = [allocator.allocate_random(cfg, s).ecsr_evaluations for s in range(seeds)]
        rows.append((n, "random", float(np.mean(counts))))
    return Table(("N", "method", "evaluations"), rows)


# ------------------------------------------------------------------ range extension

RANGE_SETUPS = ("conventional", "ris_no_direct", "ris_direct")


def range_config(base: SystemConfig, setup: str, n: int, distance: float, height: float = 3.0) -> SystemConfig:
    """Tx at horizontal distance ``distance`` from the Rx, RIS mounted at ``height``."""
    ns = NoiseSource.from_variance(dbm_to_watt(5.0), base.noise_source.resistance_ratio)
    cfg = dataclasses.replace(base, noise_source=ns, repetitions=3, samples_per_symbol=15)
    cfg = cfg.with_interferers(4, power=dbm_to_watt(20.0)).with_n1(n // 2, n)
    _, d1 = range_geometry(distance, cfg.geometry.ris_rx, height)
    geo = dataclasses.replace(cfg.geometry, tx_rx=distance, tx_ris=d1, ris_height=height)
    if setup == "conventional":
        return dataclasses.replace(cfg, geometry=geo, ris_link=False)
    if setup == "ris_no_direct":
        geo = dataclasses.replace(geo, direct_link=False, interferer_direct_link=False)
    elif setup != "ris_direct":
        raise ValueError(f"unknown range setup {setup!r}")
    return dataclasses.replace(cfg, geometry=geo)


def achievable_range(base: SystemConfig, setup: str, n: int, target: float = 1e-3,
                     distances=np.arange(1.0, 30.01, 0.5)) -> float:
    """Largest Tx-Rx distance at which the combined BER stays at or below ``target`` (nan if never)."""
    ber = np.array([evaluate(range_config(base, setup, n, d)).combined_ber for d in distances])
    ok = np.nonzero(ber <= target)[0]
    if ok.size == 0:
        return float("nan")
    i = ok[-1]
    if i == len(distances) - 1:
        return float(distances[-1])

    def gap(d):
        return math.log(evaluate(range_config(base, setup, n, d)).combined_ber) - math.log(target)

    return float(optimize.brentq(gap, distances[i], distances[i + 1], xtol=1e-3))


def fig_range(base: SystemConfig, distances=tuple(np.arange(1.0, 20.01, 0.5)), sizes=(100, 150)) -> Table:
    rows = []
    for d in distances:
        rows.append(("conventional", 0, float(d), evaluate(range_config(base, "conventional", sizes[0], d)).combined_ber))
        for n in sizes:
            for setup in RANGE_SETUPS[1:]:
                rows.append((setup, n, float(d), evaluate(range_config(base, setup, n, d)).combined_ber))
    return Table(("setup", "N", "distance_m", "combined_ber"), rows)


# ------------------------------------------------------------------ interference sweep

def interference_config(base: SystemConfig, k: int, pk_dbm: float, model) -> SystemConfig:
    ns = NoiseSource.from_variance(dbm_to_watt(-10.0), base.noise_source.resistance_ratio)
    cfg = dataclasses.replace(base, noise_source=ns, samples_per_symbol=10, repetitions=5, eh_model=model)
    n = base.ris.total_elements
    return cfg.with_interferers(k, power=dbm_to_watt(pk_dbm), ris_distance=5.0, rx_distance=10.0).with_n1(n // 2, n)


def fig_interference_sweep(base: SystemConfig, k_values=(5, 15, 30), pk_dbm=tuple(range(-10, 41, 2))) -> Table:
    rows = []
    for label, model in (("leh", LinearEh()), ("nleh", NonLinearEh())):
        for k in k_values:
            for p in pk_dbm:
                r = evaluate(interference_config(base, k, p, model))
                rows.append((label, k, p, r.ecsr, r.combined_ber, r.mi))
    return Table(("model", "K", "pk_dbm", "ecsr", "combined_ber", "mi_nats"), rows)


FIGURES = {
    r.name: r
    for r in (
        FigureRecipe("fig_ecsr_vs_n1", "ECSR against harvesting elements, N = 200", fig_ecsr_vs_n1),
        FigureRecipe("fig_ber_vs_n1", "BER against harvesting elements, quantized and ideal phases", fig_ber_vs_n1),
        FigureRecipe("fig_mi_vs_n1", "MI against harvesting elements", fig_mi_vs_n1),
        FigureRecipe("fig_ber_vs_snr_reps", "BER against SNR for 1, 3 and 5 repetitions", fig_ber_vs_snr_reps),
        FigureRecipe("fig_ber_vs_threshold", "BER against detection threshold", fig_ber_vs_threshold),
        FigureRecipe("fig_ee_models", "EE of LEH, NLEH and a conventional RIS", fig_ee_models),
        FigureRecipe("fig_lnl_comparison", "LEH against NLEH allocation, N = 300", fig_lnl_comparison),
        FigureRecipe("fig_search_complexity", "ECSR evaluations per search method", fig_search_complexity),
        FigureRecipe("fig_range", "BER against Tx-Rx distance", fig_range),
        FigureRecipe("fig_interference_sweep", "ECSR, BER and MI against interference power", fig_interference_sweep),
    )
}


def run_figure(name: str, base: SystemConfig | None = None, **kw) -> Table:
    try:
        recipe = FIGURES[name]
    except KeyError:
        raise KeyError(f"unknown figure {name!r}; choose from {', '.join(FIGURES)}") from None
    return recipe.run(base, **kw)
