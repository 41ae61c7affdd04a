"""Monte Carlo simulation of the physical link, used as an oracle for the closed forms.

Channels follow the notation table of the model: unit-variance complex
Gaussian fading on every hop, a Rician direct link, quantized phase alignment
on beamforming elements and zero phase on blind ones.

Several sums are drawn from their exact conditional laws instead of element
by element, which keeps 10^6-bit runs affordable without changing the
distribution of any simulated quantity:

* the harvested power: sum_n h_n e^{j theta_n} is exactly CN(0, N1);
* the blind-element sum: given the |g_l|, sum h_l g_l is CN(0, sum |g_l|^2);
* each interference gain: given the RIS-Rx channels, F_k is
  CN(0, L_D^2 + L_B^2 sum_i |g_i|^2) whatever the applied phases;
* the detector energy: sum_m |x_m|^2 is v * Gamma(M, 1).

``explicit=True`` variants draw everything element by element; tests use
them to confirm the reductions.

``channel="model"`` replaces the blind-element sum by
sum (h^R g^R + j h^I g^I), the per-component form the closed-form moments
are built on. Its variance is half that of the physical sum h g.

Random streams are ``PCG64(SeedSequence(seed, spawn_key=(block,)))`` over
fixed-size blocks, so estimates do not depend on the number of workers.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from functools import partial

import numpy as np
from scipy import stats

from . import energy
from .energy import LinearEh
from .linkstats import desired_moments, interference_stats
from .sysmodel import SystemConfig

WORKERS_ENV = "ZERORIS_WORKERS"
DEFAULT_BLOCK = 1 << 15


@dataclass(frozen=True)
class TrialRng:
    seed: int
    stream_id: int = 0

    def generator(self) -> np.random.Generator:
        seq = np.random.SeedSequence(self.seed, spawn_key=(self.stream_id,))
        return np.random.Generator(np.random.PCG64(seq))


@dataclass(frozen=True)
class McEstimate:
    """Mean-type or rate-type estimate.

    For rates, ``ci_low``/``ci_high`` is the 95% Wilson interval; for means it
    is value +/- 1.96 std_error.
    """

    value: float
    std_error: float
    trials: int
    ci_low: float
    ci_high: float

    def contains(self, x: float) -> bool:
        return self.ci_low <= x <= self.ci_high


def _wilson(successes: float, n: int, z: float = 1.959963984540054) -> tuple[float, float]:
    if n == 0:
        return 0.0, 1.0
    p = successes / n
    denom = 1.0 + z * z / n
    centre = (p + z * z / (2 * n)) / denom
    half = z * math.sqrt(p * (1 - p) / n + z * z / (4 * n * n)) / denom
    return max(0.0, centre - half), min(1.0, centre + half)


def rate_estimate(successes: int, n: int) -> McEstimate:
    p = successes / n
    lo, hi = _wilson(successes, n)
    return McEstimate(p, math.sqrt(p * (1 - p) / n), n, lo, hi)


def mean_estimate(total: float, total_sq: float, n: int) -> McEstimate:
    mean = total / n
    var = max(total_sq / n - mean * mean, 0.0) * n / max(n - 1, 1)
    se = math.sqrt(var / n)
    return McEstimate(mean, se, n, mean - 1.96 * se, mean + 1.96 * se)


def stratified_rate(err0: int, n0: int, err1: int, n1: int) -> McEstimate:
    """Equal-prior error rate from separate bit-0 and bit-1 counts."""
    p0, p1 = err0 / n0, err1 / n1
    value = 0.5 * (p0 + p1)
    se = 0.5 * math.sqrt(p0 * (1 - p0) / n0 + p1 * (1 - p1) / n1)
    lo0, hi0 = _wilson(err0, n0)
    lo1, hi1 = _wilson(err1, n1)
    # combine per-stratum intervals conservatively through their half widths
    half = 0.5 * math.hypot(max(p0 - lo0, hi0 - p0), max(p1 - lo1, hi1 - p1))
    return McEstimate(value, se, n0 + n1, max(0.0, value - half), min(1.0, value + half))


def default_workers() -> int:
    try:
        return max(1, int(os.environ.get(WORKERS_ENV, "1")))
    except ValueError:
        return 1


def _run_blocks(kernel, total: int, seed: int, block_size: int, workers: int | None):
    """Apply ``kernel(generator, count)`` to consecutive blocks; results in block order."""
    sizes = [block_size] * (total // block_size)
    if total % block_size:
        sizes.append(total % block_size)
    tasks = [(TrialRng(seed, i), n) for i, n in enumerate(sizes)]
    workers = default_workers() if workers is None else workers
    if workers <= 1 or len(tasks) == 1:
        return [kernel(t.generator(), n) for t, n in tasks]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_call_kernel, [kernel] * len(tasks), tasks))


def _call_kernel(kernel, task):
    rng, n = task
    return kernel(rng.generator(), n)


def _resolve_rng(rng):
    """Seed int or TrialRng -> (seed, None); a Generator -> (None, generator)."""
    if isinstance(rng, np.random.Generator):
        return None, rng
    if isinstance(rng, TrialRng):
        return rng.seed, None
    return int(rng), None


# ------------------------------------------------------------------ harvesting

def sample_harvested_power(config: SystemConfig, rng, size: int | None = None, explicit: bool = False):
    """Draw P_H = sum_k P_k d_k^-a |sum_n h_n^(k) e^{j theta_n}|^2.

    ``explicit`` draws all N1 fading coefficients and uniform phases; otherwise
    each inner sum is drawn from its exact CN(0, N1) law.
    """
    gen = rng if isinstance(rng, np.random.Generator) else TrialRng(_resolve_rng(rng)[0]).generator()
    gains = energy.interferer_harvest_gains(config)
    n1 = config.ris.eh_elements
    shape = (1 if size is None else size, len(gains))
    if explicit:
        # phases are shared across interferers: one element, one phase
        theta = gen.uniform(0.0, 2 * np.pi, size=(shape[0], 1, n1))
        h = (gen.standard_normal((*shape, n1)) + 1j * gen.standard_normal((*shape, n1))) / np.sqrt(2.0)
        gain = np.abs((h * np.exp(1j * theta)).sum(axis=-1)) ** 2
    else:
        gain = n1 * gen.standard_exponential(shape)
    out = gain @ gains if len(gains) else np.zeros(shape[0])
    return float(out[0]) if size is None else out


def _harvest_success(config: SystemConfig, p_h: np.ndarray) -> np.ndarray:
    budget = energy.energy_budget(config)
    harvested = config.eh_model.output_power(p_h)
    return harvested >= budget.consumption_power


def simulate_ecsr(config: SystemConfig, trials: int, rng, workers: int | None = None, block_size: int = DEFAULT_BLOCK) -> McEstimate:
    """Fraction of slots whose harvested energy covers the RIS consumption."""
    if config.num_interferers == 0:
        return rate_estimate(0, trials) if energy.energy_budget(config).consumption_power > 0 else rate_estimate(trials, trials)

    kernel = partial(_ecsr_kernel, config=config)
    seed, gen = _resolve_rng(rng)
    if gen is not None:
        hits = kernel(gen, trials)
    else:
        hits = sum(_run_blocks(kernel, trials, seed, block_size, workers))
    return rate_estimate(hits, trials)


def _ecsr_kernel(gen, n, config):
    return int(_harvest_success(config, sample_harvested_power(config, gen, n)).sum())


# ------------------------------------------------------------------ link

def _powered_elements(config: SystemConfig, gen, n: int) -> np.ndarray:
    """Elements the harvested energy can drive in each of n slots (coupled mode)."""
    p_h = sample_harvested_power(config, gen, n)
    ris = config.ris
    out_power = np.asarray(config.eh_model.output_power(p_h), dtype=float)
    full = _harvest_success(config, p_h)
    if ris.element_power > 0:
        partial_count = np.floor((out_power - ris.controller_power) / ris.element_power)
    else:
        partial_count = np.where(out_power >= ris.controller_power, ris.reflect_elements, 0)
    count = np.clip(partial_count, 0, ris.reflect_elements)
    return np.where(full, ris.reflect_elements, count).astype(int)


CHANNELS = ("physical", "model")


def sample_activation(ecsr: float, n: int, n2: int, gen: np.random.Generator) -> np.ndarray:
    """Beamforming mask: each element independently Bernoulli(ecsr), so N_B ~ Binomial(N2, ecsr)."""
    return gen.random((n, n2)) < ecsr


def sample_variances(config: SystemConfig, ecsr: float, n: int, gen: np.random.Generator, coupled_eh: bool = False,
                     channel: str = "physical"):
    """Draw n realizations of (D, sum_k P_k I_k).

    Beamforming status is Bernoulli(ecsr) per element, or in coupled mode set
    by a per-slot harvest draw.
    """
    if channel not in CHANNELS:
        raise ValueError(f"unknown channel {channel!r}")
    geo = config.geometry
    n2 = config.ris.reflect_elements if config.ris_link else 0
    q = config.ris.levels
    l_d = geo.direct_loss
    l_b = geo.cascade_loss

    hd = geo.direct_link_mean + (gen.standard_normal(n) + 1j * gen.standard_normal(n)) / np.sqrt(2.0)
    composite = l_d * np.abs(hd) + 0j
    g_total = np.zeros(n)
    if n2 > 0:
        if channel == "model":
            g_re = gen.standard_normal((n, n2)) ** 2 / 2.0
            g_im = gen.standard_normal((n, n2)) ** 2 / 2.0
            g2 = g_re + g_im
        else:
            g2 = gen.standard_exponential((n, n2))
        if coupled_eh:
            powered = _powered_elements(config, gen, n)
            active = np.arange(n2)[None, :] < powered[:, None]
        else:
            active = sample_activation(ecsr, n, n2, gen)
        h2 = gen.standard_exponential((n, n2))
        phi = gen.uniform(-np.pi / q, np.pi / q, size=(n, n2))
        beam = np.where(active, np.sqrt(h2 * g2) * np.exp(1j * phi), 0.0).sum(axis=1)
        if channel == "model":
            var_re = np.where(active, 0.0, g_re).sum(axis=1) / 2.0
            var_im = np.where(active, 0.0, g_im).sum(axis=1) / 2.0
            blind = np.sqrt(var_re) * gen.standard_normal(n) + 1j * np.sqrt(var_im) * gen.standard_normal(n)
        else:
            g_blind = np.where(active, 0.0, g2).sum(axis=1)
            blind = np.sqrt(g_blind / 2.0) * (gen.standard_normal(n) + 1j * gen.standard_normal(n))
        composite = composite + l_b * (beam + blind)
        g_total = g2.sum(axis=1)
    d_gain = np.abs(composite) ** 2

    powers = np.asarray(config.interferer_powers, dtype=float)
    if powers.size:
        var_f = geo.interferer_direct_loss[None, :] ** 2 + geo.interferer_cascade_loss[None, :] ** 2 * g_total[:, None]
        interference = (powers[None, :] * var_f * gen.standard_exponential((n, powers.size))).sum(axis=1)
    else:
        interference = np.zeros(n)
    return d_gain, interference


def sample_variances_explicit(config: SystemConfig, ecsr: float, n: int, gen: np.random.Generator):
    """Element-by-element version of :func:`sample_variances` (slow; for validation).

    Draws every fading coefficient, computes the ideal alignment phase,
    rounds it to the Q-level grid and applies that single phase to both the
    desired and the interference reflections.
    """
    geo = config.geometry
    n2 = config.ris.reflect_elements if config.ris_link else 0
    q = config.ris.levels
    k = config.num_interferers

    def cn(*shape):
        return (gen.standard_normal(shape) + 1j * gen.standard_normal(shape)) / np.sqrt(2.0)

    hd = geo.direct_link_mean + cn(n)
    h, g = cn(n, n2), cn(n, n2)
    active = sample_activation(ecsr, n, n2, gen)
    ideal = np.angle(hd)[:, None] - (np.angle(h) + np.angle(g))
    if np.isfinite(q):
        step = 2 * np.pi / q
        ideal = np.round(ideal / step) * step
    theta = np.where(active, ideal, 0.0)
    refl = np.exp(1j * theta)
    desired = geo.direct_loss * hd + geo.cascade_loss * (h * g * refl).sum(axis=1)
    d_gain = np.abs(desired) ** 2

    powers = np.asarray(config.interferer_powers, dtype=float)
    interference = np.zeros(n)
    for j in range(k):
        f = geo.interferer_direct_loss[j] * cn(n) + geo.interferer_cascade_loss[j] * (cn(n, n2) * g * refl).sum(axis=1)
        interference += powers[j] * np.abs(f) ** 2
    return d_gain, interference


def _link_threshold(config: SystemConfig, ecsr: float) -> float:
    if config.threshold_override is not None:
        return config.threshold_override
    from .detection import threshold_average_approx

    return threshold_average_approx(config, desired_moments(config, ecsr), interference_stats(config))


def _link_kernel(gen, n, config, ecsr, threshold, refade, coupled, explicit_samples, channel="physical"):
    ns = config.noise_source
    m = config.samples_per_symbol
    reps = config.repetitions
    n0 = n // 2
    counts = []
    for bit, count, var in ((0, n0, ns.sigma0_sq), (1, n - n0, ns.sigma1_sq)):
        if count == 0:
            counts.append(0)
            continue
        votes = np.zeros(count, dtype=int)
        d_gain = interference = None
        for _ in range(reps):
            if refade or d_gain is None:
                d_gain, interference = sample_variances(config, ecsr, count, gen, coupled, channel)
            v = var * d_gain + interference + config.noise_floor
            if explicit_samples:
                x = (gen.standard_normal((count, m)) + 1j * gen.standard_normal((count, m))) * np.sqrt(v / 2.0)[:, None]
                z = (np.abs(x) ** 2).sum(axis=1)
            else:
                z = v * gen.standard_gamma(m, count)
            votes += z > threshold
        decided_one = votes > reps // 2
        errors = int((decided_one != bool(bit)).sum())
        counts.append(errors)
    return counts[0], n0, counts[1], n - n0


def simulate_link(
    config: SystemConfig,
    ecsr: float,
    bits: int,
    rng,
    threshold: float | None = None,
    refade_per_repetition: bool = True,
    coupled_eh: bool = False,
    explicit_samples: bool = False,
    workers: int | None = None,
    block_size: int | None = None,
    channel: str = "physical",
) -> McEstimate:
    """Majority-vote BER over ``bits`` bits, half of them zeros and half ones."""
    threshold = _link_threshold(config, ecsr) if threshold is None else threshold
    n2 = max(config.ris.reflect_elements, 1)
    block = block_size or max(1024, min(DEFAULT_BLOCK, (1 << 22) // n2))
    kernel = partial(_link_kernel, config=config, ecsr=ecsr, threshold=threshold,
                     refade=refade_per_repetition, coupled=coupled_eh, explicit_samples=explicit_samples,
                     channel=channel)
    seed, gen = _resolve_rng(rng)
    parts = [kernel(gen, bits)] if gen is not None else _run_blocks(kernel, bits, seed, block, workers)
    e0, n0, e1, n1 = (sum(p[i] for p in parts) for i in range(4))
    return stratified_rate(e0, n0, e1, n1)


def _entropy_kernel(gen, n, config, ecsr, coupled, channel="physical"):
    d_gain, interference = sample_variances(config, ecsr, n, gen, coupled, channel)
    ns = config.noise_source
    base = interference + config.noise_floor
    sample = 0.5 * (np.log1p(ns.sigma0_sq * d_gain / base) + np.log1p(ns.sigma1_sq * d_gain / base))
    return float(sample.sum()), float((sample**2).sum())


def entropy_gap_estimate(config: SystemConfig, ecsr: float, trials: int, rng, coupled_eh: bool = False,
                         workers: int | None = None, channel: str = "physical") -> McEstimate:
    """Mean of 1/2 [ln v0 + ln v1] - ln(sum_k P_k I_k + N0) over channel draws (nats)."""
    n2 = max(config.ris.reflect_elements, 1)
    block = max(1024, min(DEFAULT_BLOCK, (1 << 22) // n2))
    kernel = partial(_entropy_kernel, config=config, ecsr=ecsr, coupled=coupled_eh, channel=channel)
    seed, gen = _resolve_rng(rng)
    parts = [kernel(gen, trials)] if gen is not None else _run_blocks(kernel, trials, seed, block, workers)
    return mean_estimate(sum(p[0] for p in parts), sum(p[1] for p in parts), trials)


def simulate_mi(config: SystemConfig, ecsr: float, trials: int, rng, workers: int | None = None) -> McEstimate:
    """Pre-approximation mutual information per sample, in nats."""
    from .infometrics import mc_entropy_oracle

    return mc_entropy_oracle(config, trials, rng, ecsr=ecsr, workers=workers)


def ks_exponential_pvalue(samples: np.ndarray, mean: float) -> float:
    """KS p-value of ``samples`` against an exponential law with the given mean."""
    return float(stats.kstest(samples, "expon", args=(0.0, mean)).pvalue)


__all__ = [
    "CHANNELS",
    "LinearEh",
    "McEstimate",
    "TrialRng",
    "entropy_gap_estimate",
    "ks_exponential_pvalue",
    "mean_estimate",
    "rate_estimate",
    "sample_activation",
    "sample_harvested_power",
    "sample_variances",
    "sample_variances_explicit",
    "simulate_ecsr",
    "simulate_link",
    "simulate_mi",
    "stratified_rate",
]
