import numpy as np
import pytest

from zeroris import NoiseSource, SystemConfig
from zeroris import detection as dt
from zeroris.linkstats import desired_moments, interference_stats

N0 = 1e-13


def repetition_scenario(snr_db: float = -5.0, repetitions: int = 1) -> SystemConfig:
    """N2 = 50, ECSR pinned at 0.9, K = 3, M = 3, sigma0^2 and P_k set relative to N0."""
    cfg = SystemConfig(
        noise_source=NoiseSource.from_variance(N0 * 10 ** (snr_db / 10)),
        noise_floor=N0,
        samples_per_symbol=3,
        repetitions=repetitions,
        ecsr_override=0.9,
    )
    return cfg.with_interferers(3, power=N0 * 10**0.5).with_n1(150, 200)


def stats_for(config, ecsr=None):
    ecsr = config.ecsr_override if ecsr is None else ecsr
    return desired_moments(config, ecsr), interference_stats(config)


def random_scenarios(seed, count, max_ratio=None):
    """Perturbations of the repetition scenario; optionally capped in gamma_th / N0."""
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < count:
        k = int(rng.integers(0, 5))
        cfg = repetition_scenario(float(rng.uniform(-10, 5))).with_interferers(k, power=N0 * 10 ** rng.uniform(0, 1))
        cfg = cfg.replace(samples_per_symbol=int(rng.integers(1, 16)), ecsr_override=float(rng.uniform(0.1, 1)))
        cfg = cfg.with_n1(150, int(rng.integers(160, 260)))
        mo, st_ = stats_for(cfg)
        th = dt.threshold_average_approx(cfg, mo, st_)
        if max_ratio is None or th / N0 <= max_ratio:
            out.append((cfg, mo, st_, th))
    return out


@pytest.fixture
def default_config():
    return SystemConfig()


@pytest.fixture
def rep_config():
    return repetition_scenario()


@pytest.fixture
def rng():
    return np.random.default_rng(20261014)


# criterion -> clause -> (ok, counted, detail)
_ACCEPTANCE: dict[int, dict[str, tuple[bool, bool, str]]] = {}


@pytest.fixture
def acceptance():
    """Record one acceptance clause; ``counted=False`` marks a diagnostic line."""

    def record(criterion: int, clause: str, ok: bool, detail: str = "", counted: bool = True) -> bool:
        _ACCEPTANCE.setdefault(criterion, {})[clause] = (bool(ok), counted, detail)
        print(f"criterion {criterion} {clause}: {'ok' if ok else 'red'} {detail}")
        return bool(ok)

    return record


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    tr = terminalreporter
    tr.write_sep("=", "acceptance criteria")
    for criterion in sorted(_ACCEPTANCE):
        clauses = _ACCEPTANCE[criterion]
        counted = {k: v for k, v in clauses.items() if v[1]}
        verdict = "PASS" if counted and all(v[0] for v in counted.values()) else "FAIL"
        red = [k for k, v in counted.items() if not v[0]]
        tail = f" (red: {', '.join(red)})" if red else ""
        tr.write_line(f"criterion {criterion:2d}: {verdict}{tail}")
        for clause, (ok, is_counted, detail) in clauses.items():
            tag = ("ok " if ok else "red") if is_counted else "diag"
            tr.write_line(f"    [{tag}] {clause} {detail}".rstrip())
