"""Scenario description, unit handling and validation.

Every other module consumes a :class:`SystemConfig`. All stored quantities
are SI (watts, meters, seconds); unit-suffixed strings such as ``"20dBm"``
are accepted at the boundary by :func:`parse_power` and :func:`validate`.
"""

from __future__ import annotations

import dataclasses
import math
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterable, Mapping

import numpy as np

from .energy import EhModel, LinearEh, NonLinearEh

BOLTZMANN = 1.380649e-23


class ConfigError(ValueError):
    """Raised by :func:`validate`; ``errors`` lists ``(field_path, message)`` pairs."""

    def __init__(self, errors: list[tuple[str, str]]):
        self.errors = list(errors)
        super().__init__("; ".join(f"{path}: {msg}" for path, msg in self.errors))


def dbm_to_watt(dbm):
    out = 10.0 ** ((np.asarray(dbm, dtype=float) - 30.0) / 10.0)
    return float(out) if out.ndim == 0 else out


def watt_to_dbm(watt):
    out = 10.0 * np.log10(np.asarray(watt, dtype=float)) + 30.0
    return float(out) if out.ndim == 0 else out


def db_to_linear(db: float) -> float:
    return 10.0 ** (db / 10.0)


def linear_to_db(x: float) -> float:
    return 10.0 * math.log10(x)


_POWER_RE = re.compile(r"^\s*([-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?)\s*(dBm|dBW|mW|uW|µW|nW|W)?\s*$")
_POWER_SCALE = {"W": 1.0, "mW": 1e-3, "uW": 1e-6, "µW": 1e-6, "nW": 1e-9}


def parse_power(value) -> float:
    """Watts from a number (already W) or a suffixed string: dBm, dBW, mW, uW, nW, W."""
    if isinstance(value, (int, float, np.floating, np.integer)) and not isinstance(value, bool):
        return float(value)
    match = _POWER_RE.match(str(value))
    if not match:
        raise ValueError(f"cannot parse power value {value!r}")
    number = float(match.group(1))
    unit = match.group(2) or "W"
    if unit == "dBm":
        return dbm_to_watt(number)
    if unit == "dBW":
        return 10.0 ** (number / 10.0)
    return number * _POWER_SCALE[unit]


def path_loss(distance, exponent: float = 2.0):
    """Amplitude path loss d^(-a/2); its square is the power attenuation."""
    d = np.asarray(distance, dtype=float)
    if np.any(d <= 0):
        raise ValueError("distance must be positive")
    out = d ** (-exponent / 2.0)
    return float(out) if np.ndim(out) == 0 else out


def range_geometry(d: float, d2: float, height: float) -> tuple[float, float]:
    """(chi, d1) for a Tx moving horizontally under a mounted RIS.

    chi is the fixed horizontal RIS-Rx offset; d1 the resulting Tx-RIS distance.
    """
    if not height > 0 or not d > 0:
        raise ValueError("distance and height must be positive")
    if height >= d2:
        raise ValueError("RIS height must be smaller than the RIS-Rx distance")
    chi = math.sqrt(d2 * d2 - height * height)
    return chi, math.hypot(height, d - chi)


@dataclass(frozen=True)
class NoiseSource:
    """Resistor noise source; bit 0 uses R_L, bit 1 uses R_H = C R_L."""

    boltzmann: float = BOLTZMANN
    temperature: float = 290.0
    bandwidth: float = 1e6
    low_resistance: float = 1.0
    resistance_ratio: float = 15.0

    @classmethod
    def from_variance(cls, sigma0_sq, resistance_ratio: float = 15.0, **kw) -> NoiseSource:
        """Pick R_L so that 4 k T R_L B equals ``sigma0_sq`` (W or suffixed string)."""
        base = cls(resistance_ratio=resistance_ratio, **kw)
        var = parse_power(sigma0_sq)
        r_l = var / (4.0 * base.boltzmann * base.temperature * base.bandwidth)
        return dataclasses.replace(base, low_resistance=r_l)

    @property
    def sigma0_sq(self) -> float:
        return 4.0 * self.boltzmann * self.temperature * self.low_resistance * self.bandwidth

    @property
    def sigma1_sq(self) -> float:
        return self.resistance_ratio * self.sigma0_sq


@dataclass(frozen=True)
class Geometry:
    tx_rx: float = 8.0
    tx_ris: float = 3.0
    ris_rx: float = 6.0
    interferer_ris: tuple[float, ...] = (12.0, 14.0, 18.0, 20.0)
    interferer_rx: tuple[float, ...] = (18.0, 20.0, 22.0, 25.0)
    pathloss_exponent: float = 2.0
    ris_height: float | None = None
    direct_link_mean: float = 1.0
    direct_link: bool = True
    interferer_direct_link: bool = True

    @property
    def num_interferers(self) -> int:
        return len(self.interferer_ris)

    @property
    def direct_loss(self) -> float:
        """L_d, or 0 when the Tx-Rx link is blocked."""
        return path_loss(self.tx_rx, self.pathloss_exponent) if self.direct_link else 0.0

    @property
    def cascade_loss(self) -> float:
        return path_loss(self.tx_ris * self.ris_rx, self.pathloss_exponent)

    @property
    def interferer_direct_loss(self) -> np.ndarray:
        """L_D^(k) per interferer; zeros when the interferer-Rx links are blocked."""
        d = np.asarray(self.interferer_rx, dtype=float)
        loss = d ** (-self.pathloss_exponent / 2.0)
        return loss if self.interferer_direct_link else np.zeros_like(loss)

    @property
    def interferer_cascade_loss(self) -> np.ndarray:
        """L_B^(k) per interferer, through the RIS."""
        d = np.asarray(self.interferer_ris, dtype=float) * self.ris_rx
        return d ** (-self.pathloss_exponent / 2.0)


@dataclass(frozen=True)
class RisConfig:
    total_elements: int = 200
    eh_elements: int = 100
    quantization_bits: int = 2
    element_power: float = 1e-3
    controller_power: float = 50e-3
    slot_duration: float = 1.0
    ideal_phase: bool = False

    @property
    def reflect_elements(self) -> int:
        return self.total_elements - self.eh_elements

    @property
    def levels(self) -> float:
        """Q = 2^b phase levels; infinite for continuous (ideal) phase shifters."""
        return math.inf if self.ideal_phase else 2**self.quantization_bits


@dataclass(frozen=True)
class SystemConfig:
    """Full scenario.

    ``ris_link`` switches the RIS reflection path off entirely (the
    conventional no-RIS baseline). ``ecsr_override`` pins the beamforming
    probability instead of computing it from the harvesting model, and
    ``threshold_override`` pins the detector threshold (W).
    """

    noise_source: NoiseSource = field(default_factory=lambda: NoiseSource.from_variance(1e-4))
    geometry: Geometry = field(default_factory=Geometry)
    ris: RisConfig = field(default_factory=RisConfig)
    interferer_powers: tuple[float, ...] = (0.1, 0.1, 0.1, 0.1)
    noise_floor: float = 1e-13
    samples_per_symbol: int = 15
    repetitions: int = 5
    eh_model: EhModel = field(default_factory=LinearEh)
    rx_power: float = 0.195
    tx_power: float = 1e-6
    ris_link: bool = True
    ecsr_override: float | None = None
    threshold_override: float | None = None

    @property
    def num_interferers(self) -> int:
        return len(self.interferer_powers)

    @property
    def snr0(self) -> float:
        """gamma_0 = sigma0^2 / N0 (linear)."""
        return self.noise_source.sigma0_sq / self.noise_floor

    @property
    def inr(self) -> np.ndarray:
        """Per-interferer P_k / N0 (linear)."""
        return np.asarray(self.interferer_powers, dtype=float) / self.noise_floor

    def replace(self, **changes) -> SystemConfig:
        return dataclasses.replace(self, **changes)

    def with_n1(self, n1: int, n: int | None = None) -> SystemConfig:
        ris = dataclasses.replace(self.ris, eh_elements=int(n1))
        if n is not None:
            ris = dataclasses.replace(ris, total_elements=int(n))
        return dataclasses.replace(self, ris=ris)

    def with_interferers(self, count: int, power=None, ris_distance=None, rx_distance=None) -> SystemConfig:
        """Resize the interferer set.

        Missing per-interferer values are taken cyclically from the current
        lists; scalar arguments broadcast to every interferer.
        """
        def pick(current, override):
            if override is not None:
                vals = np.broadcast_to(np.asarray(override, dtype=float), (count,))
                return tuple(float(v) for v in vals)
            if not current:
                raise ValueError("no existing values to extend")
            return tuple(float(current[i % len(current)]) for i in range(count))

        powers = pick(self.interferer_powers, None if power is None else parse_power(power))
        geo = dataclasses.replace(
            self.geometry,
            interferer_ris=pick(self.geometry.interferer_ris, ris_distance),
            interferer_rx=pick(self.geometry.interferer_rx, rx_distance),
        )
        return dataclasses.replace(self, interferer_powers=powers, geometry=geo)

    def set_path(self, path: str, value) -> SystemConfig:
        return set_config_value(self, path, value)


# ---------------------------------------------------------------- key=value

_ALIASES = {
    "N": "ris.total_elements",
    "N1": "ris.eh_elements",
    "N2": "ris.reflect_elements",
    "b": "ris.quantization_bits",
    "K": "interferers",
    "P_k": "interferer_powers",
    "Pk": "interferer_powers",
    "M": "samples_per_symbol",
    "R": "repetitions",
    "N0": "noise_floor",
    "sigma0_sq": "noise_source.sigma0_sq",
    "C": "noise_source.resistance_ratio",
    "eta": "eh_model.efficiency",
    "d": "geometry.tx_rx",
    "d1": "geometry.tx_ris",
    "d2": "geometry.ris_rx",
    "H": "geometry.ris_height",
    "a": "geometry.pathloss_exponent",
    "mu_d": "geometry.direct_link_mean",
}

_POWER_FIELDS = {
    "interferer_powers", "noise_floor", "rx_power", "tx_power",
    "ris.element_power", "ris.controller_power", "noise_source.sigma0_sq",
}
_INT_FIELDS = {
    "ris.total_elements", "ris.eh_elements", "ris.quantization_bits",
    "samples_per_symbol", "repetitions", "interferers", "ris.reflect_elements",
}
_BOOL_FIELDS = {"ris_link", "ris.ideal_phase", "geometry.direct_link", "geometry.interferer_direct_link"}
_TUPLE_FIELDS = {"interferer_powers", "geometry.interferer_ris", "geometry.interferer_rx"}
_OPTIONAL_FIELDS = {"ecsr_override", "threshold_override", "geometry.ris_height"}


def canonical_key(key: str) -> str:
    return _ALIASES.get(key.strip(), key.strip())


def _parse_bool(text) -> bool:
    if isinstance(text, bool):
        return text
    low = str(text).strip().lower()
    if low in {"1", "true", "yes", "on"}:
        return True
    if low in {"0", "false", "no", "off"}:
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _split_list(value) -> list:
    if isinstance(value, str):
        return [v for v in re.split(r"[,\s]+", value.strip()) if v]
    if np.ndim(value) == 0:
        return [value]
    return list(value)


def _coerce(path: str, value):
    if path in _OPTIONAL_FIELDS and (value is None or str(value).strip().lower() in {"none", ""}):
        return None
    if path in _TUPLE_FIELDS:
        items = _split_list(value)
        conv = parse_power if path in _POWER_FIELDS else float
        return tuple(conv(v) for v in items)
    if path in _POWER_FIELDS:
        return parse_power(value)
    if path in _BOOL_FIELDS:
        return _parse_bool(value)
    if path in _INT_FIELDS:
        num = float(value)
        if num != int(num):
            raise ValueError(f"{path} must be an integer, got {value!r}")
        return int(num)
    if path == "eh_model":
        return _parse_eh_model(value)
    if path == "eh_model.unit":
        return str(value)
    if path == "threshold_override":
        return parse_power(value)
    return float(value)


def _parse_eh_model(value) -> EhModel:
    if isinstance(value, (LinearEh, NonLinearEh)):
        return value
    name = str(value).strip().lower()
    if name in {"linear", "leh"}:
        return LinearEh()
    if name in {"nonlinear", "nleh", "non-linear"}:
        return NonLinearEh()
    raise ValueError(f"unknown harvesting model {value!r}; use linear or nonlinear")


def set_config_value(config: SystemConfig, key: str, value) -> SystemConfig:
    """Return a copy of ``config`` with the dotted ``key`` (or alias) set to ``value``.

    ``value`` may be a string as read from a config file or CLI option.
    """
    path = canonical_key(key)
    val = _coerce(path, value)
    if path == "interferers":
        return config.with_interferers(val)
    if path == "interferer_powers" and len(val) == 1 and config.num_interferers > 1:
        val = val * config.num_interferers
    if path == "ris.reflect_elements":
        return config.with_n1(config.ris.total_elements - val)
    if path == "noise_source.sigma0_sq":
        ns = config.noise_source
        new = NoiseSource.from_variance(
            val, ns.resistance_ratio, boltzmann=ns.boltzmann,
            temperature=ns.temperature, bandwidth=ns.bandwidth,
        )
        return dataclasses.replace(config, noise_source=new)
    if path == "eh_model.efficiency" and isinstance(config.eh_model, NonLinearEh):
        return dataclasses.replace(config, eh_model=LinearEh(val))
    if path == "eh_model.unit" and isinstance(config.eh_model, LinearEh):
        raise KeyError("eh_model.unit applies to the nonlinear model only")
    return _replace_path(config, path.split("."), val)


def _replace_path(obj, parts: list[str], value):
    name = parts[0]
    if not dataclasses.is_dataclass(obj) or name not in {f.name for f in dataclasses.fields(obj)}:
        raise KeyError(f"unknown config key {'.'.join(parts)!r}")
    if len(parts) == 1:
        return dataclasses.replace(obj, **{name: value})
    return dataclasses.replace(obj, **{name: _replace_path(getattr(obj, name), parts[1:], value)})


def get_config_value(config: SystemConfig, key: str):
    path = canonical_key(key)
    if path == "interferers":
        return config.num_interferers
    obj: Any = config
    for part in path.split("."):
        if not hasattr(obj, part):
            raise KeyError(f"unknown config key {key!r}")
        obj = getattr(obj, part)
    return obj


def load_config(source, base: SystemConfig | None = None) -> SystemConfig:
    """Parse a key=value document (path or text). ``#`` starts a comment.

    Keys are dotted field paths or the short aliases in ``CONFIG_ALIASES``.
    Lines are applied in order, so ``K`` should precede per-interferer lists.
    """
    if isinstance(source, Path) or (isinstance(source, str) and "\n" not in source and "=" not in source):
        text = Path(source).read_text()
    else:
        text = str(source)
    return apply_overrides(base or SystemConfig(), _parse_lines(text.splitlines()))


def _parse_lines(lines: Iterable[str]) -> list[tuple[str, str]]:
    pairs = []
    for lineno, raw in enumerate(lines, 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError([(f"line {lineno}", f"expected key=value, got {raw.strip()!r}")])
        key, val = line.split("=", 1)
        pairs.append((key.strip(), val.strip()))
    return pairs


def apply_overrides(config: SystemConfig, pairs: Iterable[tuple[str, Any]] | Mapping[str, Any]) -> SystemConfig:
    items = pairs.items() if isinstance(pairs, Mapping) else pairs
    errors = []
    for key, val in items:
        try:
            config = set_config_value(config, key, val)
        except (KeyError, ValueError) as exc:
            errors.append((canonical_key(key), str(exc).strip("'\"")))
    if errors:
        raise ConfigError(errors)
    return config


def _fmt(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if value is None:
        return "none"
    if isinstance(value, tuple):
        return ",".join(_fmt(v) for v in value)
    if isinstance(value, float):
        return repr(value)
    return str(value)


def dump_config(config: SystemConfig) -> str:
    """Serialize to the key=value format; ``load_config(dump_config(c)) == c``."""
    lines = [f"interferers = {config.num_interferers}"]
    ns = config.noise_source
    for name in ("boltzmann", "temperature", "bandwidth", "low_resistance", "resistance_ratio"):
        lines.append(f"noise_source.{name} = {_fmt(getattr(ns, name))}")
    for f in dataclasses.fields(config.geometry):
        lines.append(f"geometry.{f.name} = {_fmt(getattr(config.geometry, f.name))}")
    for f in dataclasses.fields(config.ris):
        lines.append(f"ris.{f.name} = {_fmt(getattr(config.ris, f.name))}")
    model = config.eh_model
    if isinstance(model, LinearEh):
        lines += ["eh_model = linear", f"eh_model.efficiency = {_fmt(model.efficiency)}"]
    else:
        lines.append("eh_model = nonlinear")
        lines += [f"eh_model.{n} = {_fmt(getattr(model, n))}" for n in ("a1", "a2", "a3", "unit")]
    for name in ("interferer_powers", "noise_floor", "samples_per_symbol", "repetitions",
                 "rx_power", "tx_power", "ris_link", "ecsr_override", "threshold_override"):
        lines.append(f"{name} = {_fmt(getattr(config, name))}")
    return "\n".join(lines) + "\n"


CONFIG_ALIASES = dict(_ALIASES)


# ---------------------------------------------------------------- validation

def _normalize(config: SystemConfig) -> SystemConfig:
    """Convert any string-valued power fields to watts and lists to tuples."""
    def power_tuple(vals):
        return tuple(parse_power(v) for v in _split_list(vals))

    geo = config.geometry
    geo = dataclasses.replace(
        geo,
        interferer_ris=tuple(float(x) for x in _split_list(geo.interferer_ris)),
        interferer_rx=tuple(float(x) for x in _split_list(geo.interferer_rx)),
    )
    ris = dataclasses.replace(
        config.ris,
        element_power=parse_power(config.ris.element_power),
        controller_power=parse_power(config.ris.controller_power),
    )
    return dataclasses.replace(
        config,
        geometry=geo,
        ris=ris,
        interferer_powers=power_tuple(config.interferer_powers),
        noise_floor=parse_power(config.noise_floor),
        rx_power=parse_power(config.rx_power),
        tx_power=parse_power(config.tx_power),
        threshold_override=None if config.threshold_override is None else parse_power(config.threshold_override),
    )


def validate(config: SystemConfig) -> SystemConfig:
    """Check every invariant and return the SI-normalized config.

    All violations are collected and raised together as :class:`ConfigError`.
    Validation is idempotent.
    """
    errors: list[tuple[str, str]] = []
    try:
        config = _normalize(config)
    except (TypeError, ValueError) as exc:
        raise ConfigError([("config", str(exc))]) from exc

    ns = config.noise_source
    for name in ("boltzmann", "temperature", "bandwidth", "low_resistance"):
        if not getattr(ns, name) > 0:
            errors.append((f"noise_source.{name}", "must be positive"))
    if not ns.resistance_ratio > 1:
        errors.append(("noise_source.resistance_ratio", "resistance ratio C must exceed 1"))

    geo = config.geometry
    for name in ("tx_rx", "tx_ris", "ris_rx"):
        if not getattr(geo, name) > 0:
            errors.append((f"geometry.{name}", "distance must be positive"))
    if len(geo.interferer_ris) != len(geo.interferer_rx):
        errors.append(("geometry.interferer_rx", "interferer distance lists must have equal length"))
    if any(not x > 0 for x in geo.interferer_ris + geo.interferer_rx):
        errors.append(("geometry.interferer_ris", "distance must be positive"))
    if not geo.pathloss_exponent >= 2:
        errors.append(("geometry.pathloss_exponent", "path-loss exponent must be at least 2"))
    if geo.ris_height is not None and not 0 < geo.ris_height < geo.ris_rx:
        errors.append(("geometry.ris_height", "RIS height must lie in (0, ris_rx)"))
    if geo.direct_link_mean < 0:
        errors.append(("geometry.direct_link_mean", "must be nonnegative"))

    ris = config.ris
    if ris.eh_elements < 1:
        errors.append(("ris.eh_elements", "at least one harvesting element required"))
    if ris.eh_elements >= ris.total_elements:
        errors.append(("ris.eh_elements", "at least one reflecting element required"))
    if ris.quantization_bits < 1:
        errors.append(("ris.quantization_bits", "at least one quantization bit required"))
    if ris.element_power < 0 or ris.controller_power < 0:
        errors.append(("ris.element_power", "power consumption must be nonnegative"))
    if not ris.slot_duration > 0:
        errors.append(("ris.slot_duration", "must be positive"))

    if len(config.interferer_powers) != geo.num_interferers:
        errors.append(("interferer_powers", "length must match the interferer distance lists"))
    if any(p < 0 for p in config.interferer_powers):
        errors.append(("interferer_powers", "powers must be nonnegative"))
    if not config.noise_floor > 0:
        errors.append(("noise_floor", "must be positive"))
    if config.samples_per_symbol < 1:
        errors.append(("samples_per_symbol", "at least one sample per symbol required"))
    if config.repetitions < 1 or config.repetitions % 2 == 0:
        errors.append(("repetitions", "repetitions must be odd"))
    if config.rx_power < 0 or config.tx_power < 0:
        errors.append(("rx_power", "power consumption must be nonnegative"))
    if config.ecsr_override is not None and not 0 <= config.ecsr_override <= 1:
        errors.append(("ecsr_override", "must lie in [0, 1]"))
    if config.threshold_override is not None and not config.threshold_override > 0:
        errors.append(("threshold_override", "must be positive"))

    model = config.eh_model
    if isinstance(model, LinearEh):
        if not 0 < model.efficiency <= 1:
            errors.append(("eh_model.efficiency", "efficiency must lie in (0, 1]"))
    elif isinstance(model, NonLinearEh):
        if not model.a1 * model.a3 - model.a2 > 0:
            errors.append(("eh_model", "nonlinear constants need a1*a3 > a2"))
        if model.unit not in ("W", "mW"):
            errors.append(("eh_model.unit", "unit must be W or mW"))
    else:
        errors.append(("eh_model", "unknown harvesting model"))

    if errors:
        raise ConfigError(errors)
    return config
