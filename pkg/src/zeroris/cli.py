"""Command-line interface: ``zeroris <command> [options]``.

Every command writes CSV with a header row to standard output (or
``--out``). Exit status: 0 success, 1 configuration or usage error, 2 when a
numerical integral fails to converge.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import math
import sys
from dataclasses import dataclass

from . import allocator, detection, energy, infometrics, montecarlo
from .detection import NumericalConvergenceError
from .figures import FIGURES, run_figure
from .linkstats import desired_moments, interference_stats
from .pipeline import evaluate, scenario_ecsr
from .sysmodel import ConfigError, SystemConfig, apply_overrides, dump_config, linear_to_db, load_config, validate

SWEEP_METRICS = ("ecsr", "ber", "mi", "ee", "threshold", "allocation", "mc_ecsr", "mc_ber", "mc_mi")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.format_usage()}{self.prog}: error: {message}")


@dataclass(frozen=True)
class SweepSpec:
    parameter_path: str
    values: tuple
    outputs: tuple


def config_hash(config: SystemConfig) -> str:
    return hashlib.sha256(dump_config(config).encode()).hexdigest()[:12]


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return "nan" if math.isnan(value) else repr(value)
    return str(value)


def _write(out, columns, rows) -> None:
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_fmt(v) for v in row])


# ------------------------------------------------------------------ argument handling

def _add_config_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="key=value config file")
    p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE", help="override one config key")
    p.add_argument("--n", type=int, help="total RIS elements N")
    p.add_argument("--n1", type=int, help="harvesting elements N1")
    p.add_argument("--k", type=int, help="number of interferers K")
    p.add_argument("--ecsr", type=float, help="pin the beamforming probability")
    p.add_argument("--out", help="write CSV here instead of stdout")


def _build_parser() -> _Parser:
    parser = _Parser(prog="zeroris", description="Zero-energy RIS noise-modulation performance toolkit")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    for name, text in (("validate", "check a configuration"), ("ecsr", "energy constraint success rate"),
                       ("mi", "mutual information"), ("ee", "energy efficiency")):
        _add_config_args(sub.add_parser(name, help=text))

    p = sub.add_parser("allocate", help="choose the harvesting/reflection split")
    _add_config_args(p)
    p.add_argument("--method", default="binary", choices=("binary", "exhaustive", "random", "closed_form"))
    p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("ber", help="bit error rate")
    _add_config_args(p)
    p.add_argument("--method", default="auto", choices=detection.METHODS + ("exact",))
    p.add_argument("--order", type=int, default=30, help="Laguerre quadrature order")
    p.add_argument("--threshold", type=float, help="detector threshold in W")

    p = sub.add_parser("threshold", help="detection threshold")
    _add_config_args(p)
    p.add_argument("--scan", action="store_true", help="also locate the exact-BER minimum on a grid")

    p = sub.add_parser("mc", help="Monte Carlo estimates")
    _add_config_args(p)
    p.add_argument("--trials", type=int, default=100_000)
    p.add_argument("--bits", type=int, default=100_000)
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--workers", type=int)
    p.add_argument("--coupled-eh", action="store_true")
    p.add_argument("--refade-per-repetition", action=argparse.BooleanOptionalAction, default=True)
    p.add_argument("--metrics", default="ecsr,ber,mi")

    p = sub.add_parser("sweep", help="sweep one config key")
    _add_config_args(p)
    p.add_argument("--param", required=True, help="config key or alias")
    p.add_argument("--values", required=True, help="comma list; START:STOP:STEP items expand inclusively")
    p.add_argument("--unit", default="", help="suffix appended to numeric values (e.g. dBm)")
    p.add_argument("--outputs", default="ecsr,ber,mi", help=f"subset of {','.join(SWEEP_METRICS)}; empty for none")
    p.add_argument("--trials", type=int, default=100_000)
    p.add_argument("--bits", type=int, default=100_000)
    p.add_argument("--seed", type=int, default=1)

    p = sub.add_parser("figure", help="run a named figure recipe")
    p.add_argument("name", nargs="?", help=", ".join(FIGURES))
    p.add_argument("--list", action="store_true")
    p.add_argument("--config", help="base key=value config file")
    p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE")
    p.add_argument("--out")
    return parser


def _pairs(items) -> list[tuple[str, str]]:
    out = []
    for item in items:
        if "=" not in item:
            raise ConfigError([(item, "expected KEY=VALUE")])
        k, v = item.split("=", 1)
        out.append((k.strip(), v.strip()))
    return out


def _config_from(args) -> SystemConfig:
    config = load_config(args.config) if getattr(args, "config", None) else SystemConfig()
    pairs = []
    if getattr(args, "k", None) is not None:
        pairs.append(("K", args.k))
    if getattr(args, "n", None) is not None:
        pairs.append(("N", args.n))
    if getattr(args, "n1", None) is not None:
        pairs.append(("N1", args.n1))
    if getattr(args, "ecsr", None) is not None:
        pairs.append(("ecsr_override", args.ecsr))
    pairs += _pairs(getattr(args, "set", []))
    return validate(apply_overrides(config, pairs))


# ------------------------------------------------------------------ commands

def _cmd_validate(args, config):
    return ("status", "config_hash", "N", "N1", "N2", "K"), [
        ("ok", config_hash(config), config.ris.total_elements, config.ris.eh_elements,
         config.ris.reflect_elements, config.num_interferers)
    ]


def _model_name(config) -> str:
    return "linear" if isinstance(config.eh_model, energy.LinearEh) else "nonlinear"


def _cmd_ecsr(args, config):
    value = scenario_ecsr(config)
    return ("config_hash", "N", "N1", "N2", "K", "model", "ecsr"), [
        (config_hash(config), config.ris.total_elements, config.ris.eh_elements,
         config.ris.reflect_elements, config.num_interferers, _model_name(config), value)
    ]


def _cmd_allocate(args, config):
    res = allocator.allocate(config, args.method, args.seed)
    return ("method", "N1", "N2", "ecsr", "evaluations"), [
        (res.method, res.n1_star, res.n2_star, res.achieved_ecsr, res.ecsr_evaluations)
    ]


def _threshold_db(config, threshold) -> float:
    return linear_to_db(threshold / config.noise_floor)


def _cmd_ber(args, config):
    ecsr = scenario_ecsr(config)
    moments = desired_moments(config, ecsr)
    istats = interference_stats(config)
    rep = detection.ber_report(config, moments, istats, threshold=args.threshold, method=args.method, order=args.order)
    return ("config_hash", "method", "threshold", "threshold_db", "per_rep_ber", "combined_ber",
            "combined_ber_per_bit", "quadrature_order", "error_estimate"), [
        (config_hash(config), rep.method, rep.threshold_used, _threshold_db(config, rep.threshold_used),
         rep.per_rep_ber, rep.combined_ber, rep.combined_ber_per_bit, rep.quadrature_order, rep.error_estimate)
    ]


def _cmd_threshold(args, config):
    ecsr = scenario_ecsr(config)
    moments = desired_moments(config, ecsr)
    istats = interference_stats(config)
    approx = detection.threshold_average_approx(config, moments, istats)
    h = config_hash(config)
    ber = detection.ber_per_repetition(config, moments, istats, approx)[0]
    rows = [(h, "average_approx", approx, _threshold_db(config, approx), ber)]
    if args.scan:
        from .figures import threshold_curve

        _, grid, bers, _ = threshold_curve(config.replace(ecsr_override=ecsr), span_db=10.0, points=41)
        i = int(bers.argmin())
        rows.append((h, "grid_minimum", float(grid[i]), _threshold_db(config, grid[i]), float(bers[i])))
    return ("config_hash", "kind", "threshold", "threshold_db", "per_rep_ber"), rows


def _cmd_mi(args, config):
    rep = infometrics.info_report(config, scenario_ecsr(config))
    return ("config_hash", "mi_per_sample", "mi_per_symbol", "mi_unclamped", "aggregate_noise"), [
        (config_hash(config), rep.mi_per_sample, rep.mi_per_symbol, rep.mi_unclamped, rep.aggregate_noise)
    ]


def _cmd_ee(args, config):
    ecsr = scenario_ecsr(config)
    rows = []
    for mode, conv in (("proposed", False), ("conventional", True)):
        rep = infometrics.info_report(config, ecsr, conventional=conv)
        rows.append((config_hash(config), mode, rep.mi_per_sample, rep.total_power, rep.ee))
    return ("config_hash", "mode", "mi_per_sample", "total_power", "ee_bit_per_j"), rows


def _mc_rows(config, metrics, trials, bits, seed, workers=None, coupled=False, refade=True):
    rows = []
    ecsr = scenario_ecsr(config)
    for metric in metrics:
        if metric == "ecsr":
            est = montecarlo.simulate_ecsr(config, trials, seed, workers=workers)
            analytic = ecsr
        elif metric == "ber":
            est = montecarlo.simulate_link(config, ecsr, bits, seed, refade_per_repetition=refade,
                                           coupled_eh=coupled, workers=workers)
            analytic = evaluate(config).combined_ber
        elif metric == "mi":
            est = montecarlo.simulate_mi(config, ecsr, trials, seed, workers=workers)
            analytic = infometrics.info_report(config, ecsr).mi_per_sample
        else:
            raise UsageError(f"unknown Monte Carlo metric {metric!r}; use ecsr, ber or mi")
        rows.append((metric, est.value, est.std_error, est.ci_low, est.ci_high, est.trials, analytic))
    return rows


def _split(text: str) -> list[str]:
    return [t.strip() for t in text.split(",") if t.strip()]


def _cmd_mc(args, config):
    rows = _mc_rows(config, _split(args.metrics), args.trials, args.bits, args.seed,
                    args.workers, args.coupled_eh, args.refade_per_repetition)
    return ("metric", "value", "std_error", "ci_low", "ci_high", "trials", "analytic"), rows


def expand_values(text: str, unit: str = "") -> list[str]:
    """Expand '10:190:5,200' into explicit value strings (ranges are inclusive)."""
    out = []
    for item in _split(text):
        if item.count(":") == 2:
            start, stop, step = (float(x) for x in item.split(":"))
            if step == 0:
                raise ValueError("range step must be nonzero")
            count = int(math.floor((stop - start) / step + 1e-9)) + 1
            for i in range(max(count, 0)):
                v = start + i * step
                out.append((str(int(v)) if float(v).is_integer() else repr(v)) + unit)
        else:
            out.append(item + unit)
    return out


def run_sweep(spec: SweepSpec, config: SystemConfig, trials: int = 100_000, bits: int = 100_000, seed: int = 1):
    """One row per (value, metric) in input order."""
    columns = ("parameter", "value", "metric", "result", "std_error")
    rows = []
    unknown = [m for m in spec.outputs if m not in SWEEP_METRICS]
    if unknown:
        raise UsageError(f"unknown sweep outputs {unknown}; choose from {', '.join(SWEEP_METRICS)}")
    for value in spec.values:
        cfg = validate(apply_overrides(config, [(spec.parameter_path, value)]))
        report = evaluate(cfg) if set(spec.outputs) & {"ber", "mi", "ee", "threshold"} else None
        for metric in spec.outputs:
            se = None
            if metric == "ecsr":
                result = scenario_ecsr(cfg)
            elif metric == "ber":
                result = report.combined_ber
            elif metric == "mi":
                result = report.mi
            elif metric == "ee":
                result = report.ee
            elif metric == "threshold":
                result = report.threshold
            elif metric == "allocation":
                result = allocator.allocate_binary(cfg).n1_star
            else:
                _, result, se, *_ = _mc_rows(cfg, [metric[3:]], trials, bits, seed)[0]
            rows.append((spec.parameter_path, value, metric, result, se))
    return columns, rows


def _cmd_sweep(args, config):
    try:
        values = tuple(expand_values(args.values, args.unit))
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    if not values:
        raise UsageError("sweep needs at least one value")
    spec = SweepSpec(args.param, values, tuple(_split(args.outputs)))
    return run_sweep(spec, config, args.trials, args.bits, args.seed)


def _cmd_figure(args):
    if args.list or not args.name:
        return ("name", "description"), [(r.name, r.description) for r in FIGURES.values()]
    if args.name not in FIGURES:
        raise UsageError(f"unknown figure {args.name!r}; choose from {', '.join(FIGURES)}")
    base = load_config(args.config) if args.config else SystemConfig()
    base = validate(apply_overrides(base, _pairs(args.set)))
    table = run_figure(args.name, base)
    return table.columns, table.rows


COMMANDS = {
    "validate": _cmd_validate,
    "ecsr": _cmd_ecsr,
    "allocate": _cmd_allocate,
    "ber": _cmd_ber,
    "threshold": _cmd_threshold,
    "mi": _cmd_mi,
    "ee": _cmd_ee,
    "mc": _cmd_mc,
    "sweep": _cmd_sweep,
}


def run_command(argv, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            raise UsageError(parser.format_help())
        if args.command == "figure":
            columns, rows = _cmd_figure(args)
        else:
            columns, rows = COMMANDS[args.command](args, _config_from(args))
    except UsageError as exc:
        print(str(exc), file=stderr)
        return 1
    except ConfigError as exc:
        for path, msg in exc.errors:
            print(f"config error: {path}: {msg}", file=stderr)
        return 1
    except (KeyError, ValueError, ZeroDivisionError) as exc:
        print(f"error: {exc}", file=stderr)
        return 1
    except NumericalConvergenceError as exc:
        print(f"numerical failure: {exc}", file=stderr)
        return 2

    buf = io.StringIO()
    _write(buf, columns, rows)
    if getattr(args, "out", None):
        with open(args.out, "w", newline="") as fh:
            fh.write(buf.getvalue())
    else:
        stdout.write(buf.getvalue())
    return 0


def main(argv=None) -> None:
    sys.exit(run_command(sys.argv[1:] if argv is None else argv))


if __name__ == "__main__":
    main()
