"""
The `altbd` command.

Every subcommand reads a model from `--model FILE` (a JSON model config) or from
`--preset NAME` with `--param k=v` overrides, writes data to `--out` (or stdout) and all
diagnostics to stderr.

Exit codes: 0 success, 1 usage error, 2 model or config error, 3 negative verdict
(NotErgodic, Explosive, failed verification), 4 Inconclusive, 5 numerical breakdown.
"""

from __future__ import annotations

import argparse
from dataclasses import dataclass, field, replace
import logging
import math
import os
import sys
from typing import Optional, Sequence

from dotenv import load_dotenv
import numpy as np

from . import __version__
from .egress import (
    distribution_csv,
    iterates_csv,
    occupancy_csv,
    report_to_dict,
    to_json,
    trace_csv,
    weights_csv,
    write_text,
)
from .errors import AltbdError, ConfigError, NumericalError
from .ingress import load_model, parse_params, parse_window
from .model import RateSet
from .presets import build_preset, get_preset, list_presets
from .presets.registry import ClosedForm
from .regularity import regularity, reuter_recursion_one_sided
from .series import DEFAULT_WINDOW
from .simulate import SimConfig, compare_tv, merge_reports, occupancy_distribution, replicate, simulate_path
from .stationary import (
    StationaryDistribution,
    TailCertificate,
    WeightTable,
    balance_residual,
    dense_balance_solve,
    ergodicity,
    normalize,
    weights,
)

__all__ = ["main", "build_parser", "EXIT_CODES"]

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_CONFIG = 2
EXIT_NEGATIVE = 3
EXIT_INCONCLUSIVE = 4
EXIT_NUMERICAL = 5

EXIT_CODES = {
    "Ergodic": EXIT_OK,
    "NonExplosive": EXIT_OK,
    "NotErgodic": EXIT_NEGATIVE,
    "Explosive": EXIT_NEGATIVE,
    "Inconclusive": EXIT_INCONCLUSIVE,
}

VERIFY_TOL = 1e-8


class _Parser(argparse.ArgumentParser):
    """argparse with usage errors on exit code 1."""

    def error(self, message: str):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


#### Environment defaults ####


@dataclass(frozen=True)
class EnvDefaults:
    """Flag defaults taken from the environment (and a `.env` file)."""

    window: tuple[int, int] = DEFAULT_WINDOW
    steps: int = 200
    seed: int = 0
    workers: Optional[int] = None
    format: str = "csv"

    @classmethod
    def from_env(cls, environ=None) -> EnvDefaults:
        env = os.environ if environ is None else environ
        out = {}
        if env.get("ALTBD_WINDOW"):
            out["window"] = parse_window(env["ALTBD_WINDOW"])
        for key, name in (("ALTBD_STEPS", "steps"), ("ALTBD_SEED", "seed"), ("ALTBD_WORKERS", "workers")):
            if env.get(key):
                try:
                    out[name] = int(env[key])
                except ValueError:
                    raise ConfigError(f"{key} must be an integer, got {env[key]!r}") from None
        if env.get("ALTBD_FORMAT"):
            fmt = env["ALTBD_FORMAT"].strip().lower()
            if fmt not in ("csv", "json"):
                raise ConfigError(f"ALTBD_FORMAT must be csv or json, got {env['ALTBD_FORMAT']!r}")
            out["format"] = fmt
        return cls(**out)


#### Parser ####


def _window(text: str) -> tuple[int, int]:
    try:
        return parse_window(text)
    except ConfigError as e:
        raise argparse.ArgumentTypeError(str(e)) from None


def _add_model_flags(p: argparse.ArgumentParser) -> None:
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--model", metavar="FILE", help="JSON model config")
    src.add_argument("--preset", metavar="NAME", help="named preset (see preset-list)")
    p.add_argument(
        "--param",
        action="append",
        default=[],
        metavar="K=V[,K=V...]",
        help="preset parameter overrides; repeatable",
    )


def _add_output_flags(p: argparse.ArgumentParser, env: EnvDefaults, formats: bool = True) -> None:
    if formats:
        p.add_argument("--format", choices=("csv", "json"), default=env.format)
    p.add_argument("--out", metavar="PATH", default=None, help="output file (default: stdout)")


def _add_range_flags(p: argparse.ArgumentParser, nmax_default: Optional[int]) -> None:
    p.add_argument("--nmax", type=int, default=nmax_default, help="top level of the range")
    p.add_argument(
        "--nmin",
        type=int,
        default=None,
        help="bottom level (default 0, or -nmax on two-sided models)",
    )


def _add_certificate_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--tail-n0", type=int, default=None, metavar="K")
    p.add_argument("--tail-rho", type=float, default=None, metavar="R")


def build_parser(env: EnvDefaults = EnvDefaults()) -> argparse.ArgumentParser:
    parser = _Parser(
        prog="altbd",
        description="Stationary laws, ergodicity and explosion of alternating birth-death processes.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument(
        "-v", "--verbose", action="count", default=0, help="-v for info, -vv for debug logging"
    )
    sub = parser.add_subparsers(dest="command", metavar="COMMAND", required=True)

    p = sub.add_parser("stationary", help="stationary weights or distribution")
    _add_model_flags(p)
    _add_range_flags(p, None)
    _add_certificate_flags(p)
    _add_output_flags(p, env)

    p = sub.add_parser("ergodicity", help="positive recurrence verdict")
    _add_model_flags(p)
    p.add_argument("--window", type=_window, default=env.window, metavar="W0,W1")
    _add_output_flags(p, env, formats=False)

    p = sub.add_parser("regularity", help="explosion verdict")
    _add_model_flags(p)
    p.add_argument("--window", type=_window, default=env.window, metavar="W0,W1")
    p.add_argument("--steps", type=int, default=env.steps, help="Reuter recursion steps")
    p.add_argument(
        "--iterates", metavar="PATH", default=None,
        help="write the Reuter iterates as CSV (one-sided or finite models)",
    )
    _add_output_flags(p, env, formats=False)

    p = sub.add_parser("simulate", help="simulate paths and report occupancy")
    _add_model_flags(p)
    p.add_argument("--seed", type=int, default=env.seed)
    p.add_argument("--events", type=int, default=100_000, help="events per replication")
    p.add_argument("--time", type=float, default=math.inf, help="time horizon per replication")
    p.add_argument("--guard", type=int, default=10_000, help="level that flags an explosion")
    p.add_argument("--replications", type=int, default=1)
    p.add_argument("--workers", type=int, default=env.workers)
    p.add_argument(
        "--compare-analytic",
        action="store_true",
        help="also report the total variation distance to the stationary distribution",
    )
    _add_range_flags(p, 200)
    _add_certificate_flags(p)
    p.add_argument("--trace", metavar="PATH", default=None, help="event trace CSV of replication 0")
    _add_output_flags(p, env)

    sub.add_parser("preset-list", help="list the presets")

    p = sub.add_parser("preset-show", help="model config of a preset")
    p.add_argument("name")
    p.add_argument("--param", action="append", default=[], metavar="K=V[,K=V...]")
    _add_output_flags(p, env, formats=False)

    p = sub.add_parser("verify", help="check closed-form weights against a dense solve")
    _add_model_flags(p)
    _add_range_flags(p, 40)
    _add_output_flags(p, env, formats=False)
    return parser


#### Model sources ####


@dataclass
class _Source:
    rates: RateSet
    certificates: list[TailCertificate] = field(default_factory=list)
    closed_form: Optional[ClosedForm] = None
    label: str = ""


def _source(args: argparse.Namespace, parser: argparse.ArgumentParser) -> _Source:
    if args.model is not None:
        if args.param:
            parser.error("--param only applies to --preset")
        return _Source(load_model(args.model), label=args.model)
    model = build_preset(args.preset, parse_params(args.param))
    return _Source(model.rates, list(model.certificates), model.closed_form, args.preset)


def _range(args: argparse.Namespace, rates: RateSet, parser: argparse.ArgumentParser) -> tuple[int, int]:
    topology = rates.topology
    if topology.kind == "finite":
        return 0, topology.n
    if args.nmax is None:
        parser.error(f"--nmax is required for a {topology} model")
    if args.nmin is not None:
        n_min = args.nmin
    else:
        n_min = 0 if topology.kind == "one-sided" else -args.nmax
    if n_min > args.nmax:
        parser.error(f"--nmin {n_min} is above --nmax {args.nmax}")
    return n_min, args.nmax


def _certificates(args: argparse.Namespace, src: _Source, parser) -> list[TailCertificate]:
    given = (args.tail_n0 is not None, args.tail_rho is not None)
    if any(given) and not all(given):
        parser.error("--tail-n0 and --tail-rho go together")
    if not all(given):
        return src.certificates
    sides = ["positive"] if src.rates.topology.kind == "one-sided" else ["positive", "negative"]
    return [TailCertificate(args.tail_n0, args.tail_rho, side) for side in sides]


def _analytic(rates: RateSet, lo: int, hi: int, certs: list[TailCertificate]):
    w = weights(rates, lo, hi)
    if rates.topology.is_bounded:
        return normalize(w)
    if not certs:
        return w
    return normalize(w, certs)


#### Subcommands ####


def _cmd_stationary(args, parser) -> int:
    src = _source(args, parser)
    lo, hi = _range(args, src.rates, parser)
    result = _analytic(src.rates, lo, hi, _certificates(args, src, parser))
    if isinstance(result, WeightTable):
        logger.warning(
            "no tail certificate for the %s model %s; writing unnormalised log weights",
            src.rates.topology,
            src.label,
        )
        text = weights_csv(result) if args.format == "csv" else to_json(result)
    else:
        logger.info("tail error %.3g", result.tail_error)
        text = distribution_csv(result) if args.format == "csv" else to_json(result)
    write_text(text, args.out)
    return EXIT_OK


def _cmd_ergodicity(args, parser) -> int:
    src = _source(args, parser)
    verdict = ergodicity(src.rates, args.window)
    write_text(to_json(verdict), args.out)
    return EXIT_CODES[verdict.verdict]


def _cmd_regularity(args, parser) -> int:
    src = _source(args, parser)
    if args.iterates is not None:
        topology = src.rates.topology
        if topology.kind == "two-sided":
            parser.error("--iterates needs a one-sided or finite model")
        steps = args.steps if topology.upper is None else min(args.steps, topology.upper)
        its = reuter_recursion_one_sided(src.rates, steps)
        write_text(iterates_csv(its), args.iterates)
    verdict = regularity(src.rates, args.window, args.steps)
    write_text(to_json(verdict), args.out)
    return EXIT_CODES[verdict.verdict]


def _cmd_simulate(args, parser) -> int:
    src = _source(args, parser)
    if args.replications < 1:
        parser.error("--replications must be at least 1")
    cfg = SimConfig(
        seed=args.seed,
        max_events=args.events,
        max_time=args.time,
        level_guard=args.guard,
    )
    reports = replicate(src.rates, cfg, args.replications, args.workers)
    merged = merge_reports(reports)

    tv = None
    if args.compare_analytic:
        lo, hi = _range(args, src.rates, parser)
        analytic = _analytic(src.rates, lo, hi, _certificates(args, src, parser))
        if not isinstance(analytic, StationaryDistribution):
            raise ConfigError(
                "--compare-analytic needs a tail certificate for an unbounded model; "
                "pass --tail-n0 and --tail-rho"
            )
        tv = compare_tv(analytic, occupancy_distribution(merged))
        logger.info("total variation distance %.6g", tv)

    if args.trace is not None:
        traced = simulate_path(src.rates, replace(cfg, record_trace=True), 0)
        write_text(trace_csv(traced), args.trace)

    if args.format == "json":
        doc = report_to_dict(reports, merged)
        if tv is not None:
            doc["tv_distance"] = tv
        write_text(to_json(doc), args.out)
    else:
        write_text(occupancy_csv(merged), args.out)
        if tv is not None:
            print(f"tv_distance={tv!r}", file=sys.stderr)
    return EXIT_OK


def _cmd_preset_list(args, parser) -> int:
    for name, summary in list_presets():
        print(f"{name}\t{summary}")
    return EXIT_OK


def _cmd_preset_show(args, parser) -> int:
    preset = get_preset(args.name)
    model = build_preset(args.name, parse_params(args.param))
    print(f"# {preset.name}: {preset.summary}", file=sys.stderr)
    for key, spec in preset.params.items():
        print(
            f"#   {key} = {model.params[key]} (default {spec.default}, {spec.kind}): {spec.help}",
            file=sys.stderr,
        )
    write_text(to_json(model.rates), args.out)
    return EXIT_OK


def _max_relative_gap(w: WeightTable, exact: StationaryDistribution, lo: int, hi: int) -> float:
    sub = w.restricted(lo, hi)
    logs = np.column_stack([sub.log_b, sub.log_d]).ravel()
    p = np.exp(logs - logs.max())
    p /= p.sum()
    ref = exact.restricted(lo, hi)
    q = np.column_stack([ref.prob_b, ref.prob_d]).ravel()
    q = q / q.sum()
    mask = (p > 0) | (q > 0)
    return float(np.max(np.abs(p[mask] - q[mask]) / np.maximum(p[mask], q[mask])))


def _cmd_verify(args, parser) -> int:
    src = _source(args, parser)
    lo, hi = _range(args, src.rates, parser)
    if src.rates.topology.is_bounded:
        inner = (lo, hi)
    else:
        # the truncated chain differs from the untruncated one at its edge levels
        inner = (lo + 1, hi - 1)
    if inner[0] > inner[1]:
        parser.error(f"the range [{lo}, {hi}] has no interior levels to compare")

    exact = dense_balance_solve(src.rates, (lo, hi))
    generic = weights(src.rates, lo, hi)
    doc = {
        "model": src.label,
        "truncation": [lo, hi],
        "compared": list(inner),
        "tolerance": VERIFY_TOL,
        "generic_gap": _max_relative_gap(generic, exact, *inner),
        "balance_residual": balance_residual(generic, src.rates),
    }
    gaps = [doc["generic_gap"]]
    if src.closed_form is not None:
        doc["closed_form_gap"] = _max_relative_gap(src.closed_form(lo, hi), exact, *inner)
        gaps.append(doc["closed_form_gap"])
    ok = max(gaps) <= VERIFY_TOL and doc["balance_residual"] <= VERIFY_TOL
    doc["agree"] = ok
    write_text(to_json(doc), args.out)
    print(f"residual={doc['balance_residual']:.3g} gap={max(gaps):.3g}", file=sys.stderr)
    return EXIT_OK if ok else EXIT_NEGATIVE


_COMMANDS = {
    "stationary": _cmd_stationary,
    "ergodicity": _cmd_ergodicity,
    "regularity": _cmd_regularity,
    "simulate": _cmd_simulate,
    "preset-list": _cmd_preset_list,
    "preset-show": _cmd_preset_show,
    "verify": _cmd_verify,
}


def _configure_logging(verbosity: int) -> None:
    level = logging.WARNING if verbosity <= 0 else logging.INFO if verbosity == 1 else logging.DEBUG
    logging.basicConfig(stream=sys.stderr, level=level, format="%(levelname)s %(name)s: %(message)s")
    logging.getLogger("altbd").setLevel(level)
    logging.captureWarnings(True)


def main(argv: Optional[Sequence[str]] = None) -> int:
    """
    Run the command line and return its exit code.

    Examples
    --------
    ```python
    from altbd.cli import main

    main(["ergodicity", "--preset", "dam"])
    ```
    """
    load_dotenv()
    try:
        env = EnvDefaults.from_env()
    except ConfigError as e:
        print(f"altbd: error: {e}", file=sys.stderr)
        return EXIT_CONFIG

    parser = build_parser(env)
    args = parser.parse_args(argv)
    _configure_logging(args.verbose)
    try:
        return _COMMANDS[args.command](args, parser)
    except NumericalError as e:
        print(f"altbd: numerical error: {e}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (AltbdError, ValueError, OSError) as e:
        print(f"altbd: error: {e}", file=sys.stderr)
        return EXIT_CONFIG
