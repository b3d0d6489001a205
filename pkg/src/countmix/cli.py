"""Command-line surface for the fitting, estimation, and simulation pipeline.

Every subcommand is a thin, deterministic wrapper over the library: identical
flags produce byte-identical output.  Exit codes: 0 success, 2 usage error,
1 computation error (single-line diagnostic on stderr).
"""

from __future__ import annotations

import argparse
import csv
import io as _io
import json
import sys
from pathlib import Path

from . import io as cmio
from .base import CountData, DomainError, FitError, MixtureKernel, ParseError
from .evaluate import Fingerprint, gof_test
from .functionals import FunctionalSpec, discovery_curve, estimate, good_turing_unseen
from .npmle import (
    LocalizedConfig,
    build_grid,
    fit_localized,
    fit_npmle,
    fit_penalized,
)
from .sim import config_from_json, report_to_csv, report_to_json, run_experiment

USAGE_ERROR = 2
COMPUTE_ERROR = 1


def _add_common(parser: argparse.ArgumentParser, needs_input: bool = True) -> None:
    if needs_input:
        parser.add_argument("--input", required=True, help="count file (raw or fingerprint)")
    parser.add_argument("--n", type=int, default=None, help="override the concentration")
    parser.add_argument("--k", type=int, default=None, help="override the alphabet size")
    parser.add_argument("--grid-size", type=int, default=None, help="number of grid atoms")
    parser.add_argument(
        "--kernel", choices=("poisson", "binomial"), default="poisson"
    )
    parser.add_argument("--tol", type=float, default=1e-6, help="certificate tolerance")
    parser.add_argument("--seed", type=int, default=0, help="random seed (simulation only)")
    parser.add_argument("--output", default=None, help="output path (default stdout)")
    parser.add_argument("--format", choices=("json", "csv"), default="json")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="countmix",
        description="Mixture modeling of frequency counts: fitting, functional "
        "estimation, goodness of fit, and simulation.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("fit", help="fit the mixing distribution")
    _add_common(p)

    p = sub.add_parser("estimate", help="estimate a symmetric functional")
    _add_common(p)
    p.add_argument(
        "--functional",
        required=True,
        help="entropy | power-sum:ALPHA | renyi:ALPHA | support:MINMASS | unseen:T",
    )
    p.add_argument(
        "--method",
        required=True,
        choices=("plugin", "localized", "empirical", "miller-madow", "good-turing"),
    )

    p = sub.add_parser("localized", help="fit on the small-rate cells only")
    _add_common(p)
    p.add_argument("--kappa", type=float, default=3.6, help="threshold multiplier")

    p = sub.add_parser("penalized", help="joint support-size and mixing fit")
    _add_common(p)
    p.add_argument("--c0", type=float, default=10.0, help="tie-break regularizer scale")
    p.add_argument("--c1", type=float, default=1.0, help="tie-break regularizer exponent")

    p = sub.add_parser("gof", help="chi-squared goodness of fit")
    _add_common(p)
    p.add_argument("--T", type=int, required=True, help="count truncation level")
    p.add_argument("--model", choices=("mixture", "p-model"), required=True)

    p = sub.add_parser("unseen", help="discovery curve of new categories")
    _add_common(p)
    p.add_argument("--t-grid", required=True, help="comma-separated horizons, e.g. 0.5,1,2,4")
    p.add_argument("--method", choices=("plugin", "good-turing"), default="plugin")

    p = sub.add_parser("simulate", help="run a Monte-Carlo experiment")
    _add_common(p, needs_input=False)
    p.add_argument("--config", required=True, help="experiment description (JSON)")

    return parser


def _load_counts(args) -> CountData:
    data = cmio.read_counts(args.input)
    if args.n is not None or args.k is not None:
        data = CountData(
            data.counts,
            n=args.n if args.n is not None else data.n,
            k=args.k if args.k is not None else data.k,
            tail=data.tail,
        )
    return data


def _kernel_for(args, counts: CountData) -> MixtureKernel:
    return MixtureKernel(args.kernel, counts.n)


def _parse_functional(text: str) -> FunctionalSpec:
    name, _, param = text.partition(":")
    if name == "entropy":
        return FunctionalSpec.entropy()
    if name == "power-sum":
        return FunctionalSpec.power_sum(float(param))
    if name == "renyi":
        return FunctionalSpec.renyi(float(param))
    if name == "support":
        return FunctionalSpec.support_size(float(param) if param else None)
    if name == "unseen":
        return FunctionalSpec.unseen(float(param))
    raise DomainError(f"unknown functional {text!r}")


def _emit(args, text: str) -> None:
    if args.output is None:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")
    else:
        Path(args.output).write_text(
            text if text.endswith("\n") else text + "\n", encoding="utf-8"
        )


def _csv_rows(rows: list[list]) -> str:
    buf = _io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerows(rows)
    return buf.getvalue()


def _cmd_fit(args) -> str:
    counts = _load_counts(args)
    kernel = _kernel_for(args, counts)
    grid = build_grid(counts, args.grid_size)
    fit = fit_npmle(counts, grid, kernel, args.tol)
    return cmio.write_fit(fit)


def _cmd_estimate(args) -> str:
    counts = _load_counts(args)
    spec = _parse_functional(args.functional)
    report = estimate(
        counts,
        spec,
        args.method,
        kernel=_kernel_for(args, counts),
        m=args.grid_size,
        tol=args.tol,
    )
    if args.format == "csv":
        return _csv_rows(
            [["functional", "method", "value"], [args.functional, report.method, report.value]]
        )
    return cmio.write_report(report)


def _cmd_localized(args) -> str:
    counts = _load_counts(args)
    loc = fit_localized(
        counts,
        LocalizedConfig(kappa=args.kappa),
        kernel=_kernel_for(args, counts),
        m=args.grid_size,
        tol=args.tol,
    )
    doc = {
        "v": 1,
        "type": "localized",
        "threshold": loc.threshold,
        "n_small": loc.n_small,
        "n_large": int(loc.large_counts.size),
        "fit": None if loc.empty else json.loads(cmio.write_fit(loc.fit)),
    }
    return json.dumps(doc, indent=2)


def _cmd_penalized(args) -> str:
    counts = _load_counts(args)
    result = fit_penalized(
        counts,
        m=args.grid_size,
        kernel=_kernel_for(args, counts),
        tol=args.tol,
        reg=(args.c0, args.c1),
    )
    if args.format == "csv":
        rows = [["k_prime", "objective"]] + [[kp, obj] for kp, obj in result.profile]
        return _csv_rows(rows)
    return cmio.write_report(result)


def _cmd_gof(args) -> str:
    counts = _load_counts(args)
    fingerprint = Fingerprint.from_counts(counts)
    report = gof_test(
        fingerprint,
        args.model,
        args.T,
        m=args.grid_size,
        tol=args.tol,
    )
    if args.format == "csv":
        return _csv_rows(
            [["T", "model", "statistic", "p_value"],
             [report.truncation, args.model, report.statistic, report.p_value]]
        )
    return cmio.write_report(report)


def _cmd_unseen(args) -> str:
    counts = _load_counts(args)
    horizons = [float(part) for part in args.t_grid.split(",") if part.strip()]
    if not horizons:
        raise DomainError("empty --t-grid")
    if args.method == "plugin":
        grid = build_grid(counts, args.grid_size)
        fit = fit_npmle(counts, grid, _kernel_for(args, counts), args.tol)
        curve = discovery_curve(fit.mixing, counts.k, counts.n, horizons)
    else:
        curve = [(t, good_turing_unseen(counts, t).value) for t in horizons]
    if args.format == "json":
        return json.dumps(
            {"v": 1, "type": "discovery", "method": args.method,
             "curve": [[t, v] for t, v in curve]},
            indent=2,
        )
    return _csv_rows([["t", "estimate"]] + [[t, v] for t, v in curve])


def _cmd_simulate(args) -> str:
    config_text = Path(args.config).read_text(encoding="utf-8")
    config = config_from_json(config_text)
    if args.seed:
        from dataclasses import replace

        config = replace(config, seed=args.seed)
    report = run_experiment(config)
    if args.format == "csv":
        return report_to_csv(report)
    return report_to_json(report)


_HANDLERS = {
    "fit": _cmd_fit,
    "estimate": _cmd_estimate,
    "localized": _cmd_localized,
    "penalized": _cmd_penalized,
    "gof": _cmd_gof,
    "unseen": _cmd_unseen,
    "simulate": _cmd_simulate,
}


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        text = _HANDLERS[args.command](args)
    except (DomainError, FitError, ParseError, OSError, ValueError) as exc:
        print(f"countmix {args.command}: error: {exc}", file=sys.stderr)
        return COMPUTE_ERROR
    _emit(args, text)
    return 0


if __name__ == "__main__":
    sys.exit(main())
