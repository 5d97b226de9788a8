"""Command-line interface.

Exit statuses: 0 ok, 2 usage, 3 parse, 4 estimation, 5 non-convergence.
"""

from __future__ import annotations

import argparse
import contextlib
import math
import os
import sys
from typing import Optional, Sequence

from . import __version__
from .additive import ESTIMATORS, ReportConfig, build_report
from .bootstrap import SCHEMES, BootstrapConfig, bootstrap_measures, default_workers
from .closed_form import DEFAULT_Z, CombinedSummaryInput, combined_se_from_summary, wald_ci
from .errors import ConvergenceError, EstimationError, ParseError
from .formats import (
    dumps,
    format_report,
    parse_count,
    read_exposure_matrix,
    read_records,
    report_to_dict,
    report_tsv,
    write_records,
    write_scan_tsv,
)
from .glm import fit_combined_model
from .scan import scan_pairs, sort_rows
from .sim import SimConfig, simulate_cohort
from .tables import CELL_NAMES, ContingencyTable, table_from_records

EXIT_OK, EXIT_USAGE, EXIT_PARSE, EXIT_ESTIMATION, EXIT_CONVERGENCE = 0, 2, 3, 4, 5


class UsageError(Exception):
    pass


def _env_seed() -> int:
    return int(os.environ.get("EPIINTERACT_SEED", "0"))


@contextlib.contextmanager
def _output(path: Optional[str]):
    if path is None or path == "-":
        yield sys.stdout
    else:
        with open(path, "w", newline="") as fh:
            yield fh


def _add_report_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument(
        "--correction",
        nargs="?",
        type=float,
        const=0.5,
        default=None,
        metavar="AMOUNT",
        help="add AMOUNT (default 0.5) to every cell before estimating",
    )
    p.add_argument("--z", type=float, default=DEFAULT_Z, help="CI multiplier (default 1.96)")
    p.add_argument("--estimator", choices=ESTIMATORS, default="closed-form")
    p.add_argument("--format", choices=("pretty", "json", "tsv"), default="pretty")
    p.add_argument("-o", "--output", help="write here instead of stdout")


def _add_count_flags(p: argparse.ArgumentParser, required: bool) -> None:
    g = p.add_argument_group("cell counts (a: X=0,Y=0  b: X=0,Y=1  c: X=1,Y=0  d: X=1,Y=1)")
    for name in CELL_NAMES:
        g.add_argument(f"--{name}", required=required, metavar="N")


def _add_record_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--outcome", default="Z", help="outcome column (default Z)")
    p.add_argument("--exposure1", default="X", help="first exposure column (default X)")
    p.add_argument("--exposure2", default="Y", help="second exposure column (default Y)")
    p.add_argument("--sep", help="field delimiter (default: tab for .tsv/.txt, else comma)")
    p.add_argument("--na", default="NA", help="missing-value token (default NA)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="epiinteract",
        description="Odds ratios and interaction measures for two binary exposures.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("table", help="report from the eight cell counts")
    _add_count_flags(p, required=True)
    _add_report_flags(p)

    p = sub.add_parser("fit", help="report from an individual-level records file")
    p.add_argument("records")
    _add_record_flags(p)
    _add_report_flags(p)
    p.add_argument("--combined", action="store_true", help="also fit Z ~ T on the corner strata")

    p = sub.add_parser("summary", help="combined-exposure SE from published summary statistics")
    p.add_argument("--beta-xplusy", type=float, help="combined log OR (or give the three terms)")
    p.add_argument("--beta-x", type=float)
    p.add_argument("--beta-y", type=float)
    p.add_argument("--beta-xy", type=float)
    p.add_argument("--beta0", type=float, required=True, help="intercept")
    p.add_argument("--se0", type=float, required=True, help="SE of the intercept")
    p.add_argument("--n11", type=float, required=True, help="number doubly exposed")
    p.add_argument("--z", type=float, default=DEFAULT_Z)
    p.add_argument("--format", choices=("pretty", "json"), default="pretty")
    p.add_argument("-o", "--output")

    p = sub.add_parser("scan", help="all exposure pairs in a matrix file, TSV out")
    p.add_argument("matrix")
    p.add_argument("--outcome", default="Z")
    p.add_argument("--exposures", help="comma-separated columns (default: all but outcome)")
    p.add_argument("--sep")
    p.add_argument("--na", default="NA")
    p.add_argument("--correction", nargs="?", type=float, const=0.5, default=None, metavar="AMOUNT")
    p.add_argument("--z", type=float, default=DEFAULT_Z)
    p.add_argument("--workers", type=int, default=None)
    p.add_argument("-o", "--output")

    p = sub.add_parser("bootstrap", help="percentile CIs for RERI, AP, SI and MI")
    p.add_argument("records", nargs="?", help="records file (otherwise give cell counts)")
    _add_record_flags(p)
    _add_count_flags(p, required=False)
    p.add_argument("--replicates", type=int, default=2000)
    p.add_argument("--seed", type=int, default=None, help="default $EPIINTERACT_SEED or 0")
    p.add_argument("--scheme", choices=SCHEMES, default="stratified")
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--workers", type=int, default=None)
    p.add_argument("--z", type=float, default=DEFAULT_Z)
    p.add_argument("--format", choices=("pretty", "json"), default="json")
    p.add_argument("-o", "--output")

    p = sub.add_parser("simulate", help="write a simulated cohort as a records file")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--p-x", type=float, default=0.5)
    p.add_argument("--p-y", type=float, default=0.5)
    p.add_argument("--beta0", type=float, default=0.0)
    p.add_argument("--beta-x", type=float, default=0.0)
    p.add_argument("--beta-y", type=float, default=0.0)
    p.add_argument("--beta-xy", type=float, default=0.0)
    p.add_argument("--seed", type=int, default=None, help="default $EPIINTERACT_SEED or 0")
    p.add_argument("--sep", default=",")
    p.add_argument("-o", "--output")
    return parser


def _table_from_counts(args) -> ContingencyTable:
    values = {}
    for name in CELL_NAMES:
        token = getattr(args, name)
        if token is None:
            raise UsageError(f"missing --{name}")
        values[name] = parse_count(name, token)
    return ContingencyTable(**values)


def _report_config(args) -> ReportConfig:
    try:
        return ReportConfig(
            z=args.z,
            correction=getattr(args, "correction", None),
            estimator=getattr(args, "estimator", "closed-form"),
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def _emit_report(args, report, combined=None) -> None:
    with _output(args.output) as fh:
        if args.format == "json":
            fh.write(dumps(report_to_dict(report, combined_fit=combined)))
        elif args.format == "tsv":
            fh.write(report_tsv(report))
        else:
            fh.write(format_report(report, combined_fit=combined))


def cmd_table(args) -> int:
    config = _report_config(args)
    report = build_report(_table_from_counts(args), config)
    _emit_report(args, report)
    return EXIT_OK


def _tabulate_records(args):
    rs = read_records(args.records, args.outcome, args.exposure1, args.exposure2, args.sep, args.na)
    t, dropped = table_from_records(rs)
    if t.n == 0:
        raise EstimationError("no complete cases")
    return rs, t, dropped


def cmd_fit(args) -> int:
    config = _report_config(args)
    rs, t, dropped = _tabulate_records(args)
    report = build_report(t, config, dropped=dropped)
    combined = fit_combined_model(rs) if args.combined else None
    _emit_report(args, report, combined)
    return EXIT_OK


def cmd_summary(args) -> int:
    try:
        inp = CombinedSummaryInput(
            beta0=args.beta0,
            se0=args.se0,
            n11=args.n11,
            betaXplusY=args.beta_xplusy,
            betaX=args.beta_x,
            betaY=args.beta_y,
            betaXY=args.beta_xy,
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    se = combined_se_from_summary(inp)
    lo, hi = wald_ci(inp.betaXplusY, se, args.z)
    out = {
        "betaXplusY": inp.betaXplusY,
        "j": inp.j,
        "seXplusY": se,
        "or11": math.exp(inp.betaXplusY),
        "ci11": [lo, hi],
    }
    with _output(args.output) as fh:
        if args.format == "json":
            fh.write(dumps(out))
        else:
            fh.write(
                f"beta(X+Y) = {inp.betaXplusY:.7g}\n"
                f"J         = {inp.j:.7g}\n"
                f"SE(X+Y)   = {se:.7g}\n"
                f"OR11      = {out['or11']:.7g}   ({lo:.7g}, {hi:.7g})\n"
            )
    return EXIT_OK


def cmd_scan(args) -> int:
    exposures = args.exposures.split(",") if args.exposures else None
    mat = read_exposure_matrix(args.matrix, args.outcome, exposures, args.sep, args.na)
    if mat.m < 2:
        raise UsageError("scan needs at least two exposure columns")
    config = ReportConfig(z=args.z, correction=args.correction)
    workers = default_workers() if args.workers is None else args.workers
    rows = sort_rows(scan_pairs(mat, config, workers=workers))
    with _output(args.output) as fh:
        write_scan_tsv(rows, fh)
    return EXIT_OK


def cmd_bootstrap(args) -> int:
    if args.records:
        _, t, dropped = _tabulate_records(args)
    else:
        t, dropped = _table_from_counts(args), 0
    seed = _env_seed() if args.seed is None else args.seed
    try:
        cfg = BootstrapConfig(
            replicates=args.replicates, seed=seed, scheme=args.scheme, alpha=args.alpha
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    report = build_report(t, _report_config(args), dropped=dropped)
    result = bootstrap_measures(t, cfg, workers=args.workers)
    with _output(args.output) as fh:
        if args.format == "json":
            fh.write(dumps(report_to_dict(report, bootstrap=result)))
        else:
            fh.write(format_report(report, bootstrap=result))
    return EXIT_OK


def cmd_simulate(args) -> int:
    seed = _env_seed() if args.seed is None else args.seed
    try:
        cfg = SimConfig(
            n=args.n,
            p_x=args.p_x,
            p_y=args.p_y,
            beta0=args.beta0,
            betaX=args.beta_x,
            betaY=args.beta_y,
            betaXY=args.beta_xy,
            seed=seed,
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    rs = simulate_cohort(cfg)
    with _output(args.output) as fh:
        write_records(rs, fh, sep=args.sep)
    return EXIT_OK


COMMANDS = {
    "table": cmd_table,
    "fit": cmd_fit,
    "summary": cmd_summary,
    "scan": cmd_scan,
    "bootstrap": cmd_bootstrap,
    "simulate": cmd_simulate,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        parser.error(str(exc))  # exits with status 2
    except ParseError as exc:
        print(f"epiinteract: parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except ConvergenceError as exc:
        print(f"epiinteract: {exc}", file=sys.stderr)
        return EXIT_CONVERGENCE
    except EstimationError as exc:
        print(f"epiinteract: estimation error: {exc}", file=sys.stderr)
        return EXIT_ESTIMATION
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
