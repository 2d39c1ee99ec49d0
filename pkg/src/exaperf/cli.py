"""Command-line entry point: ``exaperf <subcommand> --machine ... [--method ...]``."""

import argparse
import json
from pathlib import Path
import sys

from . import report
from .errors import ModelError

SUBCOMMANDS = ("cost", "roofline", "energy", "project", "resilience", "report", "compare")


def _ai_range(text):
    try:
        lo, hi, points = text.split(":")
        lo, hi, points = float(lo), float(hi), int(points)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected lo:hi:points, got {text!r}") from None
    if not (0 < lo <= hi) or points < 1 or (points > 1 and lo == hi):
        raise argparse.ArgumentTypeError(f"bad AI range {text!r}")
    return lo, hi, points


def build_parser():
    parser = argparse.ArgumentParser(
        prog="exaperf",
        description="Analytical cost, energy and resilience models for FFT, FMM and multigrid.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in SUBCOMMANDS:
        p = sub.add_parser(name)
        if name == "compare":
            p.add_argument("--machine", nargs="+", required=True,
                           help="two or more machine files or bundled names")
        else:
            p.add_argument("--machine", required=True, help="machine file or bundled name")
        p.add_argument("--method", help="method file or bundled name")
        p.add_argument("--out", default="-", help="output directory, or - for stdout")
        p.add_argument("--format", choices=("csv", "json"), default="csv")
        p.add_argument("--overlap", choices=("sum", "max"), default="sum")
        p.add_argument("--horizon", type=float, default=10.0, help="projection horizon (years)")
        p.add_argument("--network", choices=("full", "torus3d"),
                       help="override the machine's topology")
        p.add_argument("--ai-range", type=_ai_range, default=(2.0 ** -4, 2.0 ** 10, 64),
                       metavar="LO:HI:POINTS")
    return parser


def _tables(args, scn):
    """Tables for one subcommand; the first one is what ``--out -`` streams."""
    lo, hi, points = args.ai_range
    cmd = args.command
    if cmd == "cost":
        return [report.cost_table(scn)], None
    if cmd == "roofline":
        tables = [report.roofline_table(scn.machine, lo, hi, points)]
        if scn.method is not None:
            tables.append(report.kernel_points_table(scn))
        return tables, None
    if cmd == "energy":
        tables = [report.energy_table(scn, lo, hi, points)]
        if scn.method is not None:
            tables.append(report.kernel_energy_table(scn))
        return tables, None
    if cmd == "project":
        machine, rows = report.projection(scn, args.horizon)
        return [report.projection_table(rows)], machine
    if cmd == "resilience":
        return [report.resilience_table(report.scenario_vulnerability(scn))], None
    raise AssertionError(cmd)


def _emit(args, tables, machine=None):
    if args.out == "-":
        sys.stdout.write(report.render(tables[0], args.format))
        return
    out = Path(args.out)
    for table in tables:
        report.atomic_write(out / f"{table.name}.{args.format}", report.render(table, args.format))
    if machine is not None:
        report.atomic_write(out / "projected_machine.json",
                            json.dumps({"machine": machine.to_dict()}, indent=2) + "\n")


def _load(args, machine_ref, outputs):
    scn = report.load_scenario(machine_ref, args.method, args.network, args.overlap, outputs)
    errors = report.scenario_errors(scn)
    if errors:
        raise _Invalid(errors)
    return scn


class _Invalid(Exception):
    def __init__(self, messages):
        super().__init__("\n".join(messages))
        self.messages = messages


def _run(args):
    if args.command == "compare":
        if args.method is None:
            raise _Invalid(["compare: --method is required"])
        scenarios = [_load(args, ref, ("compare",)) for ref in args.machine]
        _emit(args, [report.compare(scenarios)])
        return
    if args.command == "report":
        if args.out == "-":
            raise _Invalid(["report: --out must be a directory"])
        scn = _load(args, args.machine, ())
        report.write_report(scn, args.out, args.format, args.horizon, args.ai_range)
        return
    scn = _load(args, args.machine, (args.command,))
    tables, machine = _tables(args, scn)
    _emit(args, tables, machine)


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        _run(args)
    except _Invalid as exc:
        for line in exc.messages:
            print(line, file=sys.stderr)
        return 1
    except ModelError as exc:
        print(str(exc), file=sys.stderr)
        return 1
    except OSError as exc:
        print(str(exc), file=sys.stderr)
        return 2
    return 0


run = main

if __name__ == "__main__":
    sys.exit(main())
