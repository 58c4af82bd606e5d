"""Command-line experiment runner.

Subcommands: simulate, crossing, transfer, hardness, growth, verify.
Machines are given by file path or by fixture name (parity, rotation, coin).
Reports are CSV (default) or JSON; all numeric CSV values carry 17
significant digits so doubles round-trip exactly, and every run is
deterministic given its seed.  The timestamp header line can be suppressed
for byte-identical reruns.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
import time
from pathlib import Path

from . import langs, verify
from .hardness import nonregularity
from .machine import (
    MachineFormatError,
    exact_run,
    fixture_path,
    load_machine,
    monte_carlo_run,
    to_convenient_form,
)
from .transfer import (
    accept_profile,
    crossing_distances,
    crossing_sequence,
    dual_transfer_operator,
    prefix_region,
    transfer_operator,
)

SCHEMA_VERSION = "1"


def _fmt(value) -> str:
    if isinstance(value, float):
        return f"{value:.17g}"
    return str(value)


class Report:
    """Rows plus a header; rendered as CSV or JSON."""

    def __init__(self, columns: list[str]):
        self.columns = ["schema_version", *columns]
        self.rows: list[list] = []

    def add(self, *values):
        self.rows.append([SCHEMA_VERSION, *values])

    def write(self, out, fmt: str, timestamp: bool):
        if fmt == "json":
            payload = [dict(zip(self.columns, row)) for row in self.rows]
            out.write(json.dumps(payload, indent=2))
            out.write("\n")
            return
        if timestamp:
            out.write(f"# generated {time.strftime('%Y-%m-%dT%H:%M:%S')}\n")
        out.write(",".join(self.columns) + "\n")
        for row in self.rows:
            out.write(",".join(_fmt(v) for v in row) + "\n")


def _resolve_machine(name: str):
    path = Path(name)
    if not path.exists():
        candidate = fixture_path(name)
        if candidate.exists():
            path = candidate
        else:
            raise MachineFormatError(f"no machine file or fixture named {name!r}")
    return load_machine(path)


def _emit(report: Report, args) -> None:
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            report.write(fh, args.format, timestamp=not args.no_timestamp)
    else:
        report.write(sys.stdout, args.format, timestamp=not args.no_timestamp)


def cmd_simulate(args) -> int:
    spec = _resolve_machine(args.machine)
    stats = exact_run(spec, args.input, args.step_cap)
    columns = ["input", "t", "p_acc", "p_rej", "p_run"]
    empirical = None
    if args.trials:
        empirical = monte_carlo_run(spec, args.input, args.trials, args.step_cap, args.seed)
        columns += ["emp_acc", "emp_rej"]
    report = Report(columns)
    for t in range(args.step_cap + 1):
        acc = float(stats.p_accept_by_step[t])
        rej = float(stats.p_reject_by_step[t])
        row = [args.input, t, acc, rej, 1.0 - acc - rej]
        if empirical is not None:
            row += [float(empirical.p_accept_by_step[t]), float(empirical.p_reject_by_step[t])]
        report.add(*row)
    _emit(report, args)
    return 0


def cmd_crossing(args) -> int:
    spec = to_convenient_form(_resolve_machine(args.machine))
    cs = crossing_sequence(spec, args.x, args.y, args.m, args.length)
    profile = accept_profile(cs)
    columns = ["x", "y", "m", "i", *spec.classical_states]
    dists = None
    if args.x2 is not None:
        cs2 = crossing_sequence(spec, args.x2, args.y, args.m, args.length)
        dists = crossing_distances(cs, cs2)
        columns.append("distance_to_x2")
    report = Report(columns)
    for i, marg in enumerate(profile, start=1):
        row = [args.x, args.y, args.m, i] + [marg[c] for c in spec.classical_states]
        if dists is not None:
            row.append(dists[i - 1])
        report.add(*row)
    _emit(report, args)
    return 0


def cmd_transfer(args) -> int:
    spec = to_convenient_form(_resolve_machine(args.machine))
    if args.side == "prefix":
        op = transfer_operator(prefix_region(spec, args.x), args.m)
    else:
        op = dual_transfer_operator(spec, args.x, args.m)
    payload = op.to_json_dict()
    text = json.dumps(payload, indent=2)
    if args.out:
        Path(args.out).write_text(text + "\n", encoding="utf-8")
    else:
        print(text)
    return 0


def cmd_hardness(args) -> int:
    oracles = langs.builtin_oracles()
    if args.language not in oracles:
        print(f"unknown language {args.language!r}; available: {sorted(oracles)}", file=sys.stderr)
        return 2
    report_obj = nonregularity(
        oracles[args.language], args.n, mode=args.mode, string_budget=args.budget
    )
    report = Report(["language", "n", "d_exact", "d_lower", "c_bits", "method", "witness_count"])
    report.add(
        report_obj.language,
        report_obj.n,
        "" if report_obj.d_exact is None else report_obj.d_exact,
        report_obj.d_lower,
        report_obj.c_bits,
        report_obj.method,
        len(report_obj.witness_set),
    )
    _emit(report, args)
    return 0


def cmd_growth(args) -> int:
    groups = langs.builtin_groups()
    if args.group not in groups:
        print(f"unknown group {args.group!r}; available: {sorted(groups)}", file=sys.stderr)
        return 2
    table, _ = langs.growth(groups[args.group], args.n, budget=args.budget)
    report = Report(["group", "radius", "count"])
    for group, radius, count in table.csv_rows():
        report.add(group, radius, count)
    _emit(report, args)
    return 0


def cmd_verify(args) -> int:
    overrides = {}
    if args.config:
        overrides = json.loads(Path(args.config).read_text(encoding="utf-8"))
    overrides.setdefault("seed", args.seed)
    if args.random_machines is not None:
        overrides["random_machines"] = args.random_machines
    known = {f for f in verify.VerifyConfig.__dataclass_fields__}
    unknown = set(overrides) - known
    if unknown:
        print(f"unknown config keys: {sorted(unknown)}", file=sys.stderr)
        return 2
    if "machine_paths" in overrides:
        overrides["machine_paths"] = tuple(overrides["machine_paths"])
    if "m_values" in overrides:
        overrides["m_values"] = tuple(overrides["m_values"])
    config = verify.VerifyConfig(**overrides)
    results = verify.run_all(config)
    for line in verify.summary_lines(results):
        print(line)
    report = Report(["check_id", "instances", "worst_slack", "passed"])
    for r in results:
        slack = "inf" if math.isinf(r.worst_slack) else r.worst_slack
        report.add(r.check_id, r.instances, slack, r.passed)
    if args.out:
        if args.format == "json":
            Path(args.out).write_text(
                json.dumps([r.to_json_dict() for r in results], indent=2, default=str) + "\n",
                encoding="utf-8",
            )
        else:
            with open(args.out, "w", encoding="utf-8") as fh:
                report.write(fh, "csv", timestamp=not args.no_timestamp)
    return 0 if all(r.passed for r in results) else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qcfa",
        description="Two-way quantum-classical automata: simulation, transfer "
        "operators, crossing sequences, hardness measures, and verification.",
    )
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="seed for all randomized steps")
    common.add_argument("--out", help="write the report to this file instead of stdout")
    common.add_argument("--format", choices=("csv", "json"), default="csv")
    common.add_argument("--budget", type=int, default=8191,
                        help="string/element budget for hardness and growth")
    common.add_argument("--no-timestamp", action="store_true",
                        help="omit the timestamp header for byte-identical reruns")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_parser(name, **kwargs):
        return sub.add_parser(name, parents=[common], **kwargs)

    p = add_parser("simulate", help="exact (and optionally sampled) runs of a machine")
    p.add_argument("machine")
    p.add_argument("input")
    p.add_argument("--step-cap", type=int, default=200)
    p.add_argument("--trials", type=int, default=0)
    p.set_defaults(func=cmd_simulate)

    p = add_parser("crossing", help="crossing-sequence classical marginals")
    p.add_argument("machine")
    p.add_argument("-x", required=True)
    p.add_argument("-y", required=True)
    p.add_argument("-m", type=int, default=50)
    p.add_argument("--length", type=int, default=10)
    p.add_argument("--x2", help="second prefix; adds a per-index distance column")
    p.set_defaults(func=cmd_crossing)

    p = add_parser("transfer", help="export a truncated transfer operator as JSON")
    p.add_argument("machine")
    p.add_argument("-x", required=True)
    p.add_argument("-m", type=int, default=50)
    p.add_argument("--side", choices=("prefix", "suffix"), default="prefix")
    p.set_defaults(func=cmd_transfer)

    p = add_parser("hardness", help="nonregularity of a built-in language")
    p.add_argument("language")
    p.add_argument("-n", type=int, required=True)
    p.add_argument("--mode", choices=("exact", "lower"), default="exact")
    p.set_defaults(func=cmd_hardness)

    p = add_parser("growth", help="Cayley-ball growth table of a built-in group")
    p.add_argument("group")
    p.add_argument("-n", type=int, required=True)
    p.set_defaults(func=cmd_growth)

    p = add_parser("verify", help="run the full verification suite")
    p.add_argument("--config", help="JSON config file (same keys as VerifyConfig)")
    p.add_argument("--random-machines", type=int, default=None)
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except MachineFormatError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
