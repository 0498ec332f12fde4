"""Command-line entry point.

Exit codes: 0 success, 1 verification failure, 2 usage error.  Randomized
subcommands take an explicit ``--seed``; nothing reads the clock.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from typing import Optional, Sequence

from . import analysis, channel, verification
from .model import ProblemInstance, ScaleOracle
from .search import search

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_USAGE = 2

CHANNEL_MAX_L = 6
RUN_CSV_HEADER = ["index", "stage", "descriptor", "outcome"]


class UsageError(Exception):
    pass


def _csv(header: list, rows: list) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


def _json(doc) -> str:
    return json.dumps(doc, indent=2) + "\n"


def _forged_list(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(x) for x in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected three comma-separated integers, got {text!r}")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="coinsearch",
        description="Find three forged coins by weighing; adder-channel feedback code.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, help, default_format):
        p = sub.add_parser(name, help=help)
        p.add_argument("--format", choices=["json", "csv"], default=default_format)
        p.add_argument("--out", metavar="PATH", help="write here instead of stdout")
        return p

    p = add("run", "search one instance and print its trace", "json")
    p.add_argument("--m", type=int, required=True)
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--forged", type=_forged_list, help="e.g. 0,4,7")
    src.add_argument("--seed", type=int, help="sample a uniform placement")

    p = add("verify", "exhaustive sweep over every placement", "csv")
    p.add_argument("--m-max", type=int, required=True)
    p.add_argument("--m-min", type=int, default=2)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--histogram", action="store_true",
                   help="emit the total-weighings histogram (m,total,count) as CSV")

    p = add("montecarlo", "mean weighings over sampled placements", "csv")
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--trials", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--workers", type=int, default=1)

    p = add("analyze", "mean-duration table: nested sum, closed form, rate", "csv")
    p.add_argument("--m-min", type=int, required=True)
    p.add_argument("--m-max", type=int, required=True)
    p.add_argument("--exact", action="store_true",
                   help=f"fill exact_mean by exhaustive sweep (rows with m <= {verification.SWEEP_MAX_M})")
    p.add_argument("--mc-trials", type=int)
    p.add_argument("--seed", type=int)

    p = add("channel-simulate", "one adder-channel session", "json")
    p.add_argument("--l", type=int, required=True)
    p.add_argument("--m1", type=int, required=True)
    p.add_argument("--m2", type=int, required=True)
    p.add_argument("--m3", type=int, required=True)

    p = add("channel-verify", "zero-error check over every message triple", "csv")
    p.add_argument("--l-max", type=int, required=True)
    p.add_argument("--l-min", type=int, default=1)
    return parser


def _require(cond: bool, message: str) -> None:
    if not cond:
        raise UsageError(message)


def _check_seed(seed: Optional[int]) -> None:
    if seed is not None:
        _require(0 <= seed < 1 << verification.SEED_BITS,
                 f"--seed must be in [0, 2**{verification.SEED_BITS})")


def cmd_run(args) -> tuple[int, str]:
    _require(args.m >= 2, "--m must be >= 2")
    _check_seed(args.seed)
    if args.forged is not None:
        _require(len(args.forged) == 3, "--forged needs exactly three coins")
        try:
            instance = ProblemInstance(args.m, args.forged)
        except ValueError as exc:
            raise UsageError(str(exc))
    else:
        (forged,) = verification.sample_placements(args.m, 1, args.seed)
        instance = ProblemInstance(args.m, forged)
    oracle = ScaleOracle(instance)
    trace = search(oracle, args.m)
    ok = not verification.check_trace(trace, instance, oracle.query_count)
    if args.format == "json":
        out = trace.dumps()
    else:
        rows = [[i, tag, json.dumps(d.to_json(), separators=(",", ":")), k]
                for i, ((d, k), tag) in enumerate(zip(trace.weighings, trace.stages()), 1)]
        out = _csv(RUN_CSV_HEADER, rows)
    return (EXIT_OK if ok else EXIT_FAILED), out


def cmd_verify(args) -> tuple[int, str]:
    top = verification.SWEEP_MAX_M
    _require(2 <= args.m_min <= args.m_max <= top, f"need 2 <= --m-min <= --m-max <= {top}")
    _require(args.workers >= 1, "--workers must be >= 1")
    reports = [verification.exhaustive_verify(m, workers=args.workers)
               for m in range(args.m_min, args.m_max + 1)]
    code = EXIT_OK if all(r.passed for r in reports) else EXIT_FAILED
    if args.format == "json":
        return code, _json([r.to_json() for r in reports])
    if args.histogram:
        rows = [row for r in reports for row in r.histogram_rows()]
        return code, _csv(verification.HISTOGRAM_CSV_HEADER, rows)
    return code, _csv(verification.SWEEP_CSV_HEADER, [r.csv_row() for r in reports])


def cmd_montecarlo(args) -> tuple[int, str]:
    _require(args.m >= 2, "--m must be >= 2")
    _require(args.trials >= 1, "--trials must be >= 1")
    _require(args.workers >= 1, "--workers must be >= 1")
    _check_seed(args.seed)
    report = verification.monte_carlo(args.m, args.trials, args.seed, workers=args.workers)
    if args.format == "json":
        return EXIT_OK, _json(report.to_json())
    return EXIT_OK, _csv(verification.MC_CSV_HEADER, [report.csv_row()])


def cmd_analyze(args) -> tuple[int, str]:
    _require(2 <= args.m_min <= args.m_max, "need 2 <= --m-min <= --m-max")
    if args.mc_trials is not None:
        _require(args.mc_trials >= 1, "--mc-trials must be >= 1")
        _require(args.seed is not None, "--mc-trials requires an explicit --seed")
    _check_seed(args.seed)
    reports = [
        analysis.duration_report(
            m,
            exact=args.exact and m <= verification.SWEEP_MAX_M,
            mc_trials=args.mc_trials,
            seed=args.seed,
        )
        for m in range(args.m_min, args.m_max + 1)
    ]
    if args.format == "json":
        return EXIT_OK, _json([r.to_json() for r in reports])
    return EXIT_OK, _csv(analysis.ANALYZE_CSV_HEADER, [r.csv_row() for r in reports])


def cmd_channel_simulate(args) -> tuple[int, str]:
    _require(1 <= args.l <= 64, "--l must be in [1, 64]")
    try:
        msgs = channel.MessageTriple(args.l, args.m1, args.m2, args.m3)
    except ValueError as exc:
        raise UsageError(str(exc))
    transcript, decoded = channel.session(args.l, msgs)
    code = EXIT_OK if decoded == msgs else EXIT_FAILED
    if args.format == "json":
        return code, _json(channel.session_json(msgs, transcript, decoded))
    rows = [[s.stage, s.k, *s.inputs, s.output] for s in transcript.slots]
    return code, _csv(["stage", "k", "x1", "x2", "x3", "output"], rows)


def cmd_channel_verify(args) -> tuple[int, str]:
    _require(1 <= args.l_min <= args.l_max <= CHANNEL_MAX_L,
             f"need 1 <= --l-min <= --l-max <= {CHANNEL_MAX_L}")
    reports = [channel.verify_channel(l) for l in range(args.l_min, args.l_max + 1)]
    for r in reports:
        status = "PASS" if r.passed else "FAIL"
        print(f"{status} l={r.l} sessions={r.sessions} failures={len(r.failures)} "
              f"mean={r.exact_mean}", file=sys.stderr)
    code = EXIT_OK if all(r.passed for r in reports) else EXIT_FAILED
    if args.format == "json":
        return code, _json([r.to_json() for r in reports])
    rows = [row for r in reports for row in r.histogram_rows()]
    return code, _csv(channel.CHANNEL_CSV_HEADER, rows)


COMMANDS = {
    "run": cmd_run,
    "verify": cmd_verify,
    "montecarlo": cmd_montecarlo,
    "analyze": cmd_analyze,
    "channel-simulate": cmd_channel_simulate,
    "channel-verify": cmd_channel_verify,
}


def dispatch(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    try:
        code, out = COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"coinsearch {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(out)
    else:
        sys.stdout.write(out)
    return code


def main() -> None:
    sys.exit(dispatch())
