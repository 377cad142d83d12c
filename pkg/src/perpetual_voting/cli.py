"""Command-line front end.

Exit codes: 0 success, 1 runtime failure (message on stderr), 2 invalid flags.
Every subcommand also accepts ``--config file.json`` whose keys are flag
names (``max_subset_size`` or ``max-subset-size``); explicit flags win.
"""

from __future__ import annotations

import argparse
import json
import sys

from .adversaries import AdversarySpec
from .conflicts import conflict_report
from .errors import InputError, PerpetualVotingError
from .game import GameParams, PlayRecord
from .harness import ExperimentSpec, run_experiment, sweep, verify_transcript
from .strategies import STRATEGY_IDS, minimax_solve


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(2, f"{self.prog}: error: {message}\n")


def _add_config(p):
    p.add_argument("--config", help="JSON file of flag values")


def build_parser():
    parser = _Parser(prog="perpetual-voting", description="Perpetual approval voting under bounded conflicts")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    run = sub.add_parser("run", help="play one experiment and print its bound report")
    run.add_argument("--k", type=int)
    run.add_argument("--n", type=int)
    run.add_argument("--t", type=int)
    run.add_argument("--c", type=int)
    run.add_argument("--strategy", choices=STRATEGY_IDS)
    run.add_argument("--adversary", help="id or id:key=value,... e.g. group_product:M=2")
    run.add_argument("--seed", type=int, default=0)
    run.add_argument("--repeats", type=int, default=1)
    run.add_argument("--epsilon", type=float, help="fixed epsilon for exponential_weights")
    run.add_argument("--out", help="directory for transcripts and report.json")
    _add_config(run)

    sw = sub.add_parser("sweep", help="run a grid of experiments into a CSV table")
    sw.add_argument("--grid", help="JSON array of experiment objects")
    sw.add_argument("--out", help="CSV path (default: stdout)")
    sw.add_argument("--workers", type=int, default=1)
    _add_config(sw)

    audit = sub.add_parser("audit", help="conflict numbers of a stored transcript")
    audit.add_argument("--transcript")
    audit.add_argument("--max-subset-size", type=int)
    audit.add_argument("--budget", type=int, help="enumeration budget (default from environment)")
    audit.add_argument("--json", action="store_true", help="print the report as JSON")
    _add_config(audit)

    solve = sub.add_parser("solve", help="exact minimax value of a toy game")
    solve.add_argument("--k", type=int, default=2)
    solve.add_argument("--n", type=int)
    solve.add_argument("--t", type=int)
    solve.add_argument("--c", type=int)
    solve.add_argument("--out", help="write the decision table as JSON")
    _add_config(solve)

    verify = sub.add_parser("verify", help="re-derive the weight-sum certificate of an exponential weights transcript")
    verify.add_argument("--transcript")
    verify.add_argument("--epsilon", type=float, help="override the epsilon recorded in the transcript")
    _add_config(verify)
    return parser


REQUIRED = {
    "run": ("strategy", "adversary"),
    "sweep": ("grid",),
    "audit": ("transcript",),
    "solve": ("n", "t"),
    "verify": ("transcript",),
}


def _parse(argv):
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command is None:
        parser.error("a subcommand is required")
    sub = parser._subparsers._group_actions[0].choices[args.command]
    if args.config:
        try:
            with open(args.config) as fh:
                config = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            sub.error(f"cannot read --config {args.config}: {exc}")
        if not isinstance(config, dict):
            sub.error("--config must hold a JSON object")
        known = {a.dest for a in sub._actions}
        defaults = {}
        for key, value in config.items():
            dest = key.replace("-", "_").lower()
            if dest not in known:
                sub.error(f"unknown config key {key!r}")
            defaults[dest] = value
        sub.set_defaults(**defaults)
        args = parser.parse_args(argv)
    missing = [name for name in REQUIRED[args.command] if getattr(args, name) is None]
    if missing:
        sub.error("the following arguments are required: " + ", ".join("--" + m for m in missing))
    return args


def cmd_run(args):
    strategy_params = {"epsilon": args.epsilon} if args.epsilon is not None else {}
    spec = ExperimentSpec.create(args.strategy, AdversarySpec.parse(args.adversary), k=args.k, N=args.n,
                                 T=args.t, C=args.c, seed=args.seed, repeats=args.repeats, output=args.out,
                                 strategy_params=strategy_params)
    result = run_experiment(spec)
    p = spec.params
    print(f"k={p.k} N={p.N} T={p.T} C={'n/a' if p.C is None else p.C} "
          f"strategy={spec.strategy} adversary={spec.adversary} seed={spec.seed}")
    print(result.report.summary())
    if args.out:
        print(f"transcript written to {args.out}")
    return 0


def cmd_sweep(args):
    grid = args.grid
    if isinstance(grid, str):
        with open(grid) as fh:
            grid = json.load(fh)
    if not isinstance(grid, list):
        raise InputError("sweep grid must be a JSON array of experiment objects")
    specs = [ExperimentSpec.from_dict(item) for item in grid]
    table = sweep(specs, workers=args.workers)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(table)
    else:
        sys.stdout.write(table)
    return 0


def cmd_audit(args):
    play = PlayRecord.load_json(args.transcript)
    report = conflict_report(play, budget=args.budget, max_subset_size=args.max_subset_size)
    if args.json:
        print(json.dumps(report.to_dict(), sort_keys=True))
        return 0
    fmt = lambda w: "-" if w is None else ",".join(map(str, w))
    print(f"subset_conflict_number={report.subset_conflict_number}")
    print(f"tuple_conflict_number={report.tuple_conflict_number}")
    print(f"witness_subset={fmt(report.witness_subset)}")
    print(f"witness_tuple={fmt(report.witness_tuple)}")
    print(f"max_subset_size={report.max_subset_size}")
    return 0


def cmd_solve(args):
    params = GameParams(args.k, args.n, args.t, args.c)
    value, solution = minimax_solve(params)
    print(f"k={params.k} N={params.N} T={params.T} C={'n/a' if params.C is None else params.C}")
    print(f"value={value}")
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(solution.to_json(indent=1))
            fh.write("\n")
        print(f"decision table written to {args.out}")
    return 0


def cmd_verify(args):
    play = PlayRecord.load_json(args.transcript)
    certs = verify_transcript(play, args.epsilon)
    for i, cert in enumerate(certs):
        tag = f"epoch {i + 1}: " if len(certs) > 1 else ""
        print(f"{tag}epsilon={cert.epsilon:.6g} log_bound={cert.log_rhs:.6g} max_log_weight={cert.max_lhs:.6g}")
    bad = next((c for c in certs if not c.ok), None)
    if bad is None:
        print("certificate=ok")
        return 0
    offset = sum(len(c.deltas) for c in certs[: certs.index(bad)])
    print("certificate=violated")
    print(f"first violation at round {offset + bad.first_violation}: {bad.reason}", file=sys.stderr)
    return 1


COMMANDS = {"run": cmd_run, "sweep": cmd_sweep, "audit": cmd_audit, "solve": cmd_solve, "verify": cmd_verify}


def main(argv=None):
    args = _parse(argv)
    try:
        return COMMANDS[args.command](args)
    except (PerpetualVotingError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
