"""Command line entry point: ``tsirelson <command> ...``.

Exit codes: 0 success (or ``consistent``), 2 invalid input, 3 dimension cap
exceeded, 10 cheating detected.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys

from . import oscillator as osc
from . import shellgame as sg
from .polytope import DIMENSION_CAP, DimensionCapError, derive_inequalities
from .scenario import Scenario, parse_forbid, scenario_from_json

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_DIMENSION = 3
EXIT_CHEATING = 10


class UsageError(Exception):
    pass


def _emit(text: str, out):
    if out:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _dumps(doc) -> str:
    return json.dumps(doc, indent=2) + "\n"


def _scenario_from_args(args):
    sources = sum(x is not None for x in (args.scenario, args.A, args.oscillator))
    if sources != 1:
        raise UsageError("give exactly one of --scenario, --A/--X/--forbid, --oscillator")
    if args.scenario:
        try:
            with open(args.scenario, encoding="utf-8") as fh:
                return scenario_from_json(fh.read())
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read scenario file: {exc}") from exc
    if args.oscillator is not None:
        o = osc.OscillatorScenario(args.oscillator, args.mode)
        return o.scenario, o.constraints()
    if args.X is None:
        raise UsageError("--A needs --X")
    scen = Scenario(args.A, args.X)
    return scen, parse_forbid(args.forbid or "", scen)


def cmd_derive(args):
    scen, cons = _scenario_from_args(args)
    fl = derive_inequalities(scen, cons, max_dim=args.max_dim)
    _emit(_dumps(fl.to_json(scen, cons)), args.out)
    if args.out:
        print(f"A={scen.A} X={scen.X} forbidden={len(cons)} vertices={fl.n_vertices} "
              f"dimension={fl.dimension}")
        for e in fl.equalities:
            print(f"  equality   {e.pretty(scen.A)}")
        for f, c in zip(fl.facets, fl.classes):
            print(f"  {c:<10} {f.pretty(scen.A)}")
    return EXIT_OK


def cmd_oscillator(args):
    scen = osc.OscillatorScenario(args.X, args.mode)
    rows = osc.sweep(scen, args.Nmax, args.ineq)
    if args.format == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["N", "type", "bound_side", "value", "violated"])
        for r in rows:
            w.writerow(r.csv_fields())
        text = buf.getvalue()
    else:
        text = _dumps([{"type": r.type, "bound_side": r.bound_side, **r.result.to_json()} for r in rows])
    _emit(text, args.out)
    if args.out:
        print(f"{'N':>3} {'type':<8} {'side':<6} {'value':>10}  violated")
        for r in rows:
            print(f"{r.N:>3} {r.type:<8} {r.bound_side:<6} {r.value:>10.6f}  {'yes' if r.violated else ''}")
    return EXIT_OK


def cmd_simulate(args):
    strategy = sg.DealerStrategy(args.strategy, args.balls, args.cheat_prob)
    trials = sg.simulate(strategy, args.rounds, args.seed, args.chooser)
    _emit(sg.trials_to_csv(trials), args.out)
    return EXIT_OK


def cmd_analyze(args):
    try:
        with open(args.infile, encoding="utf-8", newline="") as fh:
            trials = sg.read_trials(fh)
    except OSError as exc:
        raise UsageError(f"cannot read trial log: {exc}") from exc
    cond, counts = sg.estimate(trials)
    report = sg.cheat_test(cond, counts, args.confidence, seed=args.seed)
    _emit(_dumps(report.to_json()), args.out)
    if args.out:
        print(report.verdict)
        print(report.certificate())
    return EXIT_CHEATING if report.verdict == "cheating_detected" else EXIT_OK


def _probability(text):
    v = float(text)
    if not 0 < v < 1:
        raise argparse.ArgumentTypeError("confidence must lie in (0, 1)")
    return v


def build_parser():
    parser = argparse.ArgumentParser(prog="tsirelson", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    d = sub.add_parser("derive", help="facets of a constrained polytope")
    d.add_argument("--scenario", metavar="FILE")
    d.add_argument("--A", type=int)
    d.add_argument("--X", type=int)
    d.add_argument("--forbid", metavar="PATTERNS", help="comma separated digit words, e.g. 111,222")
    d.add_argument("--oscillator", type=int, metavar="X")
    d.add_argument("--mode", choices=osc.MODES, default="full")
    d.add_argument("--max-dim", type=int, default=DIMENSION_CAP)
    d.add_argument("--out", metavar="FILE")
    d.add_argument("--format", choices=["json"], default="json")
    d.set_defaults(func=cmd_derive)

    o = sub.add_parser("oscillator", help="maximal violations in the first N Fock states")
    o.add_argument("--X", type=int, required=True)
    o.add_argument("--mode", choices=osc.MODES, default="full")
    o.add_argument("--Nmax", type=int, required=True)
    o.add_argument("--ineq", choices=["type_t", "type_1", "type_2", "all"], default="all")
    o.add_argument("--out", metavar="FILE")
    o.add_argument("--format", choices=["csv", "json"], default="csv")
    o.set_defaults(func=cmd_oscillator)

    s = sub.add_parser("shellgame-simulate", help="write a simulated trial log")
    s.add_argument("--strategy", choices=sg.STRATEGIES, required=True)
    s.add_argument("--rounds", type=int, required=True)
    s.add_argument("--seed", type=int, required=True)
    s.add_argument("--balls", type=int, default=1)
    s.add_argument("--cheat-prob", type=float, default=0.5)
    s.add_argument("--chooser", choices=sg.CHOOSERS, default="round_robin")
    s.add_argument("--out", metavar="FILE")
    s.set_defaults(func=cmd_simulate)

    a = sub.add_parser("shellgame-analyze", help="test a trial log for ball removal")
    a.add_argument("--in", dest="infile", required=True, metavar="FILE")
    a.add_argument("--confidence", type=_probability, default=0.99)
    a.add_argument("--seed", type=int, default=None, help="seed to record in the report")
    a.add_argument("--out", metavar="FILE")
    a.set_defaults(func=cmd_analyze)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except DimensionCapError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DIMENSION
    except (UsageError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
