"""Command-line interface.

Exit status: 0 the property holds, 1 it does not, 2 bad input, 3 a budget ran out.
"""

from __future__ import annotations

import argparse
import sys

from . import report
from .conformance import conforms, infer, refines, search_space
from .errors import BudgetExceeded, InputError, NestedCritical, SDError, SearchBudgetExceeded
from .frontend import dump_json, load_file, parse_rho, print_dsl, resolve_hidden
from .semantics import EvalConfig, evaluate

HOLDS, FAILS, INPUT_ERROR, BUDGET = 0, 1, 2, 3


def _positive(text):
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}")
    if v <= 0:
        raise argparse.ArgumentTypeError("must be positive")
    return v


def _natural(text):
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}")
    if v < 0:
        raise argparse.ArgumentTypeError("must not be negative")
    return v


def _common():
    p = argparse.ArgumentParser(add_help=False)
    g = p.add_argument_group("evaluation")
    g.add_argument("--loop-bound", type=_natural, default=3, metavar="K",
                   help="loop unrolling bound (default 3)")
    g.add_argument("--max-obligations", type=_positive, default=EvalConfig.max_obligations, metavar="N")
    g.add_argument("--max-traces", type=_positive, default=EvalConfig.max_traces_per_obligation, metavar="N",
                   help="most traces in one obligation")
    g.add_argument("--max-trace-len", type=_positive, default=EvalConfig.max_trace_length, metavar="N")
    g.add_argument("--paper-literal", action="store_true",
                   help="skip fold after par, seq, block and loop")
    g.add_argument("--explain", action="store_true", help="print simulation evidence")
    g.add_argument("--format", choices=("text", "json"), default="text")
    g.add_argument("--plot", metavar="PATH", help="also write a figure (PNG, PDF or SVG)")
    return p


def build_parser():
    parser = argparse.ArgumentParser(
        prog="sdconform",
        description="Trace semantics, refinement and conformance for sequence diagrams.")
    sub = parser.add_subparsers(dest="command", required=True)
    common = _common()

    p = sub.add_parser("parse", parents=[common], help="parse and validate a diagram, print it back")
    p.add_argument("file")

    p = sub.add_parser("sem", parents=[common], help="print the semantics of a diagram")
    p.add_argument("file")

    p = sub.add_parser("refines", parents=[common], help="check that FILE1 refines FILE2")
    p.add_argument("file1")
    p.add_argument("file2")

    p = sub.add_parser("conforms", parents=[common], help="check FILE1 conforms to FILE2 under --rho/--hide")
    p.add_argument("file1")
    p.add_argument("file2")
    p.add_argument("--rho", metavar="FILE", help="substitution file, one 'from -> to' per line")
    p.add_argument("--hide", metavar="LIST", default="",
                   help="comma-separated labels (9 or f9) or event texts; @FILE reads the list from a file")

    p = sub.add_parser("infer", parents=[common], help="search for witnesses of FILE1 conforming to FILE2")
    p.add_argument("file1")
    p.add_argument("file2")
    return parser


def _config(args):
    return EvalConfig(loop_bound=args.loop_bound, max_obligations=args.max_obligations,
                      max_traces_per_obligation=args.max_traces,
                      max_trace_length=args.max_trace_len, paper_literal=args.paper_literal)


def _emit(args, text, doc):
    sys.stdout.write(report.dumps(doc) if args.format == "json" else text)


def _hide_items(spec):
    if spec.startswith("@"):
        try:
            with open(spec[1:], encoding="utf-8") as f:
                spec = f.read()
        except OSError as exc:
            raise InputError(f"cannot read {spec[1:]}: {exc.strerror}") from exc
    return [s for s in spec.replace("\n", ",").split(",") if s.strip()]


def cmd_parse(args):
    name, d = load_file(args.file)
    if args.format == "json":
        sys.stdout.write(dump_json(d, name))
    else:
        sys.stdout.write(print_dsl(d, name))
    return HOLDS


def cmd_sem(args):
    cfg = _config(args)
    name, d = load_file(args.file)
    m = evaluate(d, cfg)
    _emit(args, report.sem_text(name, m, cfg), report.sem_json(name, m, cfg))
    if args.plot:
        from .plotting import plot_semantics

        plot_semantics(m, args.plot, title=f"{name} (loop bound {cfg.loop_bound})")
    return HOLDS


def cmd_refines(args):
    cfg = _config(args)
    n1, d1 = load_file(args.file1)
    n2, d2 = load_file(args.file2)
    res = refines(d1, d2, cfg)
    names = (n1, n2)
    _emit(args, report.refines_text(names, res, args.explain), report.refines_json(names, res))
    if args.plot:
        from .plotting import plot_semantics

        plot_semantics(res.sem1, args.plot, title=f"{n1} (loop bound {cfg.loop_bound})")
    return HOLDS if res.holds else FAILS


def cmd_conforms(args):
    cfg = _config(args)
    n1, d1 = load_file(args.file1)
    n2, d2 = load_file(args.file2)
    rho = ()
    if args.rho:
        try:
            with open(args.rho, encoding="utf-8") as f:
                rho = parse_rho(f.read(), args.rho)
        except OSError as exc:
            raise InputError(f"cannot read {args.rho}: {exc.strerror}") from exc
    hidden = resolve_hidden(_hide_items(args.hide), d1)
    res = conforms(d1, d2, rho, hidden, cfg)
    names = (n1, n2)
    _emit(args, report.conforms_text(names, res, args.explain), report.conforms_json(names, res))
    if args.plot and res.refinement is not None:
        from .plotting import plot_semantics

        plot_semantics(res.refinement.sem1, args.plot, title=f"{n1} after hiding and renaming")
    return HOLDS if res.holds else FAILS


def cmd_infer(args):
    cfg = _config(args)
    n1, d1 = load_file(args.file1)
    n2, d2 = load_file(args.file2)
    names = (n1, n2)
    space = search_space(cfg)
    partial = False
    try:
        ws = infer(d1, d2, cfg)
    except SearchBudgetExceeded as exc:
        ws, partial = exc.partial, True
        print(f"sdconform: {exc}", file=sys.stderr)
    _emit(args, report.infer_text(names, ws, space, cfg.loop_bound, partial),
          report.infer_json(names, ws, space, cfg.loop_bound, partial))
    if args.plot:
        from .plotting import plot_witnesses

        plot_witnesses(ws, args.plot, title=f"{n1} against {n2}")
    if partial:
        return BUDGET
    return HOLDS if ws else FAILS


COMMANDS = {"parse": cmd_parse, "sem": cmd_sem, "refines": cmd_refines,
            "conforms": cmd_conforms, "infer": cmd_infer}


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except BudgetExceeded as exc:
        print(f"sdconform: budget exceeded: {exc}", file=sys.stderr)
        return BUDGET
    except (InputError, NestedCritical, ValueError) as exc:
        print(f"sdconform: {exc}", file=sys.stderr)
        return INPUT_ERROR
    except SDError as exc:
        print(f"sdconform: {exc}", file=sys.stderr)
        return INPUT_ERROR


if __name__ == "__main__":
    sys.exit(main())
