"""Command-line front end: ``ldsda {solve,enumerate,verify}``.

Exit codes: 0 success, 1 infeasible start, 2 bad arguments, 3 budget
exhausted. Failures also print a JSON error record on stderr (and to the
``--out`` report for ``solve`` and ``verify``).
"""
import argparse
import json
import sys
import time

from . import search
from .errors import BudgetExhausted, InfeasibleStart, InvalidParams, LdsdaError, OutOfBounds
from .models import MODELS, load_model
from .report import RunReport, emit_lattice_csv, error_report, lattice_csv, search_report, write_text

EXIT_OK, EXIT_INFEASIBLE_START, EXIT_BAD_ARGS, EXIT_BUDGET = 0, 1, 2, 3

# starting points used when --start is omitted
DEFAULT_START = {"cstr": lambda shape: (1, 1), "smallbatch": lambda shape: tuple(shape)}


class ArgumentError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ArgumentError(message)


def _point(text):
    try:
        return tuple(int(t) for t in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _positive_int(text):
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be at least 1")
    return v


def _non_negative_int(text):
    v = int(text)
    if v < 0:
        raise argparse.ArgumentTypeError("must be non-negative")
    return v


def build_parser():
    p = _Parser(prog="ldsda", description="Logic-based discrete steepest descent for GDP case studies.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def model_args(sp):
        sp.add_argument("--model", choices=MODELS, required=True)
        sp.add_argument("--params", help="key = value parameter file")
        sp.add_argument("--size", type=_positive_int, help="reactor count R (cstr only)")
        sp.add_argument("--no-fbbt", action="store_true")
        sp.add_argument("--no-logic-pruning", action="store_true")
        sp.add_argument("--threads", type=_positive_int, default=1)
        sp.add_argument("--max-solves", type=_non_negative_int)
        sp.add_argument("--out", help="output path (stdout when omitted)")
        sp.add_argument("--timing", action="store_true", help="include wall-clock fields")

    s = sub.add_parser("solve", help="run the descent from a starting point")
    model_args(s)
    s.add_argument("--start", type=_point)
    s.add_argument("--neighborhood", choices=("2", "inf"), default="inf")
    s.add_argument("--epsilon", type=float, default=0.0)
    s.add_argument("--no-visited", action="store_true")
    s.add_argument("--no-domain-check", action="store_true")
    s.add_argument("--no-warm-start", action="store_true")

    e = sub.add_parser("enumerate", help="solve every lattice point and write a CSV table")
    model_args(e)

    v = sub.add_parser("verify", help="check local optimality of a point")
    model_args(v)
    v.add_argument("--point", type=_point, required=True)
    v.add_argument("--neighborhood", choices=("2", "inf"), default="inf")
    v.add_argument("--epsilon", type=float, default=0.0)
    v.add_argument("--no-warm-start", action="store_true")
    return p


def _search_config(args):
    return search.SearchConfig(
        epsilon=getattr(args, "epsilon", 0.0),
        use_visited_set=not getattr(args, "no_visited", False),
        use_domain_check=not getattr(args, "no_domain_check", False),
        use_fbbt=not args.no_fbbt,
        use_logic_pruning=not args.no_logic_pruning,
        use_warm_start=not getattr(args, "no_warm_start", False),
        max_subproblem_solves=args.max_solves,
        threads=args.threads,
    )


def _config_echo(args):
    keys = ("model", "params", "size", "start", "point", "neighborhood", "epsilon", "no_fbbt",
            "no_logic_pruning", "no_visited", "no_domain_check", "no_warm_start", "max_solves",
            "threads")
    echo = {}
    for k in keys:
        if hasattr(args, k):
            val = getattr(args, k)
            echo[k] = list(val) if isinstance(val, tuple) else val
    return echo


def _emit(args, text):
    if args.out:
        write_text(args.out, text)
    else:
        sys.stdout.write(text)


def _fail(args, command, code, kind, message):
    status = {EXIT_INFEASIBLE_START: "infeasible_start", EXIT_BAD_ARGS: "bad_arguments",
              EXIT_BUDGET: "budget_exhausted"}[code]
    rep = error_report(command, status, kind, message, _config_echo(args) if args else None)
    text = rep.dumps()
    sys.stderr.write(json.dumps(rep.error | {"status": status, "exit_code": code}) + "\n")
    if args is not None and command in ("solve", "verify") and getattr(args, "out", None):
        write_text(args.out, text)
    return code


def _solve(args, model, specs, cfg):
    start = args.start or DEFAULT_START[args.model](tuple(s.size for s in specs))
    args.start = start
    t0 = time.perf_counter()
    result = search.ldsda(model, start, args.neighborhood, cfg, specs=specs)
    rep = search_report(result, _config_echo(args), args.timing, time.perf_counter() - t0)
    _emit(args, rep.dumps())
    return EXIT_BUDGET if result.certificate == search.BUDGET_EXHAUSTED else EXIT_OK


def _enumerate(args, model, specs, cfg):
    try:
        table = search.enumerate_lattice(model, cfg, specs=specs)
    except BudgetExhausted as err:
        if err.partial:
            _emit(args, lattice_csv(err.partial))
        raise
    if args.out:
        emit_lattice_csv(table, args.out)
    else:
        sys.stdout.write(lattice_csv(table))
    return EXIT_OK


def _verify(args, model, specs, cfg):
    center, checks = search.check_neighbors(model, args.point, args.neighborhood, cfg, specs=specs)
    local = not any(c.better for c in checks)
    cert = (search.S_LOCAL if args.neighborhood == "2" else search.I_LOCAL) if local else None
    rep = RunReport(
        command="verify", status="ok", objective=center.value, z=tuple(args.point), certificate=cert,
        config=_config_echo(args),
        trajectory=[{"point": list(c.z), "phase": "verify", "status": c.status, "value": c.value,
                     "accepted": c.better} for c in checks],
        extra={"local": local},
    )
    _emit(args, rep.dumps())
    return EXIT_OK


COMMANDS = {"solve": _solve, "enumerate": _enumerate, "verify": _verify}


def run(argv=None):
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        args = build_parser().parse_args(argv)
    except ArgumentError as err:
        return _fail(None, argv[0] if argv else "", EXIT_BAD_ARGS, "ArgumentError", str(err))
    try:
        model, specs = load_model(args.model, args.params, args.size)
        cfg = _search_config(args)
        return COMMANDS[args.command](args, model, specs, cfg)
    except InfeasibleStart as err:
        return _fail(args, args.command, EXIT_INFEASIBLE_START, type(err).__name__, str(err))
    except BudgetExhausted as err:
        return _fail(args, args.command, EXIT_BUDGET, type(err).__name__, str(err))
    except (OutOfBounds, InvalidParams, ValueError, OSError) as err:
        return _fail(args, args.command, EXIT_BAD_ARGS, type(err).__name__, str(err))
    except LdsdaError as err:
        return _fail(args, args.command, EXIT_BAD_ARGS, type(err).__name__, str(err))


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
