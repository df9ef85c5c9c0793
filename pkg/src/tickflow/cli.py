"""Command-line interface.

Subcommands: check (parse + static checks), desugar (print the rewritten
program), run (simulate and export a trace), verify (bounded reachability
of a signal emission), lti (observability/controllability rank verdicts),
compare (idealized automaton vs. tick-discretized program).

Exit codes: 0 success / unreachable / property holds; 1 property violation
or witness found; 2 usage, compile or runtime errors. Diagnostics go to
stderr as file:line:col: message.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction

from .errors import (
    CompileError,
    ScheduleError,
    SearchLimitError,
    TickflowError,
)
from .hybrid import compare, parse_automaton
from .kernel import InputAssignment, run
from .lti import (
    controllability_matrix,
    observability_matrix,
    rank,
    system_from_file,
)
from .params import bind_params
from .rational import parse_rational
from .rewrite import RewriteConfig, rewrite_flows
from .syntax import parse, pretty_print, reject_nonlinear_combine
from .trace import to_csv, to_json, to_svg_timing
from .verify import InputAlphabet, Unreachable, Witness, check_reachable


def load_schedule(path: str) -> dict:
    """JSON array of per-tick input objects:
    [{"tick": 1, "present": ["FAULT"], "values": {"S": "3/2"}}, ...].
    Ticks not mentioned see no inputs. Returns {tick: InputAssignment}."""
    with open(path, "r", encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ScheduleError(f"{path}: {exc}") from exc
    if not isinstance(doc, list):
        raise ScheduleError(f"{path}: schedule must be a JSON array")
    schedule: dict = {}
    for entry in doc:
        if not isinstance(entry, dict) or "tick" not in entry:
            raise ScheduleError(f"{path}: each entry needs a 'tick' field")
        tick = entry["tick"]
        if not isinstance(tick, int) or tick < 1:
            raise ScheduleError(f"{path}: bad tick {tick!r}")
        present = entry.get("present", [])
        values = {
            name: parse_rational(text)
            for name, text in entry.get("values", {}).items()
        }
        if tick in schedule:
            raise ScheduleError(f"{path}: duplicate tick {tick}")
        schedule[tick] = InputAssignment.make(present=present, values=values)
    return schedule


def load_alphabet(path: str) -> InputAlphabet:
    """JSON object: {"FAULT": {}, "LEVEL": {"values": ["1", "3/2"]}} — every
    listed input may be present or absent; valued ones pick from `values`."""
    with open(path, "r", encoding="utf-8") as fh:
        doc = json.load(fh)
    statuses = {}
    values = {}
    for name, spec in doc.items():
        statuses[name] = tuple(spec.get("statuses", ("absent", "present")))
        if "values" in spec:
            values[name] = tuple(parse_rational(v) for v in spec["values"])
    return InputAlphabet.make(statuses, values)


def _parse_params(pairs) -> dict:
    values = {}
    for pair in pairs or []:
        name, sep, text = pair.partition("=")
        if not sep:
            raise CompileError(f"--param needs name=value, got {pair!r}")
        values[name] = parse_rational(text)
    return values


def _load_program(path: str, params: dict, wcrt: Fraction):
    with open(path, "r", encoding="utf-8") as fh:
        source = fh.read()
    program = parse(source)
    bound = bind_params(program, params)
    reject_nonlinear_combine(bound)
    return rewrite_flows(bound, RewriteConfig(wcrt))


def _wcrt(text: str) -> Fraction:
    value = parse_rational(text)
    if value <= 0:
        raise CompileError("wcrt must be strictly positive")
    return value


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="tickflow",
        description="compile, simulate and verify clocked continuous-flow programs",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_check = sub.add_parser("check", help="parse and run the static checks")
    p_check.add_argument("program")
    p_check.add_argument("--param", action="append", metavar="NAME=VALUE")

    p_desugar = sub.add_parser("desugar", help="print the rewritten program")
    p_desugar.add_argument("program")
    p_desugar.add_argument("--wcrt", required=True)
    p_desugar.add_argument("--param", action="append", metavar="NAME=VALUE")

    p_run = sub.add_parser("run", help="simulate and export the trace")
    p_run.add_argument("program")
    p_run.add_argument("--wcrt", required=True)
    p_run.add_argument("--ticks", type=int, default=100)
    p_run.add_argument("--schedule", help="JSON input schedule")
    p_run.add_argument("--param", action="append", metavar="NAME=VALUE")
    p_run.add_argument("--out", help="trace file: .csv, .json or .svg by extension")
    p_run.add_argument(
        "--svg-vars", help="comma-separated entities for the .svg timing diagram"
    )

    p_verify = sub.add_parser("verify", help="bounded reachability of an emission")
    p_verify.add_argument("program")
    p_verify.add_argument("--wcrt", required=True)
    p_verify.add_argument("--bound", type=int, required=True)
    p_verify.add_argument("--target", required=True)
    p_verify.add_argument("--alphabet", help="JSON input alphabet")
    p_verify.add_argument("--strategy", choices=("bfs", "dfs"), default="bfs")
    p_verify.add_argument("--node-limit", type=int, default=200_000)
    p_verify.add_argument("--param", action="append", metavar="NAME=VALUE")

    p_lti = sub.add_parser("lti", help="observability/controllability verdicts")
    p_lti.add_argument("matrices", help="matrix file defining A and C and/or B")

    p_compare = sub.add_parser(
        "compare", help="idealized automaton vs. tick-discretized program"
    )
    p_compare.add_argument("--ha", required=True)
    p_compare.add_argument("--program", required=True)
    p_compare.add_argument("--wcrt", required=True)
    p_compare.add_argument("--horizon", required=True)
    p_compare.add_argument("--map", required=True, help="JSON {ha-var: program-var}")
    p_compare.add_argument("--param", action="append", metavar="NAME=VALUE")

    args = parser.parse_args(argv)
    try:
        return _dispatch(args)
    except (CompileError, TickflowError) as err:
        prog_path = getattr(args, "program", None) or getattr(args, "matrices", "")
        print(f"{prog_path}:{err}", file=sys.stderr)
        return 2


def _dispatch(args) -> int:
    if args.command == "check":
        with open(args.program, "r", encoding="utf-8") as fh:
            program = parse(fh.read())
        params = _parse_params(args.param)
        if params or not program.params():
            bound = bind_params(program, params)
            reject_nonlinear_combine(bound)
        else:
            reject_nonlinear_combine(program)
        print("ok")
        return 0

    if args.command == "desugar":
        rewritten = _load_program(args.program, _parse_params(args.param), _wcrt(args.wcrt))
        sys.stdout.write(pretty_print(rewritten))
        return 0

    if args.command == "run":
        wcrt = _wcrt(args.wcrt)
        rewritten = _load_program(args.program, _parse_params(args.param), wcrt)
        schedule = load_schedule(args.schedule) if args.schedule else None
        trace = run(rewritten, RewriteConfig(wcrt), schedule=schedule, max_ticks=args.ticks)
        if args.out is None or args.out.endswith(".csv"):
            text = to_csv(trace)
        elif args.out.endswith(".json"):
            text = to_json(trace)
        elif args.out.endswith(".svg"):
            if not args.svg_vars:
                raise TickflowError("--svg-vars is required for .svg output")
            text = to_svg_timing(trace, args.svg_vars.split(","))
        else:
            raise TickflowError(f"unknown trace format for {args.out!r}")
        if args.out is None:
            sys.stdout.write(text)
        else:
            with open(args.out, "w", encoding="utf-8") as fh:
                fh.write(text)
        return 0

    if args.command == "verify":
        wcrt = _wcrt(args.wcrt)
        rewritten = _load_program(args.program, _parse_params(args.param), wcrt)
        alphabet = load_alphabet(args.alphabet) if args.alphabet else None
        try:
            verdict = check_reachable(
                rewritten,
                RewriteConfig(wcrt),
                alphabet,
                bound=args.bound,
                target=args.target,
                strategy=args.strategy,
                node_limit=args.node_limit,
            )
        except SearchLimitError as err:
            print(f"resource limit: {err}", file=sys.stderr)
            return 2
        if isinstance(verdict, Witness):
            print(f"witness: {args.target} settles present at tick {verdict.tick}")
            for i, assignment in enumerate(verdict.schedule, start=1):
                if not assignment.is_empty():
                    present = ",".join(sorted(assignment.present))
                    print(f"  tick {i}: present [{present}]")
            for name, kind, value in verdict.snapshot:
                print(f"  {name} {kind} = {value}")
            return 1
        assert isinstance(verdict, Unreachable)
        print(
            f"unreachable within {verdict.bound} ticks "
            f"({verdict.states_explored} states explored)"
        )
        return 0

    if args.command == "lti":
        with open(args.matrices, "r", encoding="utf-8") as fh:
            system = system_from_file(fh.read())
        ok = True
        if system.c is not None:
            obs = observability_matrix(system)
            r = rank(obs)
            verdict = "observable" if r == system.n else "NOT observable"
            print(f"observability rank {r}/{system.n}: {verdict}")
            ok = ok and r == system.n
        if system.b is not None:
            ctr = controllability_matrix(system)
            r = rank(ctr)
            verdict = "controllable" if r == system.n else "NOT controllable"
            print(f"controllability rank {r}/{system.n}: {verdict}")
            ok = ok and r == system.n
        if system.c is None and system.b is None:
            raise TickflowError("matrix file defines neither C nor B")
        return 0 if ok else 1

    if args.command == "compare":
        wcrt = _wcrt(args.wcrt)
        params = _parse_params(args.param)
        with open(args.ha, "r", encoding="utf-8") as fh:
            automaton = parse_automaton(fh.read(), params)
        rewritten_input = args.program
        with open(rewritten_input, "r", encoding="utf-8") as fh:
            program = bind_params(parse(fh.read()), params)
        with open(args.map, "r", encoding="utf-8") as fh:
            mapping = json.load(fh)
        report = compare(
            automaton, program, RewriteConfig(wcrt), parse_rational(args.horizon), mapping
        )
        sys.stdout.write(report.to_text())
        return 0 if report.first_divergence_tick is None else 1

    raise AssertionError(f"unhandled command {args.command!r}")


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
