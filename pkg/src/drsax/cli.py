"""Command-line entry points: check, run, solve, fuzz."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .checker import CheckerConfig, TypeCheckError, check_definition, elaborate
from .harness import FuzzConfig, soundness_fuzz
from .parser import ParseError, parse_program
from .pretty import pretty
from .prover import ProverConfig, Status, entails
from .runtime import (
    DEFAULT_FUEL, Final, LiteralError, OutOfFuel, RoundRobin, RuntimeFault, SeededRandom, execute, initial,
    render_cells, render_trace,
)
from .sequents import parse_sequents
from .smtlib import export_smtlib, query_hash
from .syntax import ResolutionError, WellFormednessError

EXIT_OK, EXIT_TYPE, EXIT_UNKNOWN, EXIT_INPUT, EXIT_FUEL, EXIT_STUCK = 0, 1, 2, 3, 4, 5


def _err(msg: str):
    print(msg, file=sys.stderr)


def _load(path: str):
    """Parsed signature, or an exit code after reporting the failure."""
    try:
        text = Path(path).read_text()
    except OSError as e:
        _err(f"{path}: {e.strerror or e}")
        return None
    try:
        return parse_program(text).signature()
    except ParseError as e:
        for d in e.diagnostics:
            _err(d.render(path))
        return None
    except (ResolutionError, WellFormednessError) as e:
        _err(f"{path}: error: {e}")
        return None


def _checker_config(args) -> CheckerConfig:
    return CheckerConfig(ProverConfig(rounds=args.depth), subtype_fuel=args.fuel_subtype)


def _dump(dirpath: Path, obligations, axioms=()):
    dirpath.mkdir(parents=True, exist_ok=True)
    for ob in obligations:
        if ob.kind == "entails":
            hyps, goal = ob.hyps, ob.goal
        else:
            # the refinement part of a subtyping query
            lhs, rhs, subj = ob.goal
            hyps, goal = (*ob.hyps, lhs.at(subj)), rhs.at(subj)
        script = export_smtlib(hyps, goal, axioms)
        (dirpath / f"{query_hash(script)}.smt2").write_text(script)


def _typecheck(path: str, sig, config: CheckerConfig, explain=False, smt_dump=None) -> int:
    codes = []
    for name in sig.procs:
        try:
            d = check_definition(sig, name, config)
        except TypeCheckError as e:
            loc = f"{path}:{e.span.line}:{e.span.col}" if getattr(e, "span", None) is not None else path
            _err(f"{loc}: {e.code} in {name}: {e}")
            codes.append(EXIT_UNKNOWN if e.code == "E-UNKNOWN" else EXIT_TYPE)
            if smt_dump and e.obligation is not None:
                _dump(Path(smt_dump), [e.obligation], sig.axioms)
            continue
        except (WellFormednessError, ResolutionError) as e:
            _err(f"{path}: error in {name}: {e}")
            codes.append(EXIT_TYPE)
            continue
        obs = [o for n in d.walk() for o in n.obligations]
        if explain:
            print(f"{name}: ok, {len(obs)} obligations, back edges {d.back_edges()}")
            for o in obs:
                print(f"  {o.kind}: {o.render()}  [{o.verdict.status.value}]")
        if smt_dump:
            _dump(Path(smt_dump), obs, sig.axioms)
    if EXIT_TYPE in codes:
        return EXIT_TYPE
    return EXIT_UNKNOWN if codes else EXIT_OK


def cmd_check(args) -> int:
    sig = _load(args.file)
    if sig is None:
        return EXIT_INPUT
    code = _typecheck(args.file, sig, _checker_config(args), args.explain, args.smt_dump)
    if code == EXIT_OK:
        print(f"{args.file}: {len(sig.procs)} definitions accepted")
    return code


def cmd_run(args) -> int:
    sig = _load(args.file)
    if sig is None:
        return EXIT_INPUT
    config = _checker_config(args)
    if not args.unsafe:
        code = _typecheck(args.file, sig, config)
        if code != EXIT_OK:
            return code
        sig = elaborate(sig, config)
    try:
        conf = initial(sig, args.entry, args.arg)
    except KeyError:
        _err(f"unknown entry {args.entry}")
        return EXIT_INPUT
    except LiteralError as e:
        _err(str(e))
        return EXIT_INPUT
    sched = RoundRobin() if args.seed is None else SeededRandom(args.seed)
    try:
        outcome, trace = execute(sig, conf, sched, args.fuel)
    except RuntimeFault as e:
        _err(f"runtime fault: {e}")
        return EXIT_STUCK
    if args.trace:
        print("\n".join(render_trace(trace)))
    print(f"OUTCOME {type(outcome).__name__} after {len(trace)} steps")
    for line in render_cells(outcome.conf, trace):
        print(line)
    if isinstance(outcome, Final):
        return EXIT_OK
    if isinstance(outcome, OutOfFuel):
        return EXIT_FUEL
    _err(f"stuck: blocked objects {outcome.blocked}")
    return EXIT_STUCK


def cmd_solve(args) -> int:
    try:
        sig, seqs = parse_sequents(Path(args.file).read_text())
    except OSError as e:
        _err(f"{args.file}: {e.strerror or e}")
        return EXIT_INPUT
    except ParseError as e:
        for d in e.diagnostics:
            _err(d.render(args.file))
        return EXIT_INPUT
    worst = EXIT_OK
    for s in seqs:
        v = entails(s.hyps, s.goal, sig.axioms, ProverConfig(rounds=args.depth))
        hyps = "; ".join(pretty(h) for h in s.hyps)
        print(f"line {s.line}: {v.status.value}  {hyps + ' ' if hyps else ''}|- {pretty(s.goal)}")
        if v.status is Status.REFUTED:
            worst = EXIT_TYPE
        elif v.status is Status.UNKNOWN and worst == EXIT_OK:
            worst = EXIT_UNKNOWN
    return worst


def cmd_fuzz(args) -> int:
    cfg = FuzzConfig(seeds=args.seeds, fuel=args.fuel, sample_every=args.sample_preservation,
                     jobs=args.jobs, checker=_checker_config(args))
    if not Path(args.dir).is_dir():
        _err(f"{args.dir}: not a directory")
        return EXIT_INPUT
    report = soundness_fuzz(args.dir, cfg)
    print(report.to_text())
    Path(args.report).write_text(report.to_json())
    print(f"report written to {args.report}")
    return EXIT_OK if report.ok else EXIT_TYPE


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="drsax", description="Refined futures: typechecker, runtime and harness.")
    sub = ap.add_subparsers(dest="cmd", required=True)

    def budgets(p):
        p.add_argument("--depth", type=int, default=ProverConfig().rounds, help="quantifier instantiation rounds")
        p.add_argument("--fuel-subtype", type=int, default=CheckerConfig().subtype_fuel,
                       help="type-name unfoldings per subtyping query")

    p = sub.add_parser("check", help="typecheck every definition")
    p.add_argument("file")
    budgets(p)
    p.add_argument("--smt-dump", metavar="DIR", help="write each entailment as an SMT-LIB script")
    p.add_argument("--explain", action="store_true", help="list the obligations of accepted definitions")
    p.set_defaults(fn=cmd_check)

    p = sub.add_parser("run", help="execute a definition")
    p.add_argument("file")
    p.add_argument("--entry", required=True)
    p.add_argument("--arg", action="append", default=[], help="argument literal, e.g. 3 or (true.(), 2)")
    p.add_argument("--seed", type=int, help="random scheduler seed (round robin when absent)")
    p.add_argument("--fuel", type=int, default=DEFAULT_FUEL)
    p.add_argument("--trace", action="store_true")
    p.add_argument("--unsafe", action="store_true", help="skip typechecking")
    budgets(p)
    p.set_defaults(fn=cmd_run)

    p = sub.add_parser("solve", help="decide the queries of a sequent file")
    p.add_argument("file")
    p.add_argument("--depth", type=int, default=ProverConfig().rounds)
    p.set_defaults(fn=cmd_solve)

    p = sub.add_parser("fuzz", help="check progress, preservation and observables over a corpus")
    p.add_argument("dir")
    p.add_argument("--seeds", type=int, default=None, help="seeds per run (default: manifest value or 100)")
    p.add_argument("--fuel", type=int, default=DEFAULT_FUEL)
    p.add_argument("--sample-preservation", type=int, default=1, metavar="K",
                   help="re-type the configuration every K steps")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--report", default="fuzz-report.json", help="where to write the JSON report")
    budgets(p)
    p.set_defaults(fn=cmd_fuzz)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.fn(args)


if __name__ == "__main__":
    sys.exit(main())
