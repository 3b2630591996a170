"""Dynamic checks of progress, preservation, write-once and observable
satisfaction over corpus runs under seeded schedules."""

from __future__ import annotations

import json
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

from .checker import CheckerConfig, TypeCheckError, check_definition, elaborate
from .configtyping import type_configuration
from .observe import ObservationError, observably_satisfies, positive_subcontext
from .parser import ParseError, parse_program
from .pretty import pretty
from .runtime import (
    DEFAULT_FUEL, Final, OutOfFuel, RuntimeFault, SeededRandom, Stuck, closed_term, execute,
    initial, parse_literal, render_trace,
)
from .syntax import TypingContext

if sys.version_info >= (3, 11):
    import tomllib
else:  # pragma: no cover
    import tomli as tomllib


@dataclass(frozen=True)
class RunSpec:
    program: str  # path of the .sax file
    entry: str
    args: tuple[str, ...] = ()
    expect: str | None = None


@dataclass(frozen=True)
class FuzzConfig:
    seeds: int | None = None  # None: the manifest's count, else 100
    fuel: int = DEFAULT_FUEL
    sample_every: int = 1  # preservation re-check period, in steps
    jobs: int = 1
    checker: CheckerConfig = CheckerConfig()


@dataclass
class RunRecord:
    program: str
    entry: str
    args: list
    seed: int
    outcome: str = ""
    steps: int = 0
    progress: bool = True
    preservation: bool = True
    write_once: bool = True
    persistence: bool = True
    satisfaction: str = "n/a"
    expected: str = "n/a"
    observable: str | None = None
    violations: list = field(default_factory=list)
    prefix: list = field(default_factory=list)  # shortest failing trace prefix
    seconds: float = 0.0

    @property
    def ok(self) -> bool:
        return not self.violations


@dataclass
class ProgramReport:
    program: str
    typecheck: dict  # definition name -> "ok" or an error code and message
    runs: list[RunRecord] = field(default_factory=list)

    @property
    def accepted(self) -> bool:
        return all(v == "ok" for v in self.typecheck.values())


@dataclass
class HarnessReport:
    programs: list[ProgramReport] = field(default_factory=list)
    config: dict = field(default_factory=dict)
    seconds: float = 0.0

    def records(self):
        for p in self.programs:
            yield from p.runs

    def violations(self) -> list[str]:
        out = []
        for p in self.programs:
            if not p.accepted:
                out.append(f"{p.program}: rejected")
            for r in p.runs:
                out += [f"{r.program} {r.entry}{tuple(r.args)} seed {r.seed}: {v}" for v in r.violations]
        return out

    @property
    def ok(self) -> bool:
        return not self.violations()

    def counts(self) -> dict:
        rs = list(self.records())
        return {
            "programs": len(self.programs),
            "runs": len(rs),
            "final": sum(r.outcome == "Final" for r in rs),
            "progress_violations": sum(not r.progress for r in rs),
            "preservation_violations": sum(not r.preservation for r in rs),
            "write_once_violations": sum(not r.write_once for r in rs),
            "persistence_violations": sum(not r.persistence for r in rs),
            "satisfaction_failures": sum(r.satisfaction not in ("valid", "n/a") for r in rs),
            "expectation_failures": sum(r.expected == "mismatch" for r in rs),
            "schedule_dependence": sum("observable differs across seeds" in v for r in rs for v in r.violations),
        }

    def to_json(self, timing: bool = True) -> str:
        """One record per program and seed; timing can be dropped for byte comparison."""
        recs = []
        for p in self.programs:
            for r in p.runs:
                d = asdict(r)
                if not timing:
                    d.pop("seconds")
                recs.append(d)
        doc = {
            "config": self.config,
            "typecheck": {p.program: p.typecheck for p in self.programs},
            "counts": self.counts(),
            "records": recs,
        }
        if timing:
            doc["seconds"] = round(self.seconds, 3)
        return json.dumps(doc, indent=1, sort_keys=True)

    def to_text(self) -> str:
        lines = []
        for p in self.programs:
            bad = {k: v for k, v in p.typecheck.items() if v != "ok"}
            lines.append(f"{p.program}: {len(p.typecheck) - len(bad)}/{len(p.typecheck)} definitions accepted")
            for k, v in bad.items():
                lines.append(f"  {k}: {v}")
            by_entry: dict = {}
            for r in p.runs:
                by_entry.setdefault((r.entry, tuple(r.args)), []).append(r)
            for (e, args), rs in by_entry.items():
                outcomes = sorted({r.outcome for r in rs})
                nbad = sum(not r.ok for r in rs)
                obs = sorted({r.observable for r in rs if r.observable is not None})
                lines.append(f"  run {e}({', '.join(args)}): {len(rs)} seeds, outcomes {outcomes}, "
                             f"observable {obs}, {nbad} with violations")
        for v in self.violations():
            lines.append(f"VIOLATION {v}")
        c = self.counts()
        lines.append("summary: " + ", ".join(f"{k}={v}" for k, v in c.items()))
        lines.append("result: " + ("ok" if self.ok else "FAILED"))
        return "\n".join(lines)


# --------------------------------------------------------------------------
# Loading


def load_manifest(path: str | Path) -> tuple[list[RunSpec], int | None]:
    """A run manifest names a program and lists ``[[run]]`` tables; an
    optional top-level ``seeds`` sets the default seed count."""
    path = Path(path)
    doc = tomllib.loads(path.read_text())
    prog = str((path.parent / doc["program"]).resolve())
    specs = [RunSpec(prog, r["entry"], tuple(r.get("args", ())), r.get("expect")) for r in doc.get("run", ())]
    return specs, doc.get("seeds")


def typecheck_program(path: str, config: CheckerConfig | None = None) -> tuple[dict, object]:
    """Per-definition results and, when everything is accepted, the elaborated signature."""
    try:
        sig = parse_program(Path(path).read_text()).signature()
    except ParseError as e:
        return {"<parse>": f"E-PARSE {e}"}, None
    results = {}
    for name in sig.procs:
        try:
            check_definition(sig, name, config)
            results[name] = "ok"
        except TypeCheckError as e:
            results[name] = f"{e.code} [{e.rule}] {e.message}"
    if any(v != "ok" for v in results.values()):
        return results, None
    return results, elaborate(sig, config)


_SIGS: dict = {}


def _signature(path: str, config: CheckerConfig):
    key = (path, config)
    if key not in _SIGS:
        _SIGS[key] = typecheck_program(path, config)[1]
    return _SIGS[key]


# --------------------------------------------------------------------------
# One run


class _Abort(Exception):
    pass


def _covers(old: TypingContext, new: TypingContext, types: dict, old_types: dict) -> str | None:
    """Δ' ⊇ Δ: every old address stays bound at its recorded type."""
    have = set(new.addrs())
    for a in old.addrs():
        if a not in have:
            return f"address {a} lost"
        if types.get(a) != old_types.get(a):
            return f"recorded type of {a} changed"
    return None


def _observable(conf, addr) -> str:
    t = closed_term(conf.cells(), addr)
    return pretty(t) if t is not None else "<not a value>"


def check_run(spec: RunSpec, seed: int, cfg: FuzzConfig) -> RunRecord:
    rec = RunRecord(Path(spec.program).name, spec.entry, list(spec.args), seed)
    t0 = time.perf_counter()
    try:
        _check_run(spec, seed, cfg, rec)
    except _Abort:
        pass
    rec.seconds = round(time.perf_counter() - t0, 4)
    return rec


def _retype(sig, conf, cfg):
    try:
        return type_configuration(sig, TypingContext(), conf, cfg.checker), None
    except TypeCheckError as e:
        return None, f"{e.code} [{e.rule}] {e.message}"


def _check_run(spec: RunSpec, seed: int, cfg: FuzzConfig, rec: RunRecord):
    sig = _signature(spec.program, cfg.checker)
    if sig is None:
        rec.outcome = "rejected"
        rec.violations.append("program does not typecheck")
        return
    conf = initial(sig, spec.entry, spec.args)
    dest = next(iter(conf.procs()))
    delta, err = _retype(sig, conf, cfg)
    if err:
        rec.preservation = False
        rec.violations.append(f"initial configuration ill-typed: {err}")
        return
    state = {"delta": delta, "types": dict(conf.types), "window": [], "cells": set(conf.cells())}
    trace: list = []

    def fail(kind: str, msg: str, upto: int):
        setattr(rec, kind, False)
        rec.violations.append(msg)
        rec.prefix = render_trace(trace[:upto])
        raise _Abort

    def on_step(n, r, c):
        trace.append(r)
        if c.violations:
            fail("write_once", c.violations[0], n)
        state["window"].append((n, c))
        if n % cfg.sample_every == 0:
            _preserve(c, n)
        # also covers steps that preservation sampling skips
        cells = set(c.cells())
        if not state["cells"] <= cells:
            fail("persistence", f"cells {sorted(state['cells'] - cells)} disappeared at step {n}", n)
        state["cells"] = cells

    def _preserve(c, n):
        # re-check the unchecked steps in order so the reported prefix is the shortest
        window, state["window"] = state["window"], []
        for m, cm in window:
            d, err = _retype(sig, cm, cfg)
            if err is None:
                err = _covers(state["delta"], d, cm.types, state["types"])
            if err is not None:
                fail("preservation", f"step {m}: {err}", m)
            state["delta"], state["types"] = d, dict(cm.types)

    try:
        outcome, _ = execute(sig, conf, SeededRandom(seed), cfg.fuel, on_step)
    except RuntimeFault as e:
        rec.steps = len(trace)
        fail("progress", f"runtime fault: {e}", len(trace))
    rec.steps = len(trace)
    if state["window"]:
        _preserve(state["window"][-1][1], state["window"][-1][0])
    match outcome:
        case Stuck(blocked=blocked):
            rec.outcome = "Stuck"
            fail("progress", f"stuck with blocked objects {blocked}", len(trace))
        case OutOfFuel():
            rec.outcome = "OutOfFuel"
            return
        case Final(conf=final):
            rec.outcome = "Final"
    _satisfaction(sig, final, state["delta"], rec, cfg)
    rec.observable = _observable(final, dest)
    if spec.expect is not None:
        want = pretty(parse_literal(spec.expect))
        rec.expected = "match" if rec.observable == want else "mismatch"
        if rec.expected == "mismatch":
            rec.violations.append(f"expected {want}, observed {rec.observable}")


def _satisfaction(sig, final, delta, rec: RunRecord, cfg: FuzzConfig):
    # predicates come from the recorded types, not the cell-strengthened ones
    recorded = TypingContext()
    for a in delta.addrs():
        recorded = recorded.extend(a, final.types[a])
    gpp = positive_subcontext(sig, recorded)
    try:
        # the round budget scales with the observed values (see observe._budget)
        v = observably_satisfies(final, gpp, sig.axioms)
    except ObservationError as e:
        rec.satisfaction = "error"
        rec.violations.append(f"observation: {e}")
        return
    rec.satisfaction = v.status.value.lower()
    if not v.valid:
        rec.violations.append(f"observable satisfaction {v.status.value}: {v.reason}")


# --------------------------------------------------------------------------
# The whole corpus


def _job(args):
    spec, seed, cfg = args
    return check_run(spec, seed, cfg)


def _schedule_independence(runs: list[RunRecord]):
    """Observables of terminating runs of one entry must agree across seeds."""
    finals = [r for r in runs if r.outcome == "Final"]
    if not finals:
        return
    ref = finals[0].observable
    for r in finals[1:]:
        if r.observable != ref:
            r.violations.append(f"observable differs across seeds: {r.observable} vs {ref} (seed {finals[0].seed})")


def soundness_fuzz(corpus: str | Path, cfg: FuzzConfig = FuzzConfig(), seeds: list[int] | None = None) -> HarnessReport:
    """Every manifest in ``corpus/run`` (or ``corpus`` itself when it holds
    manifests) is run under seeds ``0..cfg.seeds-1``."""
    t0 = time.perf_counter()
    _SIGS.clear()
    corpus = Path(corpus)
    run_dir = corpus / "run" if (corpus / "run").is_dir() else corpus
    manifests = sorted(run_dir.glob("*.toml"))
    report = HarnessReport(config={"seeds": cfg.seeds, "fuel": cfg.fuel, "sample_every": cfg.sample_every})
    jobs = []
    for m in manifests:
        specs, nseeds = load_manifest(m)
        prog = specs[0].program if specs else str(m)
        results, _ = typecheck_program(prog, cfg.checker) if specs else ({}, None)
        pr = ProgramReport(Path(prog).name, results)
        report.programs.append(pr)
        if seeds is not None:
            ss = list(seeds)
        else:
            ss = list(range(cfg.seeds if cfg.seeds is not None else (nseeds or 100)))
        for spec in specs:
            jobs.append((pr, spec, ss))
    work = [(spec, s, cfg) for _, spec, ss in jobs for s in ss]
    if cfg.jobs > 1:
        with ProcessPoolExecutor(cfg.jobs) as ex:
            recs = list(ex.map(_job, work, chunksize=8))
    else:
        recs = [_job(w) for w in work]
    it = iter(recs)
    for pr, spec, ss in jobs:
        rs = [next(it) for _ in ss]
        _schedule_independence(rs)
        pr.runs += rs
    report.seconds = time.perf_counter() - t0
    return report
