"""SMT-LIB2 export of entailment queries, plus an optional bridge to z3."""

from __future__ import annotations

import hashlib

from .prover import TheoryContext
from .syntax import (
    Addr, And, App, Bot, Eq, Fn, Forall, Implies, Is, PairTm, Proj, TagTm, Top, UnitTm, Var,
    free_names,
)


def _q(kind: str, name: str) -> str:
    return f"|{kind} {name}|"


class _Collect:
    def __init__(self):
        self.tags: set[str] = set()
        self.projs: set[str] = set()
        self.funs: dict[str, int] = {}

    def term(self, t):
        match t:
            case PairTm(a, b) | App(a, b):
                self.term(a)
                self.term(b)
            case TagTm(k, a):
                self.tags.add(k)
                self.term(a)
            case Proj(a, k):
                self.projs.add(k)
                self.term(a)
            case Fn(s, args):
                self.funs[s] = len(args)
                for a in args:
                    self.term(a)

    def assertion(self, a):
        match a:
            case Eq(l, r):
                self.term(l)
                self.term(r)
            case Is(k, t):
                self.tags.add(k)
                self.term(t)
            case And(l, r) | Implies(l, r):
                self.assertion(l)
                self.assertion(r)
            case Forall(_, b):
                self.assertion(b)


def _term(t) -> str:
    match t:
        case Var(n) | Addr(n):
            return _q("v", n)
        case UnitTm():
            return "unit"
        case PairTm(a, b):
            return f"(pair {_term(a)} {_term(b)})"
        case TagTm(k, a):
            return f"({_q('tag', k)} {_term(a)})"
        case App(f, x):
            return f"(app {_term(f)} {_term(x)})"
        case Proj(a, k):
            return f"({_q('proj', k)} {_term(a)})"
        case Fn(s, ()):
            return _q("f", s)
        case Fn(s, args):
            return f"({_q('f', s)} " + " ".join(_term(a) for a in args) + ")"
    raise TypeError(t)


def _assertion(a) -> str:
    match a:
        case Bot():
            return "false"
        case Top():
            return "true"
        case Eq(l, r):
            return f"(= {_term(l)} {_term(r)})"
        case Is(k, t):
            return f"((_ is {_q('tag', k)}) {_term(t)})"
        case And(l, r):
            return f"(and {_assertion(l)} {_assertion(r)})"
        case Implies(l, r):
            return f"(=> {_assertion(l)} {_assertion(r)})"
        case Forall(v, b):
            return f"(forall (({_q('v', v)} Val)) {_assertion(b)})"
    raise TypeError(a)


def export_smtlib(ctx, goal, axioms=()) -> str:
    """Script whose ``check-sat`` answers unsat exactly when the negated goal
    is unsatisfiable.  Values form a datatype with an opaque constructor
    standing for every non-value referent (functions, records, other tags)."""
    if isinstance(ctx, TheoryContext):
        hyps = (*ctx.axioms, *axioms, *ctx.hypotheses)
    else:
        hyps = (*axioms, *ctx)
    col = _Collect()
    for a in (*hyps, goal):
        col.assertion(a)
    ctors = ["(unit)", "(pair (fst Val) (snd Val))"]
    ctors += [f"({_q('tag', k)} ({_q('untag', k)} Val))" for k in sorted(col.tags)]
    ctors.append("(opaque (oid Int))")
    lines = ["(set-logic ALL)", "(declare-datatypes ((Val 0)) ((" + " ".join(ctors) + ")))"]
    lines.append("(declare-fun app (Val Val) Val)")
    for k in sorted(col.projs):
        lines.append(f"(declare-fun {_q('proj', k)} (Val) Val)")
    for s, n in sorted(col.funs.items()):
        lines.append(f"(declare-fun {_q('f', s)} (" + " ".join(["Val"] * n) + ") Val)")
    consts = set()
    for a in (*hyps, goal):
        consts |= free_names(a)
    for n in sorted(consts):
        lines.append(f"(declare-const {_q('v', n)} Val)")
    for h in hyps:
        lines.append(f"(assert {_assertion(h)})")
    lines.append(f"(assert (not {_assertion(goal)}))")
    lines.append("(check-sat)")
    return "\n".join(lines) + "\n"


def query_hash(script: str) -> str:
    return hashlib.sha256(script.encode()).hexdigest()[:16]


def run_z3(script: str, timeout_ms: int = 5000) -> str:
    """Status from z3 ("sat", "unsat" or "unknown").  Needs the optional
    ``z3-solver`` package."""
    import z3

    s = z3.Solver()
    s.set("timeout", timeout_ms)
    s.from_string("\n".join(l for l in script.splitlines() if l.strip() != "(check-sat)"))
    return str(s.check())
