"""Configurations of processes and persistent cells, rewritten one rule
instance at a time under a scheduler."""

from __future__ import annotations

import random
import re
from dataclasses import dataclass, field

from . import faults
from .pretty import pretty
from .syntax import (
    BranchK, Call, Case, Copy, Cut, Eq, One, PairK, PairTm, PairV, Plus, RType, Signature,
    TagTm, TagV, Tensor, UnitK, UnitTm, UnitV, Var, Write, addr_term, conj, peel, rename_addrs,
    subst, whnf,
)

DEFAULT_FUEL = 100_000


class RuntimeFault(Exception):
    """A shape mismatch or similar; impossible for well-typed configurations."""


@dataclass
class ProcObj:
    addr: str
    proc: object


@dataclass
class CellObj:
    addr: str
    content: object  # Value or continuation


@dataclass
class Configuration:
    objects: dict = field(default_factory=dict)  # addr -> ProcObj | CellObj, in allocation order
    types: dict = field(default_factory=dict)  # addr -> RType, for configuration typing
    counter: int = 0
    written: set = field(default_factory=set)
    violations: list = field(default_factory=list)

    def fresh(self) -> str:
        a = f"#{self.counter}"
        self.counter += 1
        return a

    def copy(self) -> "Configuration":
        return Configuration(dict(self.objects), dict(self.types), self.counter, set(self.written), list(self.violations))

    def cell(self, a: str):
        o = self.objects.get(a)
        return o.content if isinstance(o, CellObj) else None

    def final(self) -> bool:
        return all(isinstance(o, CellObj) for o in self.objects.values())

    def cells(self) -> dict:
        return {a: o.content for a, o in self.objects.items() if isinstance(o, CellObj)}

    def procs(self) -> dict:
        return {a: o.proc for a, o in self.objects.items() if isinstance(o, ProcObj)}

    def put_cell(self, a: str, content):
        if a in self.written:
            self.violations.append(f"address {a} written twice")
        self.written.add(a)
        self.objects[a] = CellObj(a, content)

    def spawn(self, a: str, p):
        self.objects[a] = ProcObj(a, peel(p))


def pass_value(v, k):
    """``V ▷ K``: the continuation body with the value's addresses substituted."""
    match v, k:
        case UnitV(), UnitK(body):
            return body
        case PairV(a, b), PairK(x, y, body):
            return rename_addrs(body, {x: a, y: b}) if (x, y) != (a, b) else body
        case TagV(l, a), BranchK():
            br = k.get(l)
            if br is None:
                raise RuntimeFault(f"no branch for label {l}")
            x, body = br
            return rename_addrs(body, {x: a})
    raise RuntimeFault(f"value {pretty(v)} does not match continuation")


# --------------------------------------------------------------------------
# Redexes


@dataclass(frozen=True)
class Redex:
    rule: str
    addrs: tuple[str, ...]


def enabled(conf: Configuration) -> list[Redex]:
    out = []
    for a, o in conf.objects.items():
        if not isinstance(o, ProcObj):
            continue
        match o.proc:
            case Copy(_, s):
                if conf.cell(s) is not None:
                    out.append(Redex("copy", (a, s)))
            case Cut():
                out.append(Redex("cut", (a,)))
            case Call():
                out.append(Redex("call", (a,)))
            case Write(d, _) if d == a:
                out.append(Redex("write", (a,)))
            case Write(d, _):
                if isinstance(conf.cell(d), (UnitK, PairK, BranchK)):
                    out.append(Redex("pass", (a, d)))
            case Case(d, _) if d == a:
                out.append(Redex("suspend", (a,)))
            case Case(d, _):
                if isinstance(conf.cell(d), (UnitV, PairV, TagV)):
                    out.append(Redex("case", (a, d)))
    return out


def apply(sig: Signature, conf: Configuration, r: Redex) -> Configuration:
    c = conf.copy()
    a = r.addrs[0]
    p = c.objects[a].proc
    match r.rule:
        case "copy":
            c.put_cell(a, c.cell(p.src))
        case "cut":
            x = c.fresh()
            left = rename_addrs(p.left, {p.binder: x})
            right = rename_addrs(p.right, {p.binder: x})
            if p.ann is not None:
                c.types[x] = p.ann
            c.spawn(x, left)
            c.spawn(a, right)
        case "call":
            pd = sig.procs[p.name]
            m = {x: b for (x, _), b in zip(pd.params, p.args)}
            m[pd.dest[0]] = p.dst
            c.spawn(a, rename_addrs(pd.body, m))
        case "write":
            c.put_cell(a, p.value)
        case "suspend":
            c.put_cell(a, p.cont)
        case "pass":
            c.spawn(a, pass_value(p.value, c.cell(p.dst)))
        case "case":
            v = c.cell(p.subject)
            c.spawn(a, pass_value(v, p.cont))
            if faults.active("drop_persistence"):
                del c.objects[p.subject]
    return c


# --------------------------------------------------------------------------
# Schedulers


class RoundRobin:
    """Deterministic: rotates through enabled redexes by position."""

    def __init__(self):
        self.turn = 0

    def choose(self, redexes: list[Redex]) -> Redex:
        r = redexes[self.turn % len(redexes)]
        self.turn += 1
        return r


class SeededRandom:
    def __init__(self, seed: int):
        self.rng = random.Random(seed)

    def choose(self, redexes: list[Redex]) -> Redex:
        return self.rng.choice(redexes)


@dataclass
class Final:
    conf: Configuration


@dataclass
class OutOfFuel:
    conf: Configuration


@dataclass
class Stuck:
    conf: Configuration
    blocked: list


def step(sig: Signature, conf: Configuration, sched):
    """One rewrite; returns (Redex, Configuration), or an outcome when none applies."""
    rs = enabled(conf)
    if not rs:
        if conf.final():
            return Final(conf)
        return Stuck(conf, sorted(conf.procs()))
    r = sched.choose(rs)
    return r, apply(sig, conf, r)


def execute(sig: Signature, conf: Configuration, sched, fuel: int = DEFAULT_FUEL, on_step=None):
    """Iterate ``step``.  Returns (outcome, trace) where trace lists redexes."""
    trace = []
    while True:
        res = step(sig, conf, sched)
        if not isinstance(res, tuple):
            return res, trace
        if len(trace) >= fuel:
            return OutOfFuel(conf), trace
        r, conf = res
        trace.append(r)
        if on_step is not None:
            on_step(len(trace), r, conf)


# --------------------------------------------------------------------------
# Literals: ``()``, ``(a, b)``, ``k.lit`` and decimal numerals for
# ``succ.(...).zero.()``


class LiteralError(ValueError):
    pass


_LIT = re.compile(r"\s*(?:(\d+)|([A-Za-z_][A-Za-z0-9_']*)|(.))")


def parse_literal(text: str):
    toks = [m.group(1) or m.group(2) or m.group(3) for m in _LIT.finditer(text) if m.group(0).strip()]
    pos = 0

    def peek():
        return toks[pos] if pos < len(toks) else None

    def eat(t):
        nonlocal pos
        if peek() != t:
            raise LiteralError(f"expected {t!r} in literal {text!r}")
        pos += 1

    def lit():
        nonlocal pos
        t = peek()
        if t is None:
            raise LiteralError(f"unexpected end of literal {text!r}")
        if t.isdigit():
            pos += 1
            out = TagTm("zero", UnitTm())
            for _ in range(int(t)):
                out = TagTm("succ", out)
            return out
        if t == "(":
            pos += 1
            if peek() == ")":
                pos += 1
                return UnitTm()
            a = lit()
            if peek() == ",":
                pos += 1
                b = lit()
                eat(")")
                return PairTm(a, b)
            eat(")")
            return a
        if t[0].isalpha() or t[0] == "_":
            pos += 1
            eat(".")
            return TagTm(t, lit())
        raise LiteralError(f"unexpected {t!r} in literal {text!r}")

    out = lit()
    if pos != len(toks):
        raise LiteralError(f"trailing input in literal {text!r}")
    return out


def materialize(sig: Signature, conf: Configuration, term, rt: RType) -> str:
    """Allocate cells holding a closed literal; each cell's type is the
    expected type strengthened with the literal's value."""
    a = conf.fresh()
    v = Var("%lit")
    base = whnf(sig, rt.base)
    match term, base:
        case UnitTm(), One():
            content = UnitV()
        case PairTm(s, t), Tensor(x, first, second):
            sa = materialize(sig, conf, s, first)
            ta = materialize(sig, conf, t, RType(subst(second, {x: addr_term(sa)})))
            content = PairV(sa, ta)
        case TagTm(k, t), Plus() if base.get(k) is not None:
            content = TagV(k, materialize(sig, conf, t, RType(base.get(k))))
        case _:
            raise LiteralError(f"literal {pretty(term)} does not have type {pretty(rt)}")
    conf.types[a] = RType(rt.base, "%lit", conj(rt.at(v), Eq(v, term)))
    conf.put_cell(a, content)
    return a


def initial(sig: Signature, entry: str, args) -> Configuration:
    """Argument cells plus one process calling ``entry``."""
    pd = sig.procs.get(entry)
    if pd is None:
        raise KeyError(entry)
    if len(args) != len(pd.params):
        raise LiteralError(f"{entry} expects {len(pd.params)} arguments, got {len(args)}")
    conf = Configuration()
    sub: dict = {}
    addrs = []
    for (x, t), lit in zip(pd.params, args):
        term = parse_literal(lit) if isinstance(lit, str) else lit
        a = materialize(sig, conf, term, subst(t, sub))
        sub[x] = addr_term(a)
        addrs.append(a)
    d = conf.fresh()
    y, t = pd.dest
    conf.types[d] = subst(t, {**sub, y: addr_term(d)})
    conf.spawn(d, Call(entry, tuple(addrs), d))
    return conf


def run(sig: Signature, entry: str, args, sched=None, fuel: int = DEFAULT_FUEL):
    conf = initial(sig, entry, args)
    return execute(sig, conf, sched or RoundRobin(), fuel)


# --------------------------------------------------------------------------
# Reading results


def closed_term(cells: dict, a: str, depth: int = 0):
    """The closed constructor term stored at ``a`` (None for continuations)."""
    if depth > 10_000:
        raise RuntimeFault("cyclic cell graph")
    v = cells.get(a)
    match v:
        case UnitV():
            return UnitTm()
        case PairV(x, y):
            s, t = closed_term(cells, x, depth + 1), closed_term(cells, y, depth + 1)
            return None if s is None or t is None else PairTm(s, t)
        case TagV(k, x):
            s = closed_term(cells, x, depth + 1)
            return None if s is None else TagTm(k, s)
    return None


def nat_value(term) -> int | None:
    n = 0
    while isinstance(term, TagTm) and term.label == "succ":
        n += 1
        term = term.arg
    if isinstance(term, TagTm) and term.label == "zero" and isinstance(term.arg, UnitTm):
        return n
    return None


def canonical_names(trace, conf: Configuration | None = None) -> dict:
    """Rename runtime addresses by order of first appearance."""
    m: dict = {}
    for r in trace:
        for a in r.addrs:
            if a not in m:
                m[a] = f"#{len(m)}"
    if conf is not None:
        for a in conf.objects:
            if a not in m:
                m[a] = f"#{len(m)}"
    return m


def render_trace(trace) -> list[str]:
    m = canonical_names(trace)
    return [f"STEP {i} {r.rule} " + " ".join(m[a] for a in r.addrs) for i, r in enumerate(trace, 1)]


def render_cells(conf: Configuration, trace=()) -> list[str]:
    m = canonical_names(trace, conf)
    out = []
    for a, content in conf.cells().items():
        body = pretty(rename_addrs(Write("_", content), m)) if isinstance(content, (UnitV, PairV, TagV)) else None
        if body is not None:
            text = body[2:]
        else:
            text = pretty(rename_addrs(Case("_", content), m))[len("case _ "):]
        out.append((int(m[a][1:]), f"cell {m[a]} = {text}"))
    return [line for _, line in sorted(out)]
