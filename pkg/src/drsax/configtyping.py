"""Configuration typing: objects are checked writer-before-reader, each
against the context built from the objects to its left."""

from __future__ import annotations

import heapq

from .checker import Checker, CheckerConfig, ModedJudgment, TypeCheckError, _Env
from .runtime import CellObj, Configuration, ProcObj
from .syntax import (
    And, Case, Eq, PairTm, PairV, RType, Signature, TagTm, TagV, TypingContext, UnitTm, UnitV,
    Write, addr_term, free_addrs, free_names,
)


def value_term(v):
    match v:
        case UnitV():
            return UnitTm()
        case PairV(a, b):
            return PairTm(addr_term(a), addr_term(b))
        case TagV(k, a):
            return TagTm(k, addr_term(a))
    return None


def as_process(o):
    """cellV and cellK are typed as the process that would write them."""
    if isinstance(o, ProcObj):
        return o.proc
    if isinstance(o.content, (UnitV, PairV, TagV)):
        return Write(o.addr, o.content)
    return Case(o.addr, o.content)


def _order(conf: Configuration, known: set[str]) -> list[str]:
    """Writers before readers (Kahn's algorithm, ties by allocation order)."""
    addrs = list(conf.objects)
    index = {a: i for i, a in enumerate(addrs)}
    deps: dict[str, set[str]] = {}
    for a in addrs:
        p = as_process(conf.objects[a])
        reads = free_addrs(p)
        if a in conf.types:
            reads |= free_names(conf.types[a])
        reads.discard(a)
        missing = {r for r in reads if r not in index and r not in known}
        if missing:
            raise TypeCheckError("config", f"object {a} reads unknown addresses {sorted(missing)}")
        deps[a] = {r for r in reads if r in index}
    users: dict[str, list[str]] = {a: [] for a in addrs}
    for a, ds in deps.items():
        for d in ds:
            users[d].append(a)
    count = {a: len(deps[a]) for a in addrs}
    ready = [index[a] for a in addrs if count[a] == 0]
    heapq.heapify(ready)
    out = []
    while ready:
        a = addrs[heapq.heappop(ready)]
        out.append(a)
        for u in users[a]:
            count[u] -= 1
            if count[u] == 0:
                heapq.heappush(ready, index[u])
    if len(out) != len(addrs):
        cyc = sorted(a for a in addrs if count[a] > 0)
        raise TypeCheckError("config", f"no writer-before-reader order; cycle among {cyc}")
    return out


def type_configuration(sig: Signature, gamma: TypingContext, conf: Configuration,
                       config: CheckerConfig | None = None) -> TypingContext:
    """Returns Δ, the context extended with every object's address."""
    ck = Checker(sig, config)
    delta = gamma
    for a in _order(conf, set(gamma.addrs())):
        t = conf.types.get(a)
        if t is None:
            raise TypeCheckError("config", f"no type recorded for {a}")
        o = conf.objects[a]
        p = as_process(o)
        res = ck.check(_Env(delta), p, ModedJudgment(a, t))
        if res.demands:
            raise TypeCheckError("config", f"object {a} leaves unresolved demands {sorted(res.demands)}")
        if isinstance(o, CellObj) and value_term(o.content) is not None:
            # a value cell's contents are known to every reader
            v = "%cell"
            t = RType(t.base, v, And(t.at(addr_term(v)), Eq(addr_term(v), value_term(o.content))))
        delta = delta.extend(a, t)
    return delta

