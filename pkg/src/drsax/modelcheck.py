"""Brute-force model search for ground sequents, used as an oracle for the prover.

Models interpret variables and uninterpreted applications over a small value
universe.  Constructors are evaluated exactly, so any model found is a real
countermodel; "no countermodel" only means none within the bound.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass

from .syntax import (
    And, App, Bot, Eq, Fn, Implies, Is, PairTm, Proj, TagTm, Top, UnitTm, Var, term_names,
)

UNIT = ("u",)


def _tag(k, v):
    return ("t", k, v)


UNIVERSE = (UNIT, _tag("l", UNIT), _tag("r", UNIT), ("p", UNIT, UNIT), ("o", 0), ("o", 1))


def _opaque_terms(a, out: list):
    """Uninterpreted subterms, innermost first."""
    match a:
        case Eq(l, r):
            _opaque_terms(l, out), _opaque_terms(r, out)
        case Is(_, t):
            _opaque_terms(t, out)
        case And(l, r) | Implies(l, r):
            _opaque_terms(l, out), _opaque_terms(r, out)
        case PairTm(l, r):
            _opaque_terms(l, out), _opaque_terms(r, out)
        case TagTm(_, t):
            _opaque_terms(t, out)
        case Fn(_, args):
            for t in args:
                _opaque_terms(t, out)
            if a not in out:
                out.append(a)
        case App(f, x):
            _opaque_terms(f, out), _opaque_terms(x, out)
            if a not in out:
                out.append(a)
        case Proj(t, _):
            _opaque_terms(t, out)
            if a not in out:
                out.append(a)


class _Inconsistent(Exception):
    pass


def _eval(t, env, table, chosen):
    match t:
        case Var(n):
            return env[n]
        case UnitTm():
            return UNIT
        case PairTm(l, r):
            return ("p", _eval(l, env, table, chosen), _eval(r, env, table, chosen))
        case TagTm(k, x):
            return _tag(k, _eval(x, env, table, chosen))
        case Fn(s, args):
            key = ("fn", s, tuple(_eval(x, env, table, chosen) for x in args))
        case App(f, x):
            key = ("app", _eval(f, env, table, chosen), _eval(x, env, table, chosen))
        case Proj(x, k):
            key = ("proj", k, _eval(x, env, table, chosen))
        case _:
            raise TypeError(t)
    v = chosen[t]
    if table.setdefault(key, v) != v:
        raise _Inconsistent
    return v


def _holds(a, env, table, chosen) -> bool:
    match a:
        case Top():
            return True
        case Bot():
            return False
        case Eq(l, r):
            return _eval(l, env, table, chosen) == _eval(r, env, table, chosen)
        case Is(k, t):
            v = _eval(t, env, table, chosen)
            return v[0] == "t" and v[1] == k
        case And(l, r):
            return _holds(l, env, table, chosen) and _holds(r, env, table, chosen)
        case Implies(l, r):
            return (not _holds(l, env, table, chosen)) or _holds(r, env, table, chosen)
    raise TypeError(a)


def _evaluate_all(parts, env, table, chosen):
    # evaluate every opaque term first so functional consistency is checked
    for t in chosen:
        _eval(t, env, table, chosen)
    return [_holds(p, env, table, chosen) for p in parts]


def find_countermodel(hyps, goal, universe=UNIVERSE):
    """A model of the hypotheses falsifying the goal, or None within the bound."""
    parts = [*hyps, goal]
    names = sorted(set().union(*(_names(p) for p in parts)))
    opaque: list = []
    for p in parts:
        _opaque_terms(p, opaque)
    for vals in itertools.product(universe, repeat=len(names) + len(opaque)):
        env = dict(zip(names, vals))
        chosen = dict(zip(opaque, vals[len(names):]))
        try:
            *hs, g = _evaluate_all(parts, env, {}, chosen)
        except _Inconsistent:
            continue
        if all(hs) and not g:
            return env
    return None


def _subterms(a, out: list):
    match a:
        case Eq(l, r) | And(l, r) | Implies(l, r):
            _subterms(l, out), _subterms(r, out)
        case Is(_, t):
            _subterms(t, out)
        case PairTm(l, r) | App(l, r):
            _subterms(l, out), _subterms(r, out)
            out.append(a)
        case TagTm(_, t) | Proj(t, _):
            _subterms(t, out)
            out.append(a)
        case Fn(_, args):
            for t in args:
                _subterms(t, out)
            out.append(a)
        case Var() | UnitTm():
            out.append(a)


def _eqs(a, out: list, want: bool):
    """Equations a countermodel would like to make true (``want`` tracks polarity)."""
    match a:
        case Eq(PairTm(a1, b1), PairTm(a2, b2)) if want:
            _eqs(Eq(a1, a2), out, want), _eqs(Eq(b1, b2), out, want)
        case Eq(TagTm(k1, a1), TagTm(k2, a2)) if want and k1 == k2:
            _eqs(Eq(a1, a2), out, want)
        case Eq(l, r) if want:
            out.append((l, r))
        case And(l, r):
            _eqs(l, out, want), _eqs(r, out, want)
        case Implies(l, r):
            _eqs(l, out, not want), _eqs(r, out, want)


def _peek(t, env, chosen):
    """Value of ``t`` under a partial assignment; an uninterpreted term that
    already has a value is read directly, even if its arguments do not."""
    if t in chosen:
        return chosen[t]
    match t:
        case Var(n):
            return env[n]
        case UnitTm():
            return UNIT
        case PairTm(l, r):
            return ("p", _peek(l, env, chosen), _peek(r, env, chosen))
        case TagTm(k, x):
            return _tag(k, _peek(x, env, chosen))
    raise KeyError(t)


def find_countermodel_guided(hyps, goal, universe=UNIVERSE, cap: int = 200_000, order: str | tuple = "guided"):
    """A wider search than ``find_countermodel``: variables and uninterpreted
    terms are assigned one at a time, each also allowed the value of any
    subterm that is already evaluable.  Slots that a wanted equation
    determines go first, then slots no wanted equation mentions.  Returns (model or None,
    exhausted), where ``exhausted`` means the candidate tree was searched
    completely within ``cap`` leaves.

    ``order`` picks the slot order: "guided" as above; "free" puts slots no
    wanted equation mentions first; "opaque" puts uninterpreted terms first,
    even before their arguments are known (functional consistency is
    checked at the leaves anyway); a tuple of slots fixes the order.  That reaches models where a variable
    must equal a term built from a later slot."""
    parts = [*hyps, goal]
    names = sorted(set().union(*(_names(p) for p in parts)))
    opaque: list = []
    for p in parts:
        _opaque_terms(p, opaque)
    subs: list = []
    eqs: list = []
    for p in parts:
        _subterms(p, subs)
    for h in hyps:
        _eqs(h, eqs, True)
    _eqs(goal, eqs, False)
    subs = list(dict.fromkeys(subs))
    slots = list(order) if isinstance(order, tuple) else [Var(n) for n in names] + opaque
    sides = {t for e in eqs for t in e}
    leaves = [0]

    def value(t, env, chosen):
        try:
            return _peek(t, env, chosen)
        except KeyError:
            return None

    def suggestions(slot, env, chosen):
        out = []
        for l, r in eqs:
            for me, other in ((l, r), (r, l)):
                if me == slot:
                    v = value(other, env, chosen)
                    if v is not None and v not in out:
                        out.append(v)
        return out

    def pick(env, chosen):
        todo = [t for t in slots if not (isinstance(t, Var) and t.name in env) and t not in chosen]
        # an uninterpreted term is only assignable once its arguments are
        ready = [t for t in todo if isinstance(t, Var) or _args_ready(t, env, chosen)]
        if isinstance(order, tuple):
            return todo[0] if todo else None
        if order == "opaque":
            for t in todo:
                if not isinstance(t, Var):
                    return t
        if order in ("free", "opaque"):
            for t in todo:
                if t not in sides:
                    return t
        for t in ready:
            if suggestions(t, env, chosen):
                return t
        for t in ready:
            if t not in sides:
                return t
        return ready[0] if ready else None

    def _args_ready(t, env, chosen):
        match t:
            case Fn(_, args):
                return all(value(x, env, chosen) is not None for x in args)
            case App(f, x):
                return value(f, env, chosen) is not None and value(x, env, chosen) is not None
            case Proj(x, _):
                return value(x, env, chosen) is not None
        return True

    def search(env, chosen):
        slot = pick(env, chosen)
        if slot is None:
            leaves[0] += 1
            if leaves[0] > cap:
                raise _Inconsistent
            try:
                *hs, g = _evaluate_all(parts, env, {}, chosen)
            except _Inconsistent:
                return None
            return dict(env) if all(hs) and not g else None
        cands = suggestions(slot, env, chosen)
        for v in [*universe, *(value(t, env, chosen) for t in subs)]:
            if v is not None and v not in cands:
                cands.append(v)
        for v in cands:
            if isinstance(slot, Var):
                found = search({**env, slot.name: v}, chosen)
            else:
                found = search(env, {**chosen, slot: v})
            if found is not None:
                return found
        return None

    try:
        return search({}, {}), True
    except _Inconsistent:
        return None, False


def slots_of(hyps, goal) -> list:
    """Variables and uninterpreted terms a model has to interpret."""
    parts = [*hyps, goal]
    opaque: list = []
    for p in parts:
        _opaque_terms(p, opaque)
    return [Var(n) for n in sorted(set().union(*(_names(p) for p in parts)))] + opaque


def search_countermodel(hyps, goal, universe=UNIVERSE, cap: int = 200_000,
                        max_permuted: int = 6, permuted_cap: int = 5_000):
    """Try the plain product search, the three heuristic slot orders and,
    for sequents with at most ``max_permuted`` slots, every fixed order.
    Returns (model or None, exhausted); ``exhausted`` is true only if every
    search ran to completion."""
    cm = find_countermodel(hyps, goal, universe)
    if cm is not None:
        return cm, True
    done = True
    orders: list = ["guided", "free", "opaque"]
    slots = slots_of(hyps, goal)
    if len(slots) <= max_permuted:
        orders += list(itertools.permutations(slots))
    for order in orders:
        cm, exhausted = find_countermodel_guided(hyps, goal, universe, permuted_cap if isinstance(order, tuple) else cap,
                                                 order)
        if cm is not None:
            return cm, True
        done = done and exhausted
    return None, done


def _names(a) -> set[str]:
    match a:
        case Eq(l, r):
            return term_names(l) | term_names(r)
        case Is(_, t):
            return term_names(t)
        case And(l, r) | Implies(l, r):
            return _names(l) | _names(r)
    return set()


# --------------------------------------------------------------------------
# Random ground sequents


@dataclass(frozen=True)
class SequentGen:
    names: tuple[str, ...] = ("a", "b", "c")
    labels: tuple[str, ...] = ("l", "r")
    depth: int = 2
    max_hyps: int = 3
    max_opaque: int = 2

    def term(self, rng: random.Random, depth: int, budget: list):
        r = rng.random()
        if depth == 0 or r < 0.45:
            return UnitTm() if rng.random() < 0.15 else Var(rng.choice(self.names))
        if r < 0.65:
            return TagTm(rng.choice(self.labels), self.term(rng, depth - 1, budget))
        if r < 0.8:
            return PairTm(self.term(rng, depth - 1, budget), self.term(rng, depth - 1, budget))
        if budget[0] > 0:
            budget[0] -= 1
            if rng.random() < 0.7:
                return Fn("g", (self.term(rng, depth - 1, budget),))
            return App(Var(rng.choice(self.names)), Var(rng.choice(self.names)))
        return Var(rng.choice(self.names))

    def atom(self, rng, budget):
        if rng.random() < 0.3:
            return Is(rng.choice(self.labels), self.term(rng, self.depth, budget))
        return Eq(self.term(rng, self.depth, budget), self.term(rng, self.depth, budget))

    def formula(self, rng, budget, depth=1):
        r = rng.random()
        if depth == 0 or r < 0.6:
            return self.atom(rng, budget)
        if r < 0.75:
            return And(self.formula(rng, budget, depth - 1), self.formula(rng, budget, depth - 1))
        if r < 0.95:
            return Implies(self.formula(rng, budget, depth - 1), self.formula(rng, budget, depth - 1))
        return Bot()

    def sequent(self, rng: random.Random):
        budget = [self.max_opaque]
        hyps = tuple(self.formula(rng, budget) for _ in range(rng.randint(0, self.max_hyps)))
        return hyps, self.formula(rng, budget)
