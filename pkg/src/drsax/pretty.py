"""Pretty-printer producing text the parser reads back (up to alpha-equivalence)."""

from __future__ import annotations

from .syntax import (
    And, Anno, App, Arrow, Axiom, Bot, BranchK, Call, Case, Copy, Cut, Eq, Fn, Forall,
    FunDecl, Implies, Is, One, PairK, PairTm, PairV, Plus, ProcDef, Proj, RType, TagTm,
    TagV, Tensor, Top, TyName, TypeDef, UnitK, UnitTm, UnitV, Var, Addr, With, Write,
)


def pretty(node) -> str:
    match node:
        case RType():
            return _rtype(node)
        case One() | Plus() | With() | Tensor() | Arrow() | TyName():
            return _type(node)
        case Bot() | Top() | Eq() | Is() | And() | Implies() | Forall():
            return _assertion(node)
        case Var() | Addr() | UnitTm() | PairTm() | App() | TagTm() | Proj() | Fn():
            return _term(node)
        case UnitV() | PairV() | TagV():
            return _value(node)
        case UnitK() | PairK() | BranchK():
            return _cont(node)
        case Copy() | Cut() | Write() | Case() | Anno() | Call():
            return _proc(node)
        case TypeDef(name, body):
            return f"type {name} = {_type(body)}"
        case FunDecl(name, arity):
            return f"fun {name}/{arity}"
        case Axiom(body):
            return f"axiom {_assertion(body)}"
        case ProcDef(name, params, dest, body):
            binds = ", ".join(f"{x} : {_rtype(t)}" for x, t in (*params, dest))
            return f"proc {name}({binds}) =\n  {_proc(body)}"
    items = getattr(node, "items", None)
    if items is not None:
        return "\n".join(pretty(i) for i in items) + ("\n" if items else "")
    raise TypeError(node)


def _type(t, refined_tail: bool = False) -> str:
    """``refined_tail``: an outer refinement follows, so a trailing arrow
    codomain must print its own refinement to keep the bar attached."""
    match t:
        case One():
            return "1"
        case TyName(n):
            return n
        case Plus(brs):
            return "+{" + ", ".join(f"{l} : {_type(b)}" for l, b in brs) + "}"
        case With(brs):
            return "&{" + ", ".join(f"{l} : {_rtype(b)}" for l, b in brs) + "}"
        case Tensor(x, first, second):
            return f"({x} : {_rtype(first)}) * {_type(second, refined_tail)}"
        case Arrow(x, dom, cod):
            return f"({x} : {_rtype(dom)}) -> {_rtype(cod, force=refined_tail)}"
    raise TypeError(t)


def _rtype(t: RType, force: bool = False) -> str:
    refined = t.pred != Top() or force
    base = _type(t.base, refined_tail=refined)
    if not refined:
        return base
    return f"{base} | {t.binder}. {_assertion(t.pred)}"


def _assertion(a, prec: int = 0) -> str:
    # prec: 0 implication context, 1 conjunct, 2 atom
    match a:
        case Bot():
            return "ff"
        case Top():
            return "tt"
        case Eq(l, r):
            return f"{_term(l)} == {_term(r)}"
        case Is(k, t):
            return f"is {k}({_term(t)})"
        case And(l, r):
            s = f"{_assertion(l, 1)} /\\ {_assertion(r, 2)}"
            return s if prec <= 1 else f"({s})"
        case Implies(l, r):
            s = f"{_assertion(l, 1)} => {_assertion(r, 0)}"
            return s if prec == 0 else f"({s})"
        case Forall():
            names = []
            body = a
            while isinstance(body, Forall):
                names.append(body.var)
                body = body.body
            s = f"forall {' '.join(names)}. {_assertion(body, 0)}"
            return s if prec == 0 else f"({s})"
    raise TypeError(a)


def _term(t, prec: int = 0) -> str:
    # prec: 0 application, 1 tag, 2 postfix/atom
    match t:
        case Var(n) | Addr(n):
            return n
        case UnitTm():
            return "()"
        case PairTm(a, b):
            return f"({_term(a)}, {_term(b)})"
        case Fn(s, ()):
            return s
        case Fn(s, args):
            return f"{s}(" + ", ".join(_term(x) for x in args) + ")"
        case Proj(a, k):
            return f"{_term(a, 2)}:{k}"
        case TagTm(k, a):
            s = f"{k}.{_term(a, 1)}"
            return s if prec <= 1 else f"({s})"
        case App(f, x):
            s = f"{_term(f, 0)} @ {_term(x, 1)}"
            return s if prec == 0 else f"({s})"
    raise TypeError(t)


def _value(v) -> str:
    match v:
        case UnitV():
            return "()"
        case PairV(a, b):
            return f"({a}, {b})"
        case TagV(k, a):
            return f"{k}.{a}"
    raise TypeError(v)


def _cont(k) -> str:
    match k:
        case UnitK(body):
            return f"() => {_proc(body)}"
        case PairK(x, y, body):
            return f"({x}, {y}) => {_proc(body)}"
        case BranchK(brs):
            return " | ".join(f"{l}.{x} => {_proc(b)}" for l, x, b in brs)
    raise TypeError(k)


def _proc(p) -> str:
    match p:
        case Copy(d, s):
            return f"{d} <- {s}"
        case Cut(x, ann, left, right):
            head = x if ann is None else f"{x} : {_rtype(ann)}"
            return f"{head} <- {{ {_proc(left)} }}; {_proc(right)}"
        case Write(d, v):
            return f"{d}.{_value(v)}"
        case Case(s, k):
            return f"case {s} {{ {_cont(k)} }}"
        case Anno(x, t, body):
            return f"({x} : {_rtype(t)}) @ {_proc(body)}"
        case Call(f, args, d):
            return f"call {f}(" + ", ".join((*args, d)) + ")"
    raise TypeError(p)
