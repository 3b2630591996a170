"""Abstract syntax for DRSAX: types, assertion terms, processes, signatures.

Every node is an immutable, hashable dataclass.  Address variables and
runtime addresses share one namespace of strings; runtime addresses always
start with ``#`` and never occur in source text.
"""

from __future__ import annotations

import enum
import itertools
import re
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Union

# --------------------------------------------------------------------------
# Assertion terms


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Addr:
    """Runtime address, a nullary uninterpreted symbol."""

    name: str


@dataclass(frozen=True)
class UnitTm:
    pass


@dataclass(frozen=True)
class PairTm:
    fst: "Term"
    snd: "Term"


@dataclass(frozen=True)
class App:
    fn: "Term"
    arg: "Term"


@dataclass(frozen=True)
class TagTm:
    label: str
    arg: "Term"


@dataclass(frozen=True)
class Proj:
    arg: "Term"
    label: str


@dataclass(frozen=True)
class Fn:
    sym: str
    args: tuple["Term", ...] = ()


Term = Union[Var, Addr, UnitTm, PairTm, App, TagTm, Proj, Fn]

UNIT_TM = UnitTm()


def is_runtime(name: str) -> bool:
    return name.startswith("#")


def addr_term(name: str) -> Term:
    return Addr(name) if is_runtime(name) else Var(name)


# --------------------------------------------------------------------------
# Assertions


@dataclass(frozen=True)
class Bot:
    pass


@dataclass(frozen=True)
class Top:
    pass


@dataclass(frozen=True)
class Eq:
    lhs: Term
    rhs: Term


@dataclass(frozen=True)
class Is:
    label: str
    term: Term


@dataclass(frozen=True)
class And:
    lhs: "Assertion"
    rhs: "Assertion"


@dataclass(frozen=True)
class Implies:
    lhs: "Assertion"
    rhs: "Assertion"


@dataclass(frozen=True)
class Forall:
    var: str
    body: "Assertion"


Assertion = Union[Bot, Top, Eq, Is, And, Implies, Forall]

FF = Bot()
TT = Top()


def conj(*parts: Assertion) -> Assertion:
    out: Assertion = TT
    for p in parts:
        if p == TT:
            continue
        out = p if out == TT else And(out, p)
    return out


def forall_many(names: Iterable[str], body: Assertion) -> Assertion:
    for n in reversed(list(names)):
        body = Forall(n, body)
    return body


# --------------------------------------------------------------------------
# Types


@dataclass(frozen=True)
class One:
    pass


@dataclass(frozen=True)
class Plus:
    branches: tuple[tuple[str, "Type"], ...]

    def labels(self) -> list[str]:
        return [l for l, _ in self.branches]

    def get(self, label: str) -> "Type | None":
        return dict(self.branches).get(label)


@dataclass(frozen=True)
class With:
    branches: tuple[tuple[str, "RType"], ...]

    def labels(self) -> list[str]:
        return [l for l, _ in self.branches]

    def get(self, label: str) -> "RType | None":
        return dict(self.branches).get(label)


@dataclass(frozen=True)
class Tensor:
    binder: str
    first: "RType"
    second: "Type"


@dataclass(frozen=True)
class Arrow:
    binder: str
    domain: "RType"
    codomain: "RType"


@dataclass(frozen=True)
class TyName:
    name: str


Type = Union[One, Plus, With, Tensor, Arrow, TyName]

ONE = One()


@dataclass(frozen=True)
class RType:
    base: Type
    binder: str = "_"
    pred: Assertion = TT

    def at(self, subject: Term) -> Assertion:
        """The predicate instantiated at ``subject``."""
        if self.pred == TT:
            return TT
        return subst(self.pred, {self.binder: subject})


def plain(t: Type) -> RType:
    return RType(t, "_", TT)


# --------------------------------------------------------------------------
# Values, continuations, processes


@dataclass(frozen=True)
class UnitV:
    pass


@dataclass(frozen=True)
class PairV:
    fst: str
    snd: str


@dataclass(frozen=True)
class TagV:
    label: str
    arg: str


Value = Union[UnitV, PairV, TagV]


@dataclass(frozen=True)
class UnitK:
    body: "Process"


@dataclass(frozen=True)
class PairK:
    fst: str
    snd: str
    body: "Process"


@dataclass(frozen=True)
class BranchK:
    branches: tuple[tuple[str, str, "Process"], ...]

    def labels(self) -> list[str]:
        return [l for l, _, _ in self.branches]

    def get(self, label: str) -> "tuple[str, Process] | None":
        for l, x, p in self.branches:
            if l == label:
                return x, p
        return None


Cont = Union[UnitK, PairK, BranchK]


def _span():
    return field(default=None, compare=False, hash=False, repr=False)


@dataclass(frozen=True)
class Copy:
    dst: str
    src: str
    span: object = _span()


@dataclass(frozen=True)
class Cut:
    binder: str
    ann: RType | None
    left: "Process"
    right: "Process"
    span: object = _span()


@dataclass(frozen=True)
class Write:
    dst: str
    value: Value
    span: object = _span()


@dataclass(frozen=True)
class Case:
    subject: str
    cont: Cont
    span: object = _span()


@dataclass(frozen=True)
class Anno:
    binder: str
    type: RType
    body: "Process"
    span: object = _span()


@dataclass(frozen=True)
class Call:
    name: str
    args: tuple[str, ...]
    dst: str
    span: object = _span()


Process = Union[Copy, Cut, Write, Case, Anno, Call]


# --------------------------------------------------------------------------
# Signatures and contexts


@dataclass(frozen=True)
class ProcDef:
    name: str
    params: tuple[tuple[str, RType], ...]
    dest: tuple[str, RType]
    body: Process
    span: object = _span()


@dataclass(frozen=True)
class TypeDef:
    name: str
    body: Type
    span: object = _span()


@dataclass(frozen=True)
class FunDecl:
    name: str
    arity: int
    span: object = _span()


@dataclass(frozen=True)
class Axiom:
    body: Assertion
    span: object = _span()


Item = Union[TypeDef, FunDecl, Axiom, ProcDef]


class ResolutionError(Exception):
    pass


class WellFormednessError(Exception):
    def __init__(self, message: str, span=None):
        super().__init__(message)
        self.span = span


@dataclass
class Signature:
    types: dict[str, Type] = field(default_factory=dict)
    funs: dict[str, int] = field(default_factory=dict)
    axioms: list[Assertion] = field(default_factory=list)
    procs: dict[str, ProcDef] = field(default_factory=dict)

    @classmethod
    def from_items(cls, items: Iterable[Item]) -> "Signature":
        sig = cls()
        for it in items:
            match it:
                case TypeDef(name, body):
                    sig.types[name] = body
                case FunDecl(name, arity):
                    sig.funs[name] = arity
                case Axiom(body):
                    sig.axioms.append(body)
                case ProcDef(name=name):
                    sig.procs[name] = it
        return sig

    def with_procs(self, procs: Mapping[str, ProcDef]) -> "Signature":
        return Signature(dict(self.types), dict(self.funs), list(self.axioms), dict(procs))


class Mode(enum.Enum):
    IN = "=>"  # known: the type is an input
    OUT = "<="  # demanded: the type is an output


@dataclass(frozen=True)
class Binding:
    addr: str
    mode: Mode
    type: RType


@dataclass(frozen=True)
class TypingContext:
    entries: tuple[Binding, ...] = ()

    def extend(self, addr: str, type_: RType, mode: Mode = Mode.IN) -> "TypingContext":
        if addr in self:
            raise WellFormednessError(f"duplicate address {addr} in context")
        return TypingContext(self.entries + (Binding(addr, mode, type_),))

    def replace(self, addr: str, type_: RType, mode: Mode = Mode.IN) -> "TypingContext":
        return TypingContext(
            tuple(Binding(addr, mode, type_) if b.addr == addr else b for b in self.entries)
        )

    def __contains__(self, addr: str) -> bool:
        return any(b.addr == addr for b in self.entries)

    def lookup(self, addr: str) -> Binding | None:
        for b in self.entries:
            if b.addr == addr:
                return b
        return None

    def addrs(self) -> list[str]:
        return [b.addr for b in self.entries]

    def hypotheses(self, exclude: str | None = None) -> list[Assertion]:
        """Each known entry (x, A | λy.φ(y)) contributes φ(x)."""
        out = []
        for b in self.entries:
            if b.addr == exclude or b.mode is not Mode.IN:
                continue
            h = b.type.at(addr_term(b.addr))
            if h != TT:
                out.append(h)
        return out


# --------------------------------------------------------------------------
# Free names and fresh names

_TRAIL = re.compile(r"[0-9']+$")


def fresh(base: str, avoid) -> str:
    stem = _TRAIL.sub("", base.lstrip("#%")) or "v"
    if base not in avoid and not base.startswith(("#", "%")):
        return base
    for i in itertools.count(1):
        cand = f"{stem}{i}"
        if cand not in avoid:
            return cand
    raise AssertionError


def term_names(t: Term) -> set[str]:
    match t:
        case Var(n) | Addr(n):
            return {n}
        case UnitTm():
            return set()
        case PairTm(a, b) | App(a, b):
            return term_names(a) | term_names(b)
        case TagTm(_, a) | Proj(a, _):
            return term_names(a)
        case Fn(_, args):
            out: set[str] = set()
            for a in args:
                out |= term_names(a)
            return out
    raise TypeError(t)


def free_names(a) -> set[str]:
    """Free variable and address names of a term, assertion or type."""
    match a:
        case Var() | Addr() | UnitTm() | PairTm() | App() | TagTm() | Proj() | Fn():
            return term_names(a)
        case Bot() | Top():
            return set()
        case Eq(l, r):
            return term_names(l) | term_names(r)
        case Is(_, t):
            return term_names(t)
        case And(l, r) | Implies(l, r):
            return free_names(l) | free_names(r)
        case Forall(v, body):
            return free_names(body) - {v}
        case One() | TyName():
            return set()
        case Plus(brs):
            out = set()
            for _, t in brs:
                out |= free_names(t)
            return out
        case With(brs):
            out = set()
            for _, t in brs:
                out |= free_names(t)
            return out
        case Tensor(b, first, second):
            return free_names(first) | (free_names(second) - {b})
        case Arrow(b, dom, cod):
            return free_names(dom) | (free_names(cod) - {b})
        case RType(base, b, pred):
            return free_names(base) | (free_names(pred) - {b})
    raise TypeError(a)


def fun_symbols(a) -> set[str]:
    match a:
        case Fn(sym, args):
            out = {sym}
            for x in args:
                out |= fun_symbols(x)
            return out
        case PairTm(x, y) | App(x, y) | Eq(x, y) | And(x, y) | Implies(x, y):
            return fun_symbols(x) | fun_symbols(y)
        case TagTm(_, x) | Proj(x, _) | Is(_, x) | Forall(_, x):
            return fun_symbols(x)
    return set()


# --------------------------------------------------------------------------
# Substitution


def subst_term(t: Term, m: Mapping[str, Term]) -> Term:
    match t:
        case Var(n) | Addr(n):
            return m.get(n, t)
        case UnitTm():
            return t
        case PairTm(a, b):
            return PairTm(subst_term(a, m), subst_term(b, m))
        case App(a, b):
            return App(subst_term(a, m), subst_term(b, m))
        case TagTm(k, a):
            return TagTm(k, subst_term(a, m))
        case Proj(a, k):
            return Proj(subst_term(a, m), k)
        case Fn(s, args):
            return Fn(s, tuple(subst_term(a, m) for a in args))
    raise TypeError(t)


def _range_names(m: Mapping[str, Term]) -> set[str]:
    out: set[str] = set()
    for v in m.values():
        out |= term_names(v)
    return out


def _under_binder(binder: str, body, m: Mapping[str, Term]):
    """Restrict ``m`` under ``binder``, renaming it if it would capture."""
    inner = {k: v for k, v in m.items() if k != binder}
    if not inner:
        return binder, inner
    relevant = {k: v for k, v in inner.items() if k in free_names(body)}
    if binder in _range_names(relevant):
        new = fresh(binder, _range_names(relevant) | free_names(body) | set(inner))
        inner[binder] = Var(new)
        return new, inner
    return binder, inner


def subst(a, m: Mapping[str, Term]):
    """Capture-avoiding substitution into an assertion, type or refined type."""
    if not m:
        return a
    match a:
        case Var() | Addr() | UnitTm() | PairTm() | App() | TagTm() | Proj() | Fn():
            return subst_term(a, m)
        case Bot() | Top():
            return a
        case Eq(l, r):
            return Eq(subst_term(l, m), subst_term(r, m))
        case Is(k, t):
            return Is(k, subst_term(t, m))
        case And(l, r):
            return And(subst(l, m), subst(r, m))
        case Implies(l, r):
            return Implies(subst(l, m), subst(r, m))
        case Forall(v, body):
            v2, inner = _under_binder(v, body, m)
            return Forall(v2, subst(body, inner))
        case One() | TyName():
            return a
        case Plus(brs):
            return Plus(tuple((l, subst(t, m)) for l, t in brs))
        case With(brs):
            return With(tuple((l, subst(t, m)) for l, t in brs))
        case Tensor(b, first, second):
            b2, inner = _under_binder(b, second, m)
            return Tensor(b2, subst(first, m), subst(second, inner))
        case Arrow(b, dom, cod):
            b2, inner = _under_binder(b, cod, m)
            return Arrow(b2, subst(dom, m), subst(cod, inner))
        case RType(base, b, pred):
            b2, inner = _under_binder(b, pred, m)
            return RType(subst(base, m), b2, subst(pred, inner))
    raise TypeError(a)


def subst_assertion(a: Assertion, v: str, m: Term) -> Assertion:
    return subst(a, {v: m})


def rename_binder(rt: RType, new: str) -> RType:
    if rt.binder == new:
        return rt
    return RType(rt.base, new, subst(rt.pred, {rt.binder: Var(new)}))


# --------------------------------------------------------------------------
# Alpha normalization


def alpha_normalize(a):
    """Rename every binder to a canonical ``%i`` name (in traversal order)."""
    counter = itertools.count()

    def nxt() -> str:
        return f"%{next(counter)}"

    def go(x, env: dict[str, Term]):
        match x:
            case Var(n):
                return env.get(n, x)
            case Addr() | UnitTm():
                return x
            case PairTm(p, q):
                return PairTm(go(p, env), go(q, env))
            case App(p, q):
                return App(go(p, env), go(q, env))
            case TagTm(k, p):
                return TagTm(k, go(p, env))
            case Proj(p, k):
                return Proj(go(p, env), k)
            case Fn(s, args):
                return Fn(s, tuple(go(t, env) for t in args))
            case Bot() | Top():
                return x
            case Eq(l, r):
                return Eq(go(l, env), go(r, env))
            case Is(k, t):
                return Is(k, go(t, env))
            case And(l, r):
                return And(go(l, env), go(r, env))
            case Implies(l, r):
                return Implies(go(l, env), go(r, env))
            case Forall(v, body):
                n = nxt()
                return Forall(n, go(body, {**env, v: Var(n)}))
            case One() | TyName():
                return x
            case Plus(brs):
                return Plus(tuple((l, go(t, env)) for l, t in brs))
            case With(brs):
                return With(tuple((l, go(t, env)) for l, t in brs))
            case Tensor(b, first, second):
                f = go(first, env)
                n = nxt()
                return Tensor(n, f, go(second, {**env, b: Var(n)}))
            case Arrow(b, dom, cod):
                d = go(dom, env)
                n = nxt()
                return Arrow(n, d, go(cod, {**env, b: Var(n)}))
            case RType(base, b, pred):
                bb = go(base, env)
                n = nxt()
                return RType(bb, n, go(pred, {**env, b: Var(n)}))
        raise TypeError(x)

    return go(a, {})


def alpha_equal(a, b) -> bool:
    return alpha_normalize(a) == alpha_normalize(b)


# --------------------------------------------------------------------------
# Definitions, unfolding, polarity


class Polarity(enum.Enum):
    POSITIVE = "+"
    NEGATIVE = "-"


def unfold(sig: Signature, t: Type) -> Type:
    if not isinstance(t, TyName):
        raise ResolutionError(f"cannot unfold non-name type {t}")
    try:
        return sig.types[t.name]
    except KeyError:
        raise ResolutionError(f"undefined type {t.name}") from None


def whnf(sig: Signature, t: Type) -> Type:
    """Unfold names until a constructor is exposed."""
    seen = set()
    while isinstance(t, TyName):
        if t.name in seen:
            raise WellFormednessError(f"non-contractive type {t.name}")
        seen.add(t.name)
        t = unfold(sig, t)
    return t


def polarity(t: Type) -> Polarity:
    match t:
        case One() | Plus() | Tensor():
            return Polarity.POSITIVE
        case With() | Arrow():
            return Polarity.NEGATIVE
        case TyName(n):
            raise ValueError(f"polarity of bare name {n}: unfold first")
    raise TypeError(t)


def purely_positive(t: RType | Type, sig: Signature) -> bool:
    seen: set[str] = set()

    def walk(x) -> bool:
        match x:
            case RType(base):
                return walk(base)
            case One():
                return True
            case Plus(brs):
                return all(walk(b) for _, b in brs)
            case Tensor(_, first, second):
                return walk(first) and walk(second)
            case With() | Arrow():
                return False
            case TyName(n):
                if n in seen:
                    return True
                seen.add(n)
                return walk(unfold(sig, x))
        raise TypeError(x)

    return walk(t)


# --------------------------------------------------------------------------
# Processes: free addresses, renaming, erasure


def value_addrs(v: Value) -> list[str]:
    match v:
        case UnitV():
            return []
        case PairV(a, b):
            return [a, b]
        case TagV(_, a):
            return [a]
    raise TypeError(v)


def free_addrs(p) -> set[str]:
    """Free address names of a process or continuation (incl. annotation types)."""
    match p:
        case Copy(d, s):
            return {d, s}
        case Cut(x, ann, left, right):
            inner = free_addrs(left) | free_addrs(right)
            if ann is not None:
                inner |= free_names(ann)
            return inner - {x}
        case Write(d, v):
            return {d, *value_addrs(v)}
        case Case(s, k):
            return {s} | free_addrs(k)
        case Anno(x, t, body):
            return {x} | free_names(t) | free_addrs(body)
        case Call(_, args, d):
            return {*args, d}
        case UnitK(body):
            return free_addrs(body)
        case PairK(x, y, body):
            return free_addrs(body) - {x, y}
        case BranchK(brs):
            out: set[str] = set()
            for _, x, body in brs:
                out |= free_addrs(body) - {x}
            return out
    raise TypeError(p)


def rename_addrs(p, m: Mapping[str, str]):
    """Capture-avoiding renaming of free addresses in a process or continuation."""
    if not m:
        return p

    def r(a: str) -> str:
        return m.get(a, a)

    tm = {k: addr_term(v) for k, v in m.items()}

    def bind(names: list[str], body_fv: set[str]):
        inner = {k: v for k, v in m.items() if k not in names}
        targets = {v for k, v in inner.items() if k in body_fv}
        out_names = []
        for n in names:
            if n in targets:
                nn = fresh(n, targets | body_fv | set(inner) | set(names))
                inner[n] = nn
                out_names.append(nn)
            else:
                out_names.append(n)
        return out_names, inner

    match p:
        case Copy(d, s):
            return Copy(r(d), r(s), span=p.span)
        case Write(d, v):
            match v:
                case UnitV():
                    nv = v
                case PairV(a, b):
                    nv = PairV(r(a), r(b))
                case TagV(k, a):
                    nv = TagV(k, r(a))
            return Write(r(d), nv, span=p.span)
        case Call(f, args, d):
            return Call(f, tuple(r(a) for a in args), r(d), span=p.span)
        case Anno(x, t, body):
            return Anno(r(x), subst(t, tm), rename_addrs(body, m), span=p.span)
        case Case(s, k):
            return Case(r(s), rename_addrs(k, m), span=p.span)
        case Cut(x, ann, left, right):
            fv = free_addrs(left) | free_addrs(right)
            (x2,), inner = bind([x], fv)
            ann2 = None if ann is None else subst(ann, {k: addr_term(v) for k, v in m.items() if k != x})
            return Cut(x2, ann2, rename_addrs(left, inner), rename_addrs(right, inner), span=p.span)
        case UnitK(body):
            return UnitK(rename_addrs(body, m))
        case PairK(x, y, body):
            (x2, y2), inner = bind([x, y], free_addrs(body))
            return PairK(x2, y2, rename_addrs(body, inner))
        case BranchK(brs):
            out = []
            for l, x, body in brs:
                (x2,), inner = bind([x], free_addrs(body))
                out.append((l, x2, rename_addrs(body, inner)))
            return BranchK(tuple(out))
    raise TypeError(p)


def erase(p):
    """Drop type annotations from a process (or a typing context's modes)."""
    match p:
        case TypingContext(entries):
            return [(b.addr, b.type) for b in entries]
        case Binding(addr, _, t):
            return (addr, t)
        case Anno(_, _, body):
            return erase(body)
        case Cut(x, _, left, right):
            return Cut(x, None, erase(left), erase(right), span=p.span)
        case Case(s, k):
            return Case(s, erase(k), span=p.span)
        case UnitK(body):
            return UnitK(erase(body))
        case PairK(x, y, body):
            return PairK(x, y, erase(body))
        case BranchK(brs):
            return BranchK(tuple((l, x, erase(b)) for l, x, b in brs))
        case Copy() | Write() | Call():
            return p
        case ProcDef(name, params, dest, body):
            return ProcDef(name, params, dest, erase(body), span=p.span)
    raise TypeError(p)


def peel(p: Process) -> Process:
    while isinstance(p, Anno):
        p = p.body
    return p
