"""Bidirectional process typing.

A context entry is either known (``=>``, its type is an input) or a hole
(``<=``, its type is demanded by the process being checked and becomes an
output).  Holes arise from unannotated cuts whose left side cannot
synthesize: the right side is checked first and the type it demands for the
cut address is then used to check the left side.  Every cut in the returned
process carries the type that was used for it.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from . import faults
from .pretty import pretty
from .prover import ProverConfig, Status, Verdict, entails
from .subtyping import Subtyper
from .syntax import (
    Anno, App, Arrow, BranchK, Call, Case, Copy, Cut, Eq, Fn, Forall, Implies, Mode, One,
    PairK, PairTm, PairV, Plus, Proj, RType, Signature, TagTm, TagV, Tensor, TypingContext,
    UnitK, UnitTm, UnitV, Var, With, Write, addr_term, alpha_equal, free_addrs,
    free_names, fresh, rename_addrs, subst, whnf,
)


@dataclass(frozen=True)
class ModedJudgment:
    """The succedent: ``subject <= type`` (checking) or ``subject => ?`` (synthesis)."""

    subject: str
    type: RType | None = None

    @property
    def checking(self) -> bool:
        return self.type is not None


@dataclass(frozen=True)
class Obligation:
    kind: str  # "entails" or "subtype"
    hyps: tuple
    goal: object  # Assertion, or (lhs, rhs, subject) for subtyping
    verdict: Verdict

    def render(self) -> str:
        hyps = ", ".join(pretty(h) for h in self.hyps) or "."
        if self.kind == "entails":
            return f"{hyps} |- {pretty(self.goal)}"
        lhs, rhs, subj = self.goal
        return f"{hyps} |- {pretty(lhs)} <= {pretty(rhs)}  (at {pretty(subj)})"


@dataclass
class Derivation:
    rule: str
    subject: str
    process: object = None
    type: RType | None = None
    premises: list = field(default_factory=list)
    obligations: list[Obligation] = field(default_factory=list)
    back_edge: str | None = None

    def walk(self):
        yield self
        for p in self.premises:
            yield from p.walk()

    def back_edges(self) -> list[str]:
        return [d.back_edge for d in self.walk() if d.back_edge is not None]

    def rules(self) -> list[str]:
        return [d.rule for d in self.walk()]


class TypeCheckError(Exception):
    """A failed rule.  ``obligation`` can be re-run on its own."""

    def __init__(self, rule: str, message: str, span=None, obligation: Obligation | None = None):
        super().__init__(message)
        self.rule = rule
        self.message = message
        self.span = span
        self.obligation = obligation

    @property
    def verdict(self) -> Verdict | None:
        return None if self.obligation is None else self.obligation.verdict

    @property
    def code(self) -> str:
        v = self.verdict
        if v is None:
            return "E-RULE"
        return "E-UNKNOWN" if v.status is Status.UNKNOWN else "E-REFUTED"

    def __str__(self):
        out = f"[{self.rule}] {self.message}"
        if self.obligation is not None:
            out += f"\n  obligation: {self.obligation.render()}\n  verdict: {self.verdict.status.value}"
            if self.verdict.reason:
                out += f" ({self.verdict.reason})"
        return out


@dataclass(frozen=True)
class CheckerConfig:
    prover: ProverConfig = ProverConfig()
    subtype_fuel: int = 64


@dataclass(frozen=True)
class _Env:
    gamma: TypingContext
    facts: tuple = ()

    def hyps(self) -> tuple:
        return tuple(self.gamma.hypotheses()) + self.facts

    def names(self) -> set[str]:
        out = set(self.gamma.addrs())
        for b in self.gamma.entries:
            if b.type is not None:
                out |= free_names(b.type)
        for f in self.facts:
            out |= free_names(f)
        return out

    def add(self, addr: str, t: RType | None, mode: Mode = Mode.IN) -> "_Env":
        return _Env(self.gamma.extend(addr, t, mode), self.facts)

    def fact(self, a) -> "_Env":
        return _Env(self.gamma, self.facts + (a,))


@dataclass
class _Res:
    proc: object
    synth: RType | None
    demands: dict
    deriv: Derivation


def _merge_demands(into: dict, more: dict, span):
    for a, t in more.items():
        if a in into and not alpha_equal(into[a], t):
            raise TypeCheckError(
                "snip", f"conflicting types demanded for {a}: {pretty(into[a])} and {pretty(t)}", span)
        into.setdefault(a, t)


class Checker:
    def __init__(self, sig: Signature, config: CheckerConfig | None = None):
        self.sig = sig
        self.config = config or CheckerConfig()
        self.sub = Subtyper(sig, self.config.subtype_fuel, self.config.prover)

    # -- obligations -------------------------------------------------------

    def prove(self, hyps, goal, rule, span, what) -> Obligation:
        v = entails(hyps, goal, self.sig.axioms, self.config.prover)
        ob = Obligation("entails", tuple(hyps), goal, v)
        if not v.valid:
            raise TypeCheckError(rule, what, span, ob)
        return ob

    def subtype(self, hyps, lhs: RType, rhs: RType, subject, rule, span, what) -> Obligation:
        v = self.sub.refined(hyps, lhs, rhs, subject)
        ob = Obligation("subtype", tuple(hyps), (lhs, rhs, subject), v)
        if not v.valid:
            raise TypeCheckError(rule, what, span, ob)
        return ob

    def whnf(self, t: RType):
        return whnf(self.sig, t.base)

    # -- helpers -----------------------------------------------------------

    def _demand(self, env: _Env, addr: str, want: RType, res_demands: dict, obs: list, rule, span):
        """``addr`` must have type ``want``: a hole records the demand, a
        known entry goes through subsumption on the left."""
        b = env.gamma.lookup(addr)
        if b is None:
            raise TypeCheckError(rule, f"unknown or unreadable address {addr}", span)
        if b.mode is Mode.OUT:
            _merge_demands(res_demands, {addr: want}, span)
            return
        obs.append(self.subtype(
            env.hyps(), b.type, want, addr_term(addr), "<=L", span,
            f"{addr} does not have the required type {pretty(want)}"))

    def _known(self, env: _Env, addr: str, rule, span):
        b = env.gamma.lookup(addr)
        if b is None:
            raise TypeCheckError(rule, f"unknown address {addr}", span)
        if b.mode is Mode.OUT:
            raise TypeCheckError(rule, f"the type of {addr} is not known here; add an annotation", span)
        return b.type

    def _finish(self, env: _Env, dest: ModedJudgment, synth: RType, deriv: Derivation, span) -> RType:
        """Phase change at the succedent (<=R) when a synthesized type meets a checked one."""
        if not dest.checking:
            return synth
        ob = self.subtype(env.hyps(), synth, dest.type, addr_term(dest.subject), "<=R", span,
                          f"{dest.subject} does not satisfy {pretty(dest.type)}")
        deriv.obligations.append(ob)
        deriv.rule += ",<=R"
        return dest.type

    def _fresh(self, env: _Env, base: str, extra=()) -> str:
        return fresh(base, env.names() | set(extra) | {base})

    def _bind(self, env: _Env, dest: ModedJudgment, names, body):
        """Rename continuation binders that clash with the context."""
        taken = env.names() | {dest.subject}
        if dest.type is not None:
            taken |= free_names(dest.type)
        m, out = {}, []
        for n in names:
            if n in taken or n in out:
                nn = fresh(n, taken | set(out) | free_addrs(body) | {n})
                m[n] = nn
                out.append(nn)
            else:
                out.append(n)
        return out, rename_addrs(body, m)

    # -- the rules ---------------------------------------------------------

    def check(self, env: _Env, p, dest: ModedJudgment) -> _Res:
        match p:
            case Write(d, v) if d == dest.subject:
                return self._right_write(env, p, dest)
            case Write(d, v):
                return self._left_write(env, p, dest)
            case Case(d, k) if d == dest.subject:
                return self._right_case(env, p, dest)
            case Case(d, k):
                return self._left_case(env, p, dest)
            case Copy():
                return self._copy(env, p, dest)
            case Cut():
                return self._cut(env, p, dest)
            case Anno():
                return self._anno(env, p, dest)
            case Call():
                return self._call(env, p, dest)
        raise TypeCheckError("?", f"not a process: {p!r}")

    def _right_write(self, env, p: Write, dest) -> _Res:
        if not dest.checking:
            raise TypeCheckError("write", f"cannot infer the type written to {dest.subject}; add an annotation", p.span)
        t = dest.type
        base = self.whnf(t)
        demands: dict = {}
        d = Derivation("", dest.subject, p, t)
        match base, p.value:
            case One(), UnitV():
                d.rule = "1R"
                d.obligations.append(self.prove(env.hyps(), t.at(UnitTm()), "1R", p.span,
                                                f"the unit written to {p.dst} violates its refinement"))
            case Tensor(x, first, second), PairV(s, u):
                d.rule = "*R"
                s_t, u_t = addr_term(s), addr_term(u)
                self._demand(env, s, first, demands, d.obligations, "*R", p.span)
                w = self._fresh(env, "w", {x, t.binder})
                post = RType(subst(second, {x: s_t}), w, t.at(PairTm(s_t, Var(w))))
                self._demand(env, u, post, demands, d.obligations, "*R", p.span)
            case Plus(), TagV(k, s):
                d.rule = "+R"
                arm = base.get(k)
                if arm is None:
                    raise TypeCheckError("+R", f"label {k} is not in {pretty(t.base)}", p.span)
                w = self._fresh(env, "w", {t.binder})
                self._demand(env, s, RType(arm, w, t.at(TagTm(k, Var(w)))), demands, d.obligations, "+R", p.span)
            case (With() | Arrow()), _:
                raise TypeCheckError("write", f"{p.dst} has negative type; a write to it must be a case", p.span)
            case _:
                raise TypeCheckError("write", f"value does not match the type {pretty(t.base)} of {p.dst}", p.span)
        return _Res(p, t, demands, d)

    def _left_write(self, env, p: Write, dest) -> _Res:
        t = self._known(env, p.dst, "write", p.span)
        base = self.whnf(t)
        demands: dict = {}
        d = Derivation("", dest.subject, p)
        match base, p.value:
            case With(), TagV(k, x):
                d.rule = "&L"
                if x != dest.subject:
                    raise TypeCheckError("&L", f"projection must write to the destination {dest.subject}", p.span)
                arm = base.get(k)
                if arm is None:
                    raise TypeCheckError("&L", f"label {k} is not in {pretty(t.base)}", p.span)
                synth = arm
            case Arrow(x, dom, cod), PairV(s, y):
                d.rule = "->L"
                if y != dest.subject:
                    raise TypeCheckError("->L", f"application must write to the destination {dest.subject}", p.span)
                self._demand(env, s, dom, demands, d.obligations, "->L", p.span)
                synth = subst(cod, {x: addr_term(s)})
            case (One() | Plus() | Tensor()), _:
                raise TypeCheckError("write", f"{p.dst} has positive type; it cannot be written by a reader", p.span)
            case _:
                raise TypeCheckError("write", f"value does not match the type {pretty(t.base)} of {p.dst}", p.span)
        d.type = self._finish(env, dest, synth, d, p.span)
        return _Res(p, d.type, demands, d)

    def _left_case(self, env, p: Case, dest) -> _Res:
        t = self._known(env, p.subject, "case", p.span)
        base = self.whnf(t)
        if not dest.checking:
            raise TypeCheckError("case", f"cannot infer the type of {dest.subject} from a case; add an annotation", p.span)
        subj = addr_term(p.subject)
        demands: dict = {}
        d = Derivation("", dest.subject, p, dest.type)
        match base, p.cont:
            case One(), UnitK(body):
                d.rule = "1L"
                r = self.check(env.fact(Eq(subj, UnitTm())), body, dest)
                _merge_demands(demands, r.demands, p.span)
                d.premises.append(r.deriv)
                cont = UnitK(r.proc)
            case Tensor(x0, first, second), PairK(x, y, body):
                d.rule = "*L"
                (x, y), body = self._bind(env, dest, [x, y], body)
                xt = addr_term(x)
                w = self._fresh(env, "w", {x, y, t.binder})
                env2 = env.add(x, first).add(y, RType(subst(second, {x0: xt}), w, t.at(PairTm(xt, Var(w)))))
                env2 = env2.fact(Eq(subj, PairTm(xt, addr_term(y))))
                r = self.check(env2, body, dest)
                self._scope(r.demands, {x, y}, p.span)
                _merge_demands(demands, r.demands, p.span)
                d.premises.append(r.deriv)
                cont = PairK(x, y, r.proc)
            case Plus(), BranchK(brs):
                d.rule = "+L"
                missing = set(base.labels()) - set(p.cont.labels())
                if missing:
                    raise TypeCheckError("+L", f"missing branches {sorted(missing)}", p.span)
                out = []
                for k, x, body in brs:
                    arm = base.get(k)
                    if arm is None:
                        out.append((k, x, body))  # unreachable branch
                        continue
                    (x,), body = self._bind(env, dest, [x], body)
                    w = self._fresh(env, "w", {x, t.binder})
                    env2 = env.add(x, RType(arm, w, t.at(TagTm(k, Var(w)))))
                    if not faults.active("drop_plus_path_eq"):
                        env2 = env2.fact(Eq(subj, TagTm(k, addr_term(x))))
                    r = self.check(env2, body, dest)
                    self._scope(r.demands, {x}, p.span)
                    _merge_demands(demands, r.demands, p.span)
                    d.premises.append(r.deriv)
                    out.append((k, x, r.proc))
                cont = BranchK(tuple(out))
            case (With() | Arrow()), _:
                raise TypeCheckError("case", f"{p.subject} has negative type; a case cannot read it", p.span)
            case _:
                raise TypeCheckError("case", f"continuation does not match the type {pretty(t.base)} of {p.subject}", p.span)
        return _Res(Case(p.subject, cont, span=p.span), dest.type, demands, d)

    def _right_case(self, env, p: Case, dest) -> _Res:
        if not dest.checking:
            raise TypeCheckError("case", f"cannot infer the type of {dest.subject} from a case; add an annotation", p.span)
        t = dest.type
        base = self.whnf(t)
        demands: dict = {}
        d = Derivation("", dest.subject, p, t)
        match base, p.cont:
            case With(), BranchK(brs):
                d.rule = "&R"
                if set(base.labels()) != set(p.cont.labels()):
                    raise TypeCheckError("&R", f"branches {sorted(p.cont.labels())} do not match {sorted(base.labels())}", p.span)
                out = []
                for k, x, body in brs:
                    (x,), body = self._bind(env, dest, [x], body)
                    r = self.check(env, body, ModedJudgment(x, base.get(k)))
                    _merge_demands(demands, r.demands, p.span)
                    d.premises.append(r.deriv)
                    out.append((k, x, r.proc))
                if not faults.active("skip_with_entailment"):
                    w = Var(self._fresh(env, "rec", free_names(t)))
                    hyps = env.hyps() + tuple(arm.at(Proj(w, k)) for k, arm in base.branches)
                    d.obligations.append(self.prove(hyps, t.at(w), "&R", p.span,
                                                    f"the record written to {dest.subject} violates its refinement"))
                cont = BranchK(tuple(out))
            case Arrow(x0, dom, cod), PairK(x, y, body):
                d.rule = "->R"
                (x, y), body = self._bind(env, dest, [x, y], body)
                xt = addr_term(x)
                r = self.check(env.add(x, dom), body, ModedJudgment(y, subst(cod, {x0: xt})))
                self._scope(r.demands, {x}, p.span)
                _merge_demands(demands, r.demands, p.span)
                d.premises.append(r.deriv)
                f = Var(self._fresh(env, "fun", free_names(t)))
                v = self._fresh(env, "arg", free_names(t) | {f.name})
                vt = Var(v)
                spec = Forall(v, Implies(dom.at(vt), subst(cod, {x0: vt}).at(App(f, vt))))
                d.obligations.append(self.prove(env.hyps() + (spec,), t.at(f), "->R", p.span,
                                                f"the function written to {dest.subject} violates its refinement"))
                cont = PairK(x, y, r.proc)
            case (One() | Plus() | Tensor()), _:
                raise TypeCheckError("case", f"{dest.subject} has positive type; a case cannot write it", p.span)
            case _:
                raise TypeCheckError("case", f"continuation does not match the type {pretty(t.base)} of {dest.subject}", p.span)
        return _Res(Case(p.subject, cont, span=p.span), t, demands, d)

    def _scope(self, demands: dict, local: set[str], span):
        for a, t in demands.items():
            leak = free_names(t) & local
            if leak:
                raise TypeCheckError("snip", f"the type demanded for {a} mentions {sorted(leak)} out of scope; add an annotation", span)

    def _copy(self, env, p: Copy, dest) -> _Res:
        if p.dst != dest.subject:
            raise TypeCheckError("id", f"copy must write to the destination {dest.subject}", p.span)
        b = env.gamma.lookup(p.src)
        if b is None:
            raise TypeCheckError("id", f"unknown address {p.src}", p.span)
        d = Derivation("id", dest.subject, p)
        if b.mode is Mode.OUT:
            if not dest.checking:
                raise TypeCheckError("id", f"cannot infer the type copied to {dest.subject}; add an annotation", p.span)
            d.rule = "id+" if self._positive(dest.type) else "id-"
            d.type = dest.type
            return _Res(p, dest.type, {p.src: dest.type}, d)
        d.rule = "id+" if self._positive(b.type) else "id-"
        if dest.checking:
            # the copy makes dest and src equal, so the refinement is checked at src
            d.obligations.append(self.subtype(env.hyps(), b.type, dest.type, addr_term(p.src), "id", p.span,
                                              f"{p.src} does not have the type {pretty(dest.type)}"))
            d.type = dest.type
        else:
            d.type = b.type
        return _Res(p, d.type, {}, d)

    def _positive(self, t: RType) -> bool:
        return isinstance(self.whnf(t), (One, Plus, Tensor))

    def synthesizes(self, env: _Env, p, x: str) -> bool:
        """Whether ``p`` writing to ``x`` outputs its type (left-to-right snip)."""
        match p:
            case Call() | Anno():
                return True
            case Write(d, _):
                return d != x
            case Copy(_, s):
                b = env.gamma.lookup(s)
                return b is not None and b.mode is Mode.IN
            case Cut(y, ann, left, right):
                if ann is not None or self.synthesizes(env, left, y):
                    return self.synthesizes(env.add(y, RType(One())) if y not in env.gamma else env, right, x)
                return self.synthesizes(env, right, x)
        return False

    def _cut(self, env, p: Cut, dest) -> _Res:
        x, left, right = p.binder, p.left, p.right
        taken = env.names() | {dest.subject} | (free_names(dest.type) if dest.type else set())
        if x in taken:
            nx = fresh(x, taken | free_addrs(left) | free_addrs(right) | {x})
            left, right = rename_addrs(left, {x: nx}), rename_addrs(right, {x: nx})
            x = nx
        demands: dict = {}
        d = Derivation("", dest.subject, p)
        if p.ann is not None:
            d.rule = "cut"
            ann = p.ann
            lr = self.check(env, left, ModedJudgment(x, ann))
            rr = self.check(env.add(x, ann), right, dest)
        elif self.synthesizes(env, left, x):
            d.rule = "snip-"
            lr = self.check(env, left, ModedJudgment(x))
            ann = lr.synth
            rr = self.check(env.add(x, ann), right, dest)
        else:
            d.rule = "snip+"
            rr = self.check(env.add(x, None, Mode.OUT), right, dest)
            ann = rr.demands.pop(x, None)
            if ann is None:
                raise TypeCheckError("snip+", f"nothing determines the type of {x}; add an annotation", p.span)
            if x in free_names(ann):
                raise TypeCheckError("snip+", f"the type demanded for {x} refers to {x} itself; add an annotation", p.span)
            lr = self.check(env, left, ModedJudgment(x, ann))
        _merge_demands(demands, lr.demands, p.span)
        _merge_demands(demands, rr.demands, p.span)
        d.premises += [lr.deriv, rr.deriv]
        d.type = rr.synth
        return _Res(Cut(x, ann, lr.proc, rr.proc, span=p.span), rr.synth, demands, d)

    def _anno(self, env, p: Anno, dest) -> _Res:
        x, t = p.binder, p.type
        if x == dest.subject:
            d = Derivation("AnnoR", x, p)
            r = self.check(env, p.body, ModedJudgment(x, t))
            d.premises.append(r.deriv)
            d.type = self._finish(env, dest, t, d, p.span)
            return _Res(Anno(x, t, r.proc, span=p.span), d.type, r.demands, d)
        b = env.gamma.lookup(x)
        if b is None:
            raise TypeCheckError("AnnoL", f"unknown address {x}", p.span)
        d = Derivation("AnnoL", dest.subject, p)
        demands: dict = {}
        if b.mode is Mode.OUT:
            demands[x] = t
        else:
            d.obligations.append(self.subtype(env.hyps(), b.type, t, addr_term(x), "AnnoL", p.span,
                                              f"{x} does not have the annotated type {pretty(t)}"))
        env2 = _Env(env.gamma.replace(x, t, Mode.IN), env.facts)
        r = self.check(env2, p.body, dest)
        _merge_demands(demands, r.demands, p.span)
        d.premises.append(r.deriv)
        d.type = r.synth
        return _Res(Anno(x, t, r.proc, span=p.span), r.synth, demands, d)

    def _call(self, env, p: Call, dest) -> _Res:
        if p.dst != dest.subject:
            raise TypeCheckError("call", f"call must write to the destination {dest.subject}", p.span)
        pd = self.sig.procs.get(p.name)
        if pd is None:
            raise TypeCheckError("call", f"unknown definition {p.name}", p.span)
        if len(pd.params) != len(p.args):
            raise TypeCheckError("call", f"{p.name} expects {len(pd.params)} arguments", p.span)
        d = Derivation("call", dest.subject, p, back_edge=p.name)
        demands: dict = {}
        sub: dict = {}
        for (xi, ti), a in zip(pd.params, p.args):
            self._demand(env, a, subst(ti, sub), demands, d.obligations, "call", p.span)
            sub[xi] = addr_term(a)
        y, cod = pd.dest
        synth = subst(cod, {**sub, y: addr_term(p.dst)})
        d.type = self._finish(env, dest, synth, d, p.span)
        return _Res(p, d.type, demands, d)


# --------------------------------------------------------------------------
# Public entry points


def _context(gamma) -> TypingContext:
    if isinstance(gamma, TypingContext):
        return gamma
    ctx = TypingContext()
    for a, t in gamma:
        ctx = ctx.extend(a, t)
    return ctx


def check_process(sig: Signature, gamma, p, dest: ModedJudgment, config: CheckerConfig | None = None) -> Derivation:
    """Check ``gamma |- p : dest``; the derivation's ``process`` is the elaborated process."""
    ck = Checker(sig, config)
    env = _Env(_context(gamma))
    res = ck.check(env, p, dest)
    if res.demands:
        a = sorted(res.demands)[0]
        raise TypeCheckError("snip", f"unresolved demand on {a}", getattr(p, "span", None))
    res.deriv.process = res.proc
    res.deriv.type = res.synth
    return res.deriv


def definition_context(pd) -> TypingContext:
    ctx = TypingContext()
    for x, t in pd.params:
        ctx = ctx.extend(x, t)
    return ctx


def check_definition(sig: Signature, name: str, config: CheckerConfig | None = None) -> Derivation:
    """Check a definition's body against its own signature; recursive calls
    use the declared signature (assume-guarantee)."""
    pd = sig.procs.get(name)
    if pd is None:
        raise TypeCheckError("call", f"unknown definition {name}")
    y, t = pd.dest
    deriv = check_process(sig, definition_context(pd), pd.body, ModedJudgment(y, t), config)
    deriv.rule = f"def {name}: " + deriv.rule
    return deriv


def elaborate(sig: Signature, config: CheckerConfig | None = None) -> Signature:
    """The signature with every definition body replaced by its elaborated form."""
    procs = {}
    for name, pd in sig.procs.items():
        deriv = check_definition(sig, name, config)
        procs[name] = type(pd)(pd.name, pd.params, pd.dest, deriv.process, span=pd.span)
    return sig.with_procs(procs)
