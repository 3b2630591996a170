"""Decision procedure for entailment in the assertion logic.

Hypotheses and the negated goal are put in negation normal form, with
existentials skolemized.  A DPLL-style search splits disjunctions over an
incremental congruence closure.  Universals are instantiated by matching
their trigger patterns against the current term classes, a bounded number
of rounds.  Closing every branch proves the goal.  An open branch is a
countermodel only when no universal was involved; otherwise the answer is
unknown.
"""

from __future__ import annotations

import enum
import functools
import itertools
from dataclasses import dataclass, field

from .cc import CongruenceClosure, _opkey, term_size
from .syntax import (
    And, Bot, Eq, Fn, Forall, Implies, Is, Top, Var,
    addr_term, free_names, fun_symbols, subst, subst_term,
)


class Status(enum.Enum):
    VALID = "valid"
    REFUTED = "refuted"
    UNKNOWN = "unknown"


@dataclass(frozen=True)
class Verdict:
    status: Status
    reason: str = ""
    model: tuple = field(default=(), compare=False)

    @property
    def valid(self) -> bool:
        return self.status is Status.VALID

    def __bool__(self):
        return self.valid


@dataclass(frozen=True)
class ProverConfig:
    rounds: int = 3  # instantiation rounds per branch
    max_steps: int = 20000
    max_instances: int = 400


@dataclass(frozen=True)
class TheoryContext:
    hypotheses: tuple = ()
    terms: frozenset = frozenset()  # extra ground terms for the instantiation universe
    symbols: tuple = ()  # (name, arity) pairs
    axioms: tuple = ()


class _OutOfSteps(Exception):
    pass


# --------------------------------------------------------------------------
# Normal form.  Nodes: ("lit", pos, atom), ("and", kids), ("or", kids),
# ("all", vars, body), TRUE, FALSE.

TRUE = ("true",)
FALSE = ("false",)


class _Names:
    def __init__(self):
        self.n = itertools.count()

    def bound(self) -> str:
        return f"?x{next(self.n)}"

    def skolem(self) -> str:
        return f"!sk{next(self.n)}"


def _mk(kind, kids):
    flat = []
    for k in kids:
        if k[0] == kind:
            flat.extend(k[1])
        else:
            flat.append(k)
    unit, zero = (TRUE, FALSE) if kind == "and" else (FALSE, TRUE)
    if zero in flat:
        return zero
    flat = [k for k in flat if k != unit]
    if not flat:
        return unit
    if len(flat) == 1:
        return flat[0]
    return (kind, tuple(flat))


def nnf(a, pos: bool, scope: tuple[str, ...], names: _Names):
    match a:
        case Bot():
            return FALSE if pos else TRUE
        case Top():
            return TRUE if pos else FALSE
        case Eq(l, r):
            if l == r:
                return TRUE if pos else FALSE
            return ("lit", pos, a)
        case Is():
            return ("lit", pos, a)
        case And(l, r):
            return _mk("and" if pos else "or", [nnf(l, pos, scope, names), nnf(r, pos, scope, names)])
        case Implies(l, r):
            return _mk("or" if pos else "and", [nnf(l, not pos, scope, names), nnf(r, pos, scope, names)])
        case Forall(v, body):
            if pos:
                x = names.bound()
                inner = nnf(subst(body, {v: Var(x)}), pos, scope + (x,), names)
                if inner in (TRUE, FALSE):
                    return inner
                if inner[0] == "all":
                    return ("all", (x,) + inner[1], inner[2])
                return ("all", (x,), inner)
            sk = Fn(names.skolem(), tuple(Var(s) for s in scope))
            return nnf(subst(body, {v: sk}), pos, scope, names)
    raise TypeError(a)


def _subst_nnf(f, m):
    match f[0]:
        case "lit":
            return ("lit", f[1], subst(f[2], m))
        case "and" | "or":
            return _mk(f[0], [_subst_nnf(k, m) for k in f[1]])
        case "all":
            return ("all", f[1], _subst_nnf(f[2], m))
    return f


def _atoms(f):
    match f[0]:
        case "lit":
            yield f[2]
        case "and" | "or":
            for k in f[1]:
                yield from _atoms(k)
        case "all":
            yield from _atoms(f[2])


def _kids(t):
    return _opkey(t)[1]


def _subterms(t):
    yield t
    for k in _kids(t):
        yield from _subterms(k)


def _tvars(t, bound) -> set[str]:
    return {s.name for s in _subterms(t) if isinstance(s, Var) and s.name in bound}


def _triggers(vars_, body) -> list[list]:
    """Trigger groups.  Every subterm covering all bound variables is a
    group on its own; failing that, greedy multi-patterns."""
    bound = set(vars_)
    cands = {}
    for atom in _atoms(body):
        terms = (atom.lhs, atom.rhs) if isinstance(atom, Eq) else (atom.term,)
        for t in terms:
            for s in _subterms(t):
                if isinstance(s, Var):
                    continue
                vs = _tvars(s, bound)
                if vs and s not in cands:
                    cands[s] = vs
    full = [s for s in cands if cands[s] == bound]
    # a full cover nested in another full cover is redundant
    full = [s for s in full if not any(o != s and s in set(_subterms(o)) for o in full)]
    if full:
        return [[s] for s in sorted(full, key=repr)]
    # one greedy multi-pattern per starting candidate
    order = sorted(cands, key=lambda s: (-len(cands[s]), term_size(s), repr(s)))
    groups = []
    for start in order:
        chosen, covered = [start], set(cands[start])
        for s in order:
            if cands[s] - covered:
                chosen.append(s)
                covered |= cands[s]
        key = frozenset(chosen)
        if key not in {frozenset(g) for g in groups}:
            groups.append(chosen)
    return groups


# --------------------------------------------------------------------------
# Search state


class _State:
    def __init__(self, cc, queue, deferred, quants, seen, rounds):
        self.cc = cc
        self.queue = queue
        self.deferred = deferred
        self.quants = quants
        self.seen = seen
        self.rounds = rounds

    def clone(self):
        return _State(self.cc.clone(), list(self.queue), list(self.deferred), list(self.quants),
                      set(self.seen), self.rounds)


class _Search:
    def __init__(self, config: ProverConfig):
        self.config = config
        self.steps = 0
        self.used_quants = False
        self.open_is = False  # an Is literal was assumed without a deciding constructor
        self.instances = 0

    def tick(self):
        self.steps += 1
        if self.steps > self.config.max_steps:
            raise _OutOfSteps

    def _assert_lit(self, cc: CongruenceClosure, pos, atom):
        match atom:
            case Eq(l, r):
                cc.merge(l, r) if pos else cc.assert_diseq(l, r)
            case Is(k, t):
                if cc.is_status(k, t) is None:
                    self.open_is = True
                cc.assert_is(k, t) if pos else cc.assert_not_is(k, t)

    def _status(self, cc, f):
        match f[0]:
            case "true":
                return True
            case "false":
                return False
            case "lit":
                atom = f[2]
                s = cc.eq_status(atom.lhs, atom.rhs) if isinstance(atom, Eq) else cc.is_status(atom.label, atom.term)
                return s if s is None or f[1] else not s
            case "and":
                vals = [self._status(cc, k) for k in f[1]]
                if False in vals:
                    return False
                return True if all(v is True for v in vals) else None
            case "or":
                vals = [self._status(cc, k) for k in f[1]]
                if True in vals:
                    return True
                return False if all(v is False for v in vals) else None
        return None

    def run(self, st: _State):
        """Returns None when every branch closes, else an open state."""
        while True:
            self.tick()
            while st.queue:
                f = st.queue.pop()
                match f[0]:
                    case "true":
                        pass
                    case "false":
                        return None
                    case "lit":
                        self._assert_lit(st.cc, f[1], f[2])
                        if st.cc.conflict is not None:
                            return None
                    case "and":
                        st.queue.extend(f[1])
                    case "or":
                        st.deferred.append(f)
                    case "all":
                        self.used_quants = True
                        st.quants.append(f)
            if not st.cc.consistent():
                return None
            pending = []
            for f in st.deferred:
                kids = [k for k in f[1] if self._status(st.cc, k) is not False]
                if any(self._status(st.cc, k) is True for k in kids):
                    continue
                if not kids:
                    return None
                if len(kids) == 1:
                    st.queue.append(kids[0])
                else:
                    pending.append(("or", tuple(kids)))
            st.deferred = pending
            if st.queue:
                continue
            if st.deferred:
                first, rest = st.deferred[0], st.deferred[1:]
                for k in first[1]:
                    branch = st.clone()
                    branch.queue = [k]
                    branch.deferred = list(rest)
                    res = self.run(branch)
                    if res is not None:
                        return res
                return None
            if st.quants and st.rounds < self.config.rounds:
                new = self._instantiate(st)
                st.rounds += 1
                if new:
                    st.queue.extend(new)
                    continue
            return st

    # -- instantiation -----------------------------------------------------

    def _match(self, cc, pat, node, env, bound):
        """Match pattern ``pat`` against the class of ``node``."""
        root = cc.find(node)
        if isinstance(pat, Var) and pat.name in bound:
            if pat.name in env:
                if env[pat.name] == root:
                    yield env
                return
            yield {**env, pat.name: root}
            return
        if not _tvars(pat, bound):
            i = cc.lookup(pat)
            if i is not None and cc.find(i) == root:
                yield env
            return
        op, pkids = _opkey(pat)
        for m in cc.members[root]:
            if cc.ops[m] != op:
                continue
            yield from self._match_kids(cc, pkids, cc.kids[m], env, bound)

    def _match_kids(self, cc, pats, nodes, env, bound):
        if not pats:
            yield env
            return
        for e in self._match(cc, pats[0], nodes[0], env, bound):
            yield from self._match_kids(cc, pats[1:], nodes[1:], e, bound)

    def _match_group(self, cc, group, bound):
        envs = [{}]
        for trig in group:
            op = _opkey(trig)[0]
            nxt = []
            for env in envs:
                for n in cc.by_op.get(op, ()):
                    for e in self._match(cc, trig, n, env, bound):
                        if e not in nxt:
                            nxt.append(e)
            envs = nxt
        covered = set().union(*(_tvars(t, bound) for t in group))
        loose = sorted(bound - covered)
        if loose and envs:
            roots = cc.roots()
            envs = [{**e, **dict(zip(loose, combo))}
                    for e in envs for combo in itertools.product(roots, repeat=len(loose))]
        return envs

    def _instantiate(self, st: _State):
        cc = st.cc
        out = []
        for qi, (_, vars_, body) in enumerate(st.quants):
            bound = set(vars_)
            envs = []
            for group in _triggers(vars_, body):
                for e in self._match_group(cc, group, bound):
                    if e not in envs:
                        envs.append(e)
            for env in envs:
                inst = {v: cc.representative(r) for v, r in env.items()}
                key = (qi, tuple(sorted((v, repr(t)) for v, t in inst.items())))
                if key in st.seen:
                    continue
                st.seen.add(key)
                self.instances += 1
                self.tick()
                if self.instances > self.config.max_instances:
                    raise _OutOfSteps
                out.append(_subst_nnf(body, inst))
        return out


# --------------------------------------------------------------------------
# Entry points


def _canonical(hyps, goal):
    """Rename free names to a canonical order so equal queries share a cache slot."""
    order: dict[str, str] = {}
    for a in (*hyps, goal):
        for n in sorted(free_names(a)):
            if n not in order:
                order[n] = f"%c{len(order)}"
    m = {n: Var(c) for n, c in order.items()}
    return tuple(subst(h, m) for h in hyps), subst(goal, m), {c: n for n, c in order.items()}


def _relevant_axioms(axioms, syms):
    out = []
    for ax in axioms:
        fs = fun_symbols(ax)
        if not fs or fs & syms:
            out.append(ax)
    return out


def entails(hyps, goal, axioms=(), config: ProverConfig | None = None) -> Verdict:
    """Decide whether the hypotheses (with axioms) entail the goal.
    ``hyps`` may be a list of assertions or a :class:`TheoryContext`."""
    config = config or ProverConfig()
    terms: tuple = ()
    if isinstance(hyps, TheoryContext):
        axioms = (*hyps.axioms, *axioms)
        terms = tuple(sorted(hyps.terms, key=repr))
        hyps = hyps.hypotheses
    hyps = tuple(h for h in hyps if not isinstance(h, Top))
    if isinstance(goal, Top) or goal in hyps:
        return Verdict(Status.VALID, "trivial")
    syms: set[str] = set()
    for a in (*hyps, goal):
        syms |= fun_symbols(a)
    axioms = tuple(_relevant_axioms(axioms, syms))
    # ground terms ride along as trivial equations so they get canonically renamed
    seeds = tuple(Eq(t, Fn("!seed", (t,))) for t in terms)
    chyps, cgoal, back = _canonical(hyps + seeds, goal)
    v = _entails_cached(chyps, cgoal, axioms, config)
    if v.model:
        inv = {c: addr_term(n) for c, n in back.items()}
        model = tuple(frozenset(subst_term(t, inv) for t in cls) for cls in v.model)
        return Verdict(v.status, v.reason, model)
    return v


@functools.lru_cache(maxsize=8192)
def _entails_cached(hyps, goal, axioms, config) -> Verdict:
    return satisfiable_search((*axioms, *hyps), goal, config)


def satisfiable_search(hyps, goal, config: ProverConfig) -> Verdict:
    names = _Names()
    roots = [nnf(h, True, (), names) for h in hyps] + [nnf(goal, False, (), names)]
    search = _Search(config)
    st = _State(CongruenceClosure(), roots[::-1], [], [], set(), 0)
    try:
        open_state = search.run(st)
    except _OutOfSteps:
        return Verdict(Status.UNKNOWN, "search budget exhausted")
    if open_state is None:
        return Verdict(Status.VALID, "all branches closed")
    model = tuple(
        frozenset(t for t in cls if not _internal(t))
        for cls in open_state.cc.partition()
    )
    model = tuple(c for c in model if c)
    if search.used_quants:
        return Verdict(Status.UNKNOWN, "no contradiction found within the instantiation bound", model)
    if search.open_is:
        return Verdict(Status.UNKNOWN, "falsifying assignment leaves a tag test undetermined", model)
    return Verdict(Status.REFUTED, "countermodel found", model)


def _internal(t) -> bool:
    return any(isinstance(s, Fn) and s.sym.startswith("!") for s in _subterms(t))


def satisfiable(assertions, config: ProverConfig | None = None) -> Verdict:
    """REFUTED means satisfiable (a model exists), VALID means unsatisfiable."""
    return satisfiable_search(tuple(assertions), Bot(), config or ProverConfig())


__all__ = ["Status", "Verdict", "ProverConfig", "TheoryContext", "entails", "satisfiable", "nnf"]
