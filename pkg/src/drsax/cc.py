"""Congruence closure over ground terms with injective, disjoint, acyclic
value constructors (unit, pairs, tags).  Application and projection are
plain uninterpreted symbols."""

from __future__ import annotations

from .syntax import Addr, App, Fn, PairTm, Proj, TagTm, Term, UnitTm, Var

_CTORS = ("unit", "pair", "tag")


def _opkey(t: Term):
    match t:
        case Var() | Addr():
            return ("leaf", t), ()
        case Fn(s, ()):
            return ("leaf", t), ()
        case UnitTm():
            return ("unit",), ()
        case PairTm(a, b):
            return ("pair",), (a, b)
        case TagTm(k, a):
            return ("tag", k), (a,)
        case App(f, x):
            return ("app",), (f, x)
        case Proj(a, k):
            return ("proj", k), (a,)
        case Fn(s, args):
            return ("fn", s, len(args)), args
    raise TypeError(t)


def term_size(t: Term) -> int:
    _, kids = _opkey(t)
    return 1 + sum(term_size(k) for k in kids)


class CongruenceClosure:
    def __init__(self):
        self.ids: dict[Term, int] = {}
        self.terms: list[Term] = []
        self.ops: list[tuple] = []
        self.kids: list[tuple[int, ...]] = []
        self.parent: list[int] = []
        self.members: dict[int, list[int]] = {}
        self.uses: dict[int, list[int]] = {}
        self.ctor: dict[int, int] = {}
        self.sigs: dict[tuple, int] = {}
        self.by_op: dict[tuple, list[int]] = {}
        self.diseqs: list[tuple[int, int]] = []
        self.neg_is: list[tuple[str, int]] = []
        self.conflict: str | None = None

    def clone(self) -> "CongruenceClosure":
        c = CongruenceClosure.__new__(CongruenceClosure)
        c.ids = dict(self.ids)
        c.terms = list(self.terms)
        c.ops = list(self.ops)
        c.kids = list(self.kids)
        c.parent = list(self.parent)
        c.members = {k: list(v) for k, v in self.members.items()}
        c.uses = {k: list(v) for k, v in self.uses.items()}
        c.ctor = dict(self.ctor)
        c.sigs = dict(self.sigs)
        c.by_op = {k: list(v) for k, v in self.by_op.items()}
        c.diseqs = list(self.diseqs)
        c.neg_is = list(self.neg_is)
        c.conflict = self.conflict
        return c

    # -- structure ---------------------------------------------------------

    def find(self, i: int) -> int:
        root = i
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[i] != root:
            self.parent[i], i = root, self.parent[i]
        return root

    def lookup(self, t: Term) -> int | None:
        return self.ids.get(t)

    def add(self, t: Term) -> int:
        i = self.ids.get(t)
        if i is not None:
            return i
        op, kids = _opkey(t)
        kid_ids = tuple(self.add(k) for k in kids)
        i = len(self.terms)
        self.ids[t] = i
        self.terms.append(t)
        self.ops.append(op)
        self.kids.append(kid_ids)
        self.parent.append(i)
        self.members[i] = [i]
        self.uses[i] = []
        self.by_op.setdefault(op, []).append(i)
        if op[0] in _CTORS:
            self.ctor[i] = i
        if kid_ids:
            for k in kid_ids:
                self.uses[self.find(k)].append(i)
            sig = (op, tuple(self.find(k) for k in kid_ids))
            other = self.sigs.get(sig)
            if other is None:
                self.sigs[sig] = i
            else:
                self._merge(i, other)
        return i

    # -- merging -----------------------------------------------------------

    def merge(self, s: Term, t: Term):
        self._merge(self.add(s), self.add(t))

    def _merge(self, a: int, b: int):
        pending = [(a, b)]
        while pending and self.conflict is None:
            x, y = pending.pop()
            rx, ry = self.find(x), self.find(y)
            if rx == ry:
                continue
            if len(self.members[rx]) < len(self.members[ry]):
                rx, ry = ry, rx
            cx, cy = self.ctor.get(rx), self.ctor.get(ry)
            if cx is not None and cy is not None:
                if self.ops[cx] != self.ops[cy]:
                    self.conflict = f"constructor clash: {self.terms[cx]} vs {self.terms[cy]}"
                    return
                pending.extend(zip(self.kids[cx], self.kids[cy]))
            self.parent[ry] = rx
            self.members[rx].extend(self.members.pop(ry))
            if cx is None and cy is not None:
                self.ctor[rx] = cy
            self.ctor.pop(ry, None)
            moved = self.uses.pop(ry)
            for u in moved:
                sig = (self.ops[u], tuple(self.find(k) for k in self.kids[u]))
                other = self.sigs.get(sig)
                if other is None:
                    self.sigs[sig] = u
                elif self.find(other) != self.find(u):
                    pending.append((u, other))
            self.uses[rx].extend(moved)
        self._check_side_conditions()

    def _check_side_conditions(self):
        if self.conflict is not None:
            return
        for a, b in self.diseqs:
            if self.find(a) == self.find(b):
                self.conflict = f"disequality violated: {self.terms[a]} != {self.terms[b]}"
                return
        for k, t in self.neg_is:
            c = self.ctor.get(self.find(t))
            if c is not None and self.ops[c] == ("tag", k):
                self.conflict = f"{self.terms[t]} is {k}-tagged"
                return

    def assert_diseq(self, s: Term, t: Term):
        a, b = self.add(s), self.add(t)
        self.diseqs.append((a, b))
        self._check_side_conditions()

    def assert_is(self, k: str, t: Term):
        self.merge(t, TagTm(k, Fn(f"!{k}", (t,))))

    def assert_not_is(self, k: str, t: Term):
        self.neg_is.append((k, self.add(t)))
        self._check_side_conditions()

    # -- queries -----------------------------------------------------------

    def cyclic(self) -> bool:
        """Value constructors may not form a cycle through the classes."""
        edges: dict[int, set[int]] = {}
        for op in self.by_op:
            if op[0] not in ("pair", "tag"):
                continue
            for n in self.by_op[op]:
                edges.setdefault(self.find(n), set()).update(self.find(k) for k in self.kids[n])
        color: dict[int, int] = {}
        for start in edges:
            if color.get(start):
                continue
            stack = [(start, iter(edges.get(start, ())))]
            color[start] = 1
            while stack:
                node, it = stack[-1]
                nxt = next(it, None)
                if nxt is None:
                    color[node] = 2
                    stack.pop()
                    continue
                c = color.get(nxt, 0)
                if c == 1:
                    return True
                if c == 0:
                    color[nxt] = 1
                    stack.append((nxt, iter(edges.get(nxt, ()))))
        return False

    def consistent(self) -> bool:
        if self.conflict is None and self.cyclic():
            self.conflict = "cyclic value"
        return self.conflict is None

    def same(self, s: Term, t: Term) -> bool:
        return self.find(self.add(s)) == self.find(self.add(t))

    def ctor_op(self, t: Term):
        c = self.ctor.get(self.find(self.add(t)))
        return None if c is None else self.ops[c]

    def eq_status(self, s: Term, t: Term) -> bool | None:
        a, b = self.find(self.add(s)), self.find(self.add(t))
        if a == b:
            return True
        ca, cb = self.ctor.get(a), self.ctor.get(b)
        if ca is not None and cb is not None and self.ops[ca] != self.ops[cb]:
            return False
        for x, y in self.diseqs:
            fx, fy = self.find(x), self.find(y)
            if (fx, fy) in ((a, b), (b, a)):
                return False
        return None

    def is_status(self, k: str, t: Term) -> bool | None:
        r = self.find(self.add(t))
        c = self.ctor.get(r)
        if c is not None:
            return self.ops[c] == ("tag", k)
        for k2, x in self.neg_is:
            if k2 == k and self.find(x) == r:
                return False
        return None

    def roots(self) -> list[int]:
        return sorted({self.find(i) for i in range(len(self.terms))})

    def representative(self, root: int) -> Term:
        best = min(self.members[self.find(root)], key=lambda i: (term_size(self.terms[i]), repr(self.terms[i])))
        return self.terms[best]

    def partition(self) -> frozenset[frozenset[Term]]:
        groups: dict[int, set[Term]] = {}
        for i, t in enumerate(self.terms):
            groups.setdefault(self.find(i), set()).add(t)
        return frozenset(frozenset(g) for g in groups.values())


def congruence_close(equalities, disequalities=()):
    """Close ground (dis)equalities.  Returns the closure, or ``None`` when
    the literals are inconsistent with the theory."""
    cc = CongruenceClosure()
    for s, t in equalities:
        cc.merge(s, t)
    for s, t in disequalities:
        cc.assert_diseq(s, t)
    return cc if cc.consistent() else None
