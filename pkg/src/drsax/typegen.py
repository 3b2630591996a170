"""Random closed refined types over a small pool of recursive definitions,
plus transformations that produce super- and subtypes by construction."""

from __future__ import annotations

import random
from dataclasses import dataclass

from .parser import parse_program
from .syntax import (
    And, Arrow, Eq, Is, One, Plus, RType, Signature, TagTm, Tensor, Top, TyName, UnitTm, Var, With,
    whnf,
)

POOL = """
type nat = +{zero : 1, succ : nat}
type bool = +{true : 1, false : 1}
type str = &{head : nat, tail : str}
type tree = +{leaf : 1, node : (l : tree) * tree}
"""


def pool_signature() -> Signature:
    return parse_program(POOL).signature()


@dataclass
class TypeGen:
    sig: Signature
    max_depth: int = 5
    labels: tuple[str, ...] = ("a", "b", "c")

    def __post_init__(self):
        self._n = 0

    def _binder(self) -> str:
        self._n += 1
        return f"v{self._n}"

    def rtype(self, rng: random.Random, depth: int, scope: tuple[str, ...] = ()) -> RType:
        base = self.type_(rng, depth, scope)
        if rng.random() < 0.5:
            return RType(base)
        v = self._binder()
        return RType(base, v, self.pred(rng, base, v, scope))

    def pred(self, rng, base, v, scope):
        b = whnf(self.sig, base)
        opts = [Top()]
        if isinstance(b, Plus):
            k, t = rng.choice(b.branches)
            opts.append(Is(k, Var(v)))
            if isinstance(whnf(self.sig, t), One):
                opts.append(Eq(Var(v), TagTm(k, UnitTm())))
        if isinstance(b, One):
            opts.append(Eq(Var(v), UnitTm()))
        if scope:
            opts.append(Eq(Var(v), Var(rng.choice(scope))))
        return rng.choice(opts)

    def type_(self, rng: random.Random, depth: int, scope: tuple[str, ...] = ()):
        r = rng.random()
        if depth <= 1 or r < 0.3:
            return rng.choice([One(), *(TyName(n) for n in self.sig.types)])
        if r < 0.5:
            ks = rng.sample(self.labels, rng.randint(1, len(self.labels)))
            return Plus(tuple((k, self.type_(rng, depth - 1, scope)) for k in sorted(ks)))
        if r < 0.7:
            ks = rng.sample(self.labels, rng.randint(1, len(self.labels)))
            return With(tuple((k, self.rtype(rng, depth - 1, scope)) for k in sorted(ks)))
        x = self._binder()
        first = self.rtype(rng, depth - 1, scope)
        if r < 0.85:
            return Tensor(x, first, self.type_(rng, depth - 1, scope + (x,)))
        return Arrow(x, first, self.rtype(rng, depth - 1, scope + (x,)))

    # -- ordered transformations -------------------------------------------

    def weaken(self, rng, t, up: bool = True):
        """A supertype of ``t`` (or a subtype when ``up`` is false)."""
        match t:
            case RType(base, v, pred):
                base2 = self.weaken(rng, base, up)
                if up and rng.random() < 0.5:
                    return RType(base2, v, Top())
                if not up and pred == Top() and rng.random() < 0.3:
                    return RType(base2, v, self.pred(rng, base2, v, ()))
                if not up and rng.random() < 0.3:
                    return RType(base2, v, And(pred, pred))
                return RType(base2, v, pred)
            case Plus(brs):
                brs2 = [(k, self.weaken(rng, b, up)) for k, b in brs]
                if up and rng.random() < 0.3:
                    extra = [k for k in ("d", "e") if k not in dict(brs)]
                    if extra:
                        brs2.append((extra[0], One()))
                if not up and len(brs2) > 1 and rng.random() < 0.3:
                    brs2.pop(rng.randrange(len(brs2)))
                return Plus(tuple(brs2))
            case With(brs):
                brs2 = [(k, self.weaken(rng, b, up)) for k, b in brs]
                if up and len(brs2) > 1 and rng.random() < 0.3:
                    brs2.pop(rng.randrange(len(brs2)))
                if not up and rng.random() < 0.3:
                    extra = [k for k in ("d", "e") if k not in dict(brs)]
                    if extra:
                        brs2.append((extra[0], RType(One())))
                return With(tuple(brs2))
            case Tensor(x, first, second):
                return Tensor(x, self.weaken(rng, first, up), self.weaken(rng, second, up))
            case Arrow(x, dom, cod):
                return Arrow(x, self.weaken(rng, dom, not up), self.weaken(rng, cod, up))
            case TyName():
                # equirecursive: a name and its unfolding are interchangeable
                return self.weaken(rng, self.sig.types[t.name], up) if rng.random() < 0.2 else t
        return t
