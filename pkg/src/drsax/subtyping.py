"""Refined subtyping with equirecursive names, searched as circular derivations."""

from __future__ import annotations

from dataclasses import dataclass

from .pretty import pretty
from .prover import ProverConfig, Status, Verdict, entails
from .syntax import (
    Arrow, One, Plus, RType, Signature, Tensor, TyName, TypingContext, Var, With,
    WellFormednessError, addr_term, alpha_normalize, free_names, fresh, subst, unfold,
)

VALID = Verdict(Status.VALID)


def _fail(reason: str) -> Verdict:
    return Verdict(Status.REFUTED, reason)


def _both(a: Verdict, b) -> Verdict:
    """Sequential conjunction; ``b`` is a thunk, skipped after a refutation."""
    if a.status is Status.REFUTED:
        return a
    vb = b()
    if vb.status is Status.REFUTED or a.valid:
        return vb
    return a


@dataclass
class Subtyper:
    sig: Signature
    fuel: int = 64
    prover: ProverConfig = ProverConfig()

    # -- entry points ------------------------------------------------------

    def refined(self, hyps, lhs: RType, rhs: RType, subject=None, visited=frozenset(), fuel=None) -> Verdict:
        """``Γ ⊢ lhs ≤ rhs``; the predicates are compared at ``subject``
        (a fresh variable when omitted)."""
        fuel = self.fuel if fuel is None else fuel
        hyps = tuple(hyps)
        if subject is None:
            avoid = set().union(*(free_names(h) for h in hyps), free_names(lhs), free_names(rhs))
            subject = Var(fresh("v", avoid | {"v"}))
        return _both(
            self.base(hyps, lhs.base, rhs.base, visited, fuel),
            lambda: self._pred(hyps, lhs, rhs, subject),
        )

    def base(self, hyps, a, b, visited=frozenset(), fuel=None) -> Verdict:
        fuel = self.fuel if fuel is None else fuel
        return self._base(tuple(hyps), a, b, visited, fuel)

    # -- rules -------------------------------------------------------------

    def _pred(self, hyps, lhs: RType, rhs: RType, subject) -> Verdict:
        goal = rhs.at(subject)
        v = entails((*hyps, lhs.at(subject)), goal, self.sig.axioms, self.prover)
        if v.valid:
            return v
        return Verdict(v.status, f"cannot show {pretty(goal)} from {pretty(lhs.at(subject))}: {v.reason}", v.model)

    def _base(self, hyps, a, b, visited, fuel) -> Verdict:
        if isinstance(a, TyName) or isinstance(b, TyName):
            key = (alpha_normalize(a), alpha_normalize(b))
            if key in visited:
                return VALID
            if fuel <= 0:
                return Verdict(Status.UNKNOWN, "subtyping fuel exhausted")
            visited = visited | {key}
            try:
                if isinstance(a, TyName):
                    a = unfold(self.sig, a)
                else:
                    b = unfold(self.sig, b)
            except Exception as e:
                raise WellFormednessError(str(e)) from e
            return self._base(hyps, a, b, visited, fuel - 1)
        match a, b:
            case One(), One():
                return VALID
            case Plus(), Plus():
                missing = set(a.labels()) - set(b.labels())
                if missing:
                    return _fail(f"labels {sorted(missing)} are not allowed by {b}")
                out = VALID
                for k, t in a.branches:
                    out = _both(out, lambda t=t, k=k: self._base(hyps, t, b.get(k), visited, fuel))
                return out
            case With(), With():
                missing = set(b.labels()) - set(a.labels())
                if missing:
                    return _fail(f"labels {sorted(missing)} are not offered")
                out = VALID
                for k, t in b.branches:
                    out = _both(out, lambda t=t, k=k: self.refined(hyps, a.get(k), t, None, visited, fuel))
                return out
            case Tensor(x, a1, a2), Tensor(y, b1, b2):
                z = self._fresh_for(hyps, a, b, x)
                a2, b2 = subst(a2, {x: Var(z)}), subst(b2, {y: Var(z)})
                first = self.refined(hyps, a1, b1, Var(z), visited, fuel)
                return _both(first, lambda: self._base((*hyps, a1.at(Var(z))), a2, b2, visited, fuel))
            case Arrow(x, d1, c1), Arrow(y, d2, c2):
                z = self._fresh_for(hyps, a, b, x)
                c1, c2 = subst(c1, {x: Var(z)}), subst(c2, {y: Var(z)})
                dom = self.refined(hyps, d2, d1, Var(z), visited, fuel)
                return _both(dom, lambda: self.refined((*hyps, d2.at(Var(z))), c1, c2, None, visited, fuel))
        return _fail(f"{type(a).__name__} is not a subtype of {type(b).__name__}")

    def _fresh_for(self, hyps, a, b, base) -> str:
        avoid = set().union(*(free_names(h) for h in hyps), free_names(a), free_names(b))
        return fresh(base, avoid | {base})


def subtype(sig: Signature, lhs, rhs, hyps=(), fuel: int = 64, prover: ProverConfig | None = None) -> Verdict:
    st = Subtyper(sig, fuel, prover or ProverConfig())
    if isinstance(lhs, RType) or isinstance(rhs, RType):
        lhs = lhs if isinstance(lhs, RType) else RType(lhs)
        rhs = rhs if isinstance(rhs, RType) else RType(rhs)
        return st.refined(hyps, lhs, rhs)
    return st.base(hyps, lhs, rhs)


def subtype_context(sig: Signature, delta: TypingContext, gamma: TypingContext,
                    fuel: int = 64, prover: ProverConfig | None = None) -> Verdict:
    """Δ ≤ Γ, reading both as iterated dependent pairs in Δ's order."""
    st = Subtyper(sig, fuel, prover or ProverConfig())
    hyps: list = []
    for b in delta.entries:
        want = gamma.lookup(b.addr)
        if want is not None:
            v = st.refined(hyps, b.type, want.type, addr_term(b.addr))
            if not v.valid:
                return Verdict(v.status, f"at {b.addr}: {v.reason}", v.model)
        hyps.append(b.type.at(addr_term(b.addr)))
    missing = [a for a in gamma.addrs() if a not in delta]
    if missing:
        return _fail(f"addresses {missing} are not bound")
    return VALID
