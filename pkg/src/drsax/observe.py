"""Observable satisfaction: postconditions of purely positive addresses hold
of the closed values a final configuration stores there."""

from __future__ import annotations

from .prover import ProverConfig, Status, Verdict, entails
from .runtime import Configuration, closed_term
from .syntax import (
    Eq, PairTm, Signature, TagTm, TagV, TypingContext, UnitV, addr_term, free_names, purely_positive,
)


class ObservationError(Exception):
    """A purely positive address has no value cell."""


def positive_subcontext(sig: Signature, delta: TypingContext) -> TypingContext:
    """The largest purely positive sub-context that is closed under the
    addresses its predicates mention."""
    out = TypingContext()
    for b in delta.entries:
        if b.type is None or not purely_positive(b.type, sig):
            continue
        if free_names(b.type) <= set(out.addrs()):
            out = out.extend(b.addr, b.type, b.mode)
    return out


def observably_satisfies(conf: Configuration, gamma: TypingContext, axioms=(),
                         config: ProverConfig | None = None) -> Verdict:
    """Walks ``gamma`` left to right; each predicate must follow from the
    earlier predicates plus the closed values of earlier addresses."""
    cells = conf.cells()
    if config is None:
        config = _budget(cells, gamma)
    hyps: list = []
    for b in gamma.entries:
        if b.addr not in cells:
            raise ObservationError(f"no cell at {b.addr}")
        v = closed_term(cells, b.addr)
        if v is None:
            raise ObservationError(f"cell {b.addr} does not hold a closed value")
        goal = b.type.at(v)
        verdict = entails(tuple(hyps), goal, axioms, config)
        if not verdict.valid:
            return Verdict(verdict.status, f"{b.addr}: {verdict.reason}", verdict.model)
        hyps.append(b.type.at(addr_term(b.addr)))
        hyps.append(Eq(addr_term(b.addr), v))
    return Verdict(Status.VALID)


def _depth(t) -> int:
    match t:
        case PairTm(a, b):
            return 1 + max(_depth(a), _depth(b))
        case TagTm(_, a):
            return 1 + _depth(a)
    return 0


def _budget(cells, gamma) -> ProverConfig:
    """Closed values can be deep; unfolding a recursive axiom along one takes
    a round per constructor, so the round budget follows the deepest value."""
    base = ProverConfig()
    deepest = max((_depth(closed_term(cells, b.addr)) for b in gamma.entries if b.addr in cells
                   and closed_term(cells, b.addr) is not None), default=0)
    rounds = max(base.rounds, deepest + 2)
    return ProverConfig(rounds=rounds, max_steps=base.max_steps * 4, max_instances=max(base.max_instances, 40 * rounds))


def unary_value(conf: Configuration, addr: str) -> int | None:
    """The number a unary-encoded cell graph denotes, read straight off the
    cells (an oracle independent of the prover and of ``closed_term``)."""
    cells = conf.cells()
    n, seen = 0, set()
    while addr not in seen:
        seen.add(addr)
        v = cells.get(addr)
        if not isinstance(v, TagV):
            return None
        if v.label == "zero":
            return n if isinstance(cells.get(v.arg), UnitV) else None
        if v.label != "succ":
            return None
        n, addr = n + 1, v.arg
    return None
