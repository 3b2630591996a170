"""Constructor theory over congruence closure: injectivity, disjointness,
acyclicity, congruence, and order-insensitivity."""

import itertools
import random

import pytest

from drsax.cc import CongruenceClosure, congruence_close
from drsax.syntax import Addr, App, Fn, PairTm, Proj, TagTm, UnitTm, Var

a, b, c, d, x, y, f = (Var(n) for n in "abcdxyf")
U = UnitTm()


def tag(k, t):
    return TagTm(k, t)


def test_tag_injectivity():
    cc = congruence_close([(tag("true", x), tag("true", y))])
    assert cc is not None and cc.same(x, y)


def test_pair_injectivity():
    cc = congruence_close([(PairTm(a, b), PairTm(c, d))])
    assert cc.same(a, c) and cc.same(b, d) and not cc.same(a, b)


def test_injectivity_through_classes():
    cc = congruence_close([(x, PairTm(a, b)), (y, PairTm(c, d)), (x, y)])
    assert cc.same(a, c) and cc.same(b, d)


def test_injectivity_conflict():
    assert congruence_close([(tag("k", a), tag("k", b))], [(a, b)]) is None


@pytest.mark.parametrize("s, t", [
    (PairTm(a, b), tag("k", c)),
    (tag("true", a), tag("false", b)),
    (U, PairTm(a, b)),
    (U, tag("k", a)),
])
def test_disjointness(s, t):
    assert congruence_close([(s, t)]) is None


def test_disjointness_via_classes():
    assert congruence_close([(x, tag("zero", U)), (y, tag("succ", a)), (x, y)]) is None


@pytest.mark.parametrize("eqs", [
    [(x, tag("succ", x))],
    [(x, PairTm(x, a))],
    [(x, PairTm(a, y)), (y, tag("k", x))],
    [(x, tag("s", tag("s", y))), (y, tag("s", x))],
])
def test_acyclicity(eqs):
    assert congruence_close(eqs) is None


def test_acyclicity_ignores_app_and_projection():
    assert congruence_close([(x, App(f, x))]) is not None
    assert congruence_close([(x, Proj(x, "l"))]) is not None
    assert congruence_close([(x, Fn("g", (x,)))]) is not None


def test_congruence():
    cc = congruence_close([(a, b)])
    cc.add(Fn("g", (a,)))
    cc.add(Fn("g", (b,)))
    assert cc.same(Fn("g", (a,)), Fn("g", (b,)))
    cc = congruence_close([(a, b), (Fn("g", (a,)), c)])
    assert cc.same(Fn("g", (b,)), c)
    cc = congruence_close([(f, y), (App(f, a), c)])
    assert cc.same(App(y, a), c)


def test_addresses_not_assumed_distinct():
    assert congruence_close([(Addr("#0"), Addr("#1"))]) is not None


def test_disequality():
    assert congruence_close([(a, b)], [(a, b)]) is None
    assert congruence_close([], [(a, b)]) is not None
    assert congruence_close([(a, b), (Fn("g", (a,)), c)], [(Fn("g", (b,)), c)]) is None


def test_is_literals():
    cc = CongruenceClosure()
    cc.assert_is("true", x)
    cc.assert_is("false", x)
    assert not cc.consistent()
    cc = CongruenceClosure()
    cc.merge(x, tag("true", a))
    assert cc.is_status("true", x) is True
    assert cc.is_status("false", x) is False
    assert cc.is_status("true", y) is None


def test_clone_is_independent():
    cc = congruence_close([(a, b)])
    k = cc.clone()
    k.merge(b, c)
    assert k.same(a, c) and not cc.same(a, c)


def _random_eqs(rng, n):
    atoms = [a, b, c, d, x, y]

    def term(depth):
        r = rng.random()
        if depth == 0 or r < 0.4:
            return rng.choice(atoms)
        if r < 0.6:
            return Fn("g", (term(depth - 1),))
        if r < 0.8:
            return tag(rng.choice(["l", "r"]), term(depth - 1))
        return PairTm(term(depth - 1), term(depth - 1))

    return [(term(2), term(2)) for _ in range(n)]


@pytest.mark.parametrize("seed", range(30))
def test_order_insensitive(seed):
    rng = random.Random(seed)
    eqs = _random_eqs(rng, 4)
    results = set()
    for perm in itertools.islice(itertools.permutations(eqs), 12):
        flipped = [(t, s) if rng.random() < 0.5 else (s, t) for s, t in perm]
        cc = congruence_close(flipped)
        if cc is None:
            results.add(None)
        else:
            for s, t in eqs:  # register all terms so partitions are comparable
                cc.add(s), cc.add(t)
            results.add(cc.partition())
    assert len(results) == 1
