import random

import pytest
from hypothesis import given, settings, strategies as st

from drsax.parser import parse_program, parse_type
from drsax.prover import Status
from drsax.subtyping import subtype, subtype_context
from drsax.syntax import TypingContext, whnf
from drsax.typegen import POOL, TypeGen, pool_signature

from conftest import CORPUS

PROG = parse_program(POOL)
SIG = pool_signature()


def T(text, scope=()):
    return parse_type(text, PROG, scope)


@pytest.mark.parametrize("lhs, rhs", [
    ("nat", "nat"),
    ("+{true : 1}", "bool"),
    ("&{head : nat, tail : str}", "&{head : nat}"),
    ("str", "&{head : nat}"),
    ("nat | x. is succ(x)", "nat"),
    ("(x : nat | v. is succ(v)) * bool", "(y : nat) * bool"),
    ("(x : nat) -> nat | v. is succ(v)", "(y : nat | v. is zero(v)) -> nat"),
])
def test_valid(lhs, rhs):
    assert subtype(SIG, T(lhs), T(rhs)).valid


@pytest.mark.parametrize("lhs, rhs", [
    ("nat", "nat | x. is succ(x)"),
    ("nat", "bool"),
    ("bool", "+{true : 1}"),
    ("&{head : nat}", "str"),
    ("(x : nat | v. is succ(v)) -> nat", "(y : nat) -> nat"),
])
def test_not_valid(lhs, rhs):
    assert not subtype(SIG, T(lhs), T(rhs)).valid


def test_refuted_vs_unknown():
    assert subtype(SIG, T("nat"), T("bool")).status is Status.REFUTED
    assert subtype(SIG, T("nat"), T("nat | x. is succ(x)")).status is not Status.VALID


def test_nonzero_streams():
    sig = parse_program((CORPUS / "pos" / "nonzero_streams.sax").read_text()).signature()
    prog = parse_program((CORPUS / "pos" / "nonzero_streams.sax").read_text())
    sstr, str_ = parse_type("sstr", prog), parse_type("str", prog)
    assert subtype(sig, sstr, str_).valid
    assert not subtype(sig, str_, sstr).valid


def test_context_subtyping():
    g = TypingContext().extend("a", T("nat"))
    assert subtype_context(SIG, g, g).valid
    assert subtype_context(SIG, TypingContext().extend("a", T("nat | v. is succ(v)")), g).valid
    assert not subtype_context(SIG, g, TypingContext().extend("a", T("bool"))).valid
    assert not subtype_context(SIG, TypingContext(), g).valid


def test_context_uses_earlier_entries():
    delta = TypingContext().extend("a", T("nat | v. is succ(v)")).extend("b", T("nat | v. v == a", ["a"]))
    gamma = TypingContext().extend("a", T("nat")).extend("b", T("nat | v. is succ(v)"))
    assert subtype_context(SIG, delta, gamma).valid


# -- properties over random types ------------------------------------------------


def _gen():
    return TypeGen(SIG)


@settings(max_examples=500, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_reflexivity(seed):
    rng = random.Random(seed)
    a = _gen().rtype(rng, 5)
    assert subtype(SIG, a, a).valid


def _chain(seed):
    rng = random.Random(seed)
    g = _gen()
    a = g.rtype(rng, 5)
    up = rng.random() < 0.5
    b = g.weaken(rng, a, up)
    c = g.weaken(rng, b, up)
    return (a, b, c) if up else (c, b, a)


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_transitivity(seed):
    a, b, c = _chain(seed)
    ab, bc = subtype(SIG, a, b), subtype(SIG, b, c)
    assert ab.valid and bc.valid  # the chain is a subtype chain by construction
    assert subtype(SIG, a, c).valid


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_head_constructors_agree(seed):
    a, b, _ = _chain(seed)
    if subtype(SIG, a, b).valid:
        assert type(whnf(SIG, a.base)) is type(whnf(SIG, b.base))


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_more_fuel_keeps_valid(seed):
    a, b, _ = _chain(seed)
    if subtype(SIG, a, b, fuel=8).valid:
        assert subtype(SIG, a, b, fuel=64).valid


def test_fuel_exhaustion_is_unknown():
    v = subtype(SIG, T("nat"), T("nat"), fuel=0)
    assert v.status is Status.UNKNOWN
