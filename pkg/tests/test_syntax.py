import pytest

from drsax.parser import parse_assertion, parse_type
from drsax.syntax import (
    Arrow, Eq, Forall, One, PairTm, Plus, Polarity, ResolutionError, TyName, Top, TypingContext, Var, With,
    WellFormednessError, alpha_equal, alpha_normalize, erase, free_addrs, free_names, polarity,
    purely_positive, subst_assertion, unfold,
)
from drsax.parser import parse_process

from conftest import sig_of, NAT, BOOL, STR


def test_unfold_nat_and_str(basic_sig):
    assert unfold(basic_sig, TyName("nat")) == Plus((("zero", One()), ("succ", TyName("nat"))))
    s = unfold(basic_sig, TyName("str"))
    assert isinstance(s, With) and s.labels() == ["head", "tail"]


def test_unfold_undefined(basic_sig):
    with pytest.raises(ResolutionError):
        unfold(basic_sig, TyName("nope"))


def test_subst_direct_replacement(basic_sig):
    a = parse_assertion("z == plus(x, y)", _prog("fun plus/2"), ["x", "y", "z"])
    out = subst_assertion(a, "z", PairTm(Var("a"), Var("b")))
    assert out == Eq(PairTm(Var("a"), Var("b")), a.rhs)


def test_subst_avoids_capture():
    a = Forall("x", Eq(Var("x"), Var("v")))
    out = subst_assertion(a, "v", Var("x"))
    assert isinstance(out, Forall) and out.var != "x"
    assert out.body == Eq(Var(out.var), Var("x"))


def test_subst_no_occurrence():
    assert subst_assertion(Top(), "v", Var("m")) == Top()


def test_alpha_normalize():
    sig = NAT
    a = parse_type("(x : nat) -> nat | y. y == x", _prog(sig))
    b = parse_type("(a : nat) -> nat | b. b == a", _prog(sig))
    assert alpha_normalize(a) == alpha_normalize(b)
    n = parse_type("nat", _prog(sig))
    assert alpha_normalize(n).base == n.base == TyName("nat")
    r1 = parse_type("&{l : nat | u. is zero(u), m : 1}", _prog(sig))
    r2 = parse_type("&{l : nat | w. is zero(w), m : 1}", _prog(sig))
    assert alpha_equal(r1, r2)
    assert not alpha_equal(a, parse_type("(a : nat) -> nat | b. b == b", _prog(sig)))


def _prog(text):
    from drsax.parser import parse_program
    return parse_program(text)


def test_polarity():
    assert polarity(One()) is Polarity.POSITIVE
    assert polarity(Plus((("a", One()),))) is Polarity.POSITIVE
    assert polarity(Arrow("x", parse_type("1"), parse_type("1"))) is Polarity.NEGATIVE


def test_purely_positive(basic_sig):
    p = _prog(NAT + BOOL + STR)
    assert purely_positive(parse_type("nat", p), basic_sig)
    assert not purely_positive(parse_type("str", p), basic_sig)
    assert purely_positive(parse_type("(x : nat) * bool", p), basic_sig)
    assert not purely_positive(parse_type("(x : nat) * str", p), basic_sig)


def test_context_rejects_duplicates():
    ctx = TypingContext().extend("x", parse_type("1"))
    with pytest.raises(WellFormednessError):
        ctx.extend("x", parse_type("1"))


def test_context_hypotheses():
    p = _prog(NAT)
    ctx = TypingContext().extend("x", parse_type("nat | v. is zero(v)", p)).extend("y", parse_type("nat", p))
    hyps = ctx.hypotheses()
    assert len(hyps) == 1 and free_names(hyps[0]) == {"x"}


def test_erase_drops_annotations():
    p = parse_process("u : 1 <- { u.() }; (y : 1) @ y <- u", None, ["y"])
    e = erase(p)
    assert e.ann is None and free_addrs(e) == {"y"}
    assert "@" not in repr(type(e.right).__name__)
