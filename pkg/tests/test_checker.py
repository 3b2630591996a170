from pathlib import Path

import pytest

from drsax.checker import (
    ModedJudgment, TypeCheckError, check_definition, check_process, definition_context, elaborate,
)
from drsax.parser import parse_process, parse_program, parse_type
from drsax.pretty import pretty
from drsax.prover import Status
from drsax.syntax import Bot, ProcDef, RType, Signature, TypingContext, erase

from conftest import CORPUS

POS = sorted((CORPUS / "pos").glob("*.sax"))
NEG = sorted((CORPUS / "neg").glob("*.sax"))


def _sig(path):
    return parse_program(Path(path).read_text()).signature()


def _defs(paths):
    return [(p, n) for p in paths for n in _sig(p).procs]


@pytest.mark.parametrize("path, name", _defs(POS), ids=lambda x: x.name if isinstance(x, Path) else x)
def test_accept(path, name):
    check_definition(_sig(path), name)


# each rejected judgment, with the rule whose obligation fails and the
# hidden refinement that obligation must mention
REJECT = {
    "record_encap_hidden.sax": ("encap", "&R", "is true", Status.UNKNOWN),
    "swap_record.sax": ("swap", "<=R", "p:snd", Status.REFUTED),
    "left_unit_hidden.sax": ("lunit", "->R", "plus", Status.UNKNOWN),
}


@pytest.mark.parametrize("path", NEG, ids=lambda p: p.name)
def test_reject(path):
    name, rule, mention, status = REJECT[path.name]
    with pytest.raises(TypeCheckError) as ei:
        check_definition(_sig(path), name)
    e = ei.value
    assert e.rule == rule
    assert e.obligation is not None and e.verdict.status is status
    assert mention in e.obligation.render()
    assert e.code == ("E-UNKNOWN" if status is Status.UNKNOWN else "E-REFUTED")


def test_reject_set_is_complete():
    assert sorted(p.name for p in NEG) == sorted(REJECT)


def test_other_definitions_in_negative_files_still_accepted():
    sig = _sig(CORPUS / "neg" / "left_unit_hidden.sax")
    check_definition(sig, "add")


def test_eat_back_edge():
    d = check_definition(_sig(CORPUS / "pos" / "eat.sax"), "eat")
    assert d.back_edges() == ["eat"]


def test_back_edges_target_declared_signatures():
    for path in POS:
        sig = _sig(path)
        for name in sig.procs:
            d = check_definition(sig, name)
            assert set(d.back_edges()) <= set(sig.procs)


def test_add_uses_path_equation():
    d = check_definition(_sig(CORPUS / "pos" / "add.sax"), "add")
    rendered = [o.render() for n in d.walk() for o in n.obligations]
    assert any("x == succ.x'" in r for r in rendered)


def test_proj_is_mixed_induction():
    d = check_definition(_sig(CORPUS / "pos" / "left_fair.sax"), "proj")
    assert d.back_edges().count("proj") == 2


def test_copy_at_unit():
    sig = Signature()
    d = check_process(sig, [("x", parse_type("1"))], parse_process("y <- x", None, ["x", "y"]),
                      ModedJudgment("y", parse_type("1")))
    assert d.rule.startswith("id")


def test_unknown_address():
    sig = Signature()
    with pytest.raises(TypeCheckError):
        check_process(sig, [], parse_process("y <- x", None, ["x", "y"]), ModedJudgment("y", parse_type("1")))


def test_bottom_postcondition_rejected():
    """Strengthening any accepted postcondition to ff must cause rejection."""
    for path in POS:
        sig = _sig(path)
        for name, pd in sig.procs.items():
            y, t = pd.dest
            bad = ProcDef(pd.name, pd.params, (y, RType(t.base, t.binder, Bot())), pd.body, span=pd.span)
            procs = dict(sig.procs)
            procs[name] = bad
            with pytest.raises(TypeCheckError):
                check_definition(sig.with_procs(procs), name)


def test_elaboration_only_adds_annotations():
    for path in POS:
        sig = _sig(path)
        el = elaborate(sig)
        for name, pd in sig.procs.items():
            body = el.procs[name].body
            assert pretty(erase(body)) == pretty(erase(pd.body))
            # the fully annotated body checks again
            y, t = pd.dest
            check_process(el, definition_context(pd), body, ModedJudgment(y, t))


def test_erased_bodies_recheck_after_reannotation():
    for path in POS:
        sig = _sig(path)
        el = elaborate(sig)
        erased = sig.with_procs({n: erase(pd) for n, pd in sig.procs.items()})
        reannotated = erased.with_procs(el.procs)
        for name in sig.procs:
            check_definition(reannotated, name)


def test_erase_anno():
    p = parse_process("(y : 1) @ y <- x", None, ["x", "y"])
    assert erase(p) == erase(p.body)
    c = parse_process("y <- x", None, ["x", "y"])
    assert erase(c) == c


def test_type_error_renders_obligation():
    with pytest.raises(TypeCheckError) as ei:
        check_definition(_sig(CORPUS / "neg" / "swap_record.sax"), "swap")
    text = str(ei.value)
    assert "obligation:" in text and "verdict: refuted" in text
