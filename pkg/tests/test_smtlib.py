"""SMT-LIB export, checked with z3 when it is installed."""

import random

import pytest

from drsax.modelcheck import SequentGen
from drsax.parser import parse_assertion, parse_program
from drsax.prover import Status, entails
from drsax.smtlib import export_smtlib, query_hash, run_z3
from drsax.syntax import Top

from conftest import CORPUS

ADD = parse_program((CORPUS / "pos" / "add.sax").read_text())
AXIOMS = ADD.signature().axioms


def A(text, scope=("x", "y", "z", "a", "u", "x'", "f")):
    return parse_assertion(text, ADD, scope)


def test_script_shape():
    s = export_smtlib([A("x == succ.y")], A("is succ(x)"))
    assert "(declare-datatypes" in s and "(check-sat)" in s
    assert "(assert (not" in s


z3 = pytest.importorskip("z3", reason="z3-solver not installed")


def _z3_status(script):
    s = z3.Solver()
    s.set("timeout", 5000)
    s.from_string(script)
    return str(s.check())


def test_smt_injectivity_unsat():
    assert _z3_status(export_smtlib([A("true.x == true.y")], A("x == y"))) == "unsat"


def test_smt_top_unsat():
    assert _z3_status(export_smtlib([], Top())) == "unsat"


def test_smt_unknown_class_sat():
    assert _z3_status(export_smtlib([], A("is zero(plus(a, a))"))) in ("sat", "unknown")


def test_smt_axioms():
    script = export_smtlib([], A("plus(succ.zero.u, y) == succ.y"), AXIOMS)
    assert _z3_status(script) == "unsat"


def test_query_hash_stable():
    s = export_smtlib([A("x == y")], A("y == x"))
    assert query_hash(s) == query_hash(export_smtlib([A("x == y")], A("y == x")))
    assert len(query_hash(s)) == 16


def test_run_z3_helper():
    assert run_z3(export_smtlib([], Top()), 2000) == "unsat"


def test_cross_validation_with_z3():
    rng = random.Random(0)
    disagreements = []
    for i in range(1000):
        hyps, goal = SequentGen().sequent(rng)
        v = entails(hyps, goal)
        if v.status is Status.UNKNOWN:
            continue
        r = _z3_status(export_smtlib(hyps, goal))
        if (v.valid and r != "unsat") or (v.status is Status.REFUTED and r != "sat"):
            disagreements.append((i, v.status.value, r))
    assert disagreements == []
