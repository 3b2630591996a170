import json
import subprocess
import sys

import pytest

from drsax.cli import main

from conftest import CORPUS

POS, NEG = CORPUS / "pos", CORPUS / "neg"


def _run(capsys, *argv):
    code = main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


@pytest.mark.parametrize("path, code", [
    (POS / "add.sax", 0),
    (POS / "left_fair.sax", 0),
    (NEG / "swap_record.sax", 1),
    (NEG / "record_encap_hidden.sax", 2),
    (NEG / "left_unit_hidden.sax", 2),
])
def test_check_exit_codes(capsys, path, code):
    assert _run(capsys, "check", path)[0] == code


def test_check_empty_file(capsys, tmp_path):
    f = tmp_path / "empty.sax"
    f.write_text("")
    assert _run(capsys, "check", f)[0] == 0


def test_check_io_and_parse_errors(capsys, tmp_path):
    assert _run(capsys, "check", tmp_path / "missing.sax")[0] == 3
    f = tmp_path / "bad.sax"
    f.write_text("proc f(x : 1, y : 1) = y <-")
    code, _, err = _run(capsys, "check", f)
    assert code == 3 and "bad.sax:1:" in err


def test_check_diagnostics_on_stderr(capsys):
    code, out, err = _run(capsys, "check", NEG / "swap_record.sax")
    assert "E-REFUTED" in err and "obligation" in err and out == ""


def test_check_explain_and_smt_dump(capsys, tmp_path):
    code, out, _ = _run(capsys, "check", POS / "add.sax", "--explain", "--smt-dump", tmp_path / "smt")
    assert code == 0 and "back edges ['add']" in out
    files = list((tmp_path / "smt").glob("*.smt2"))
    assert files and all(len(f.stem) == 16 for f in files)


def test_budgets_change_outcome(capsys):
    # with no instantiation rounds the plus axioms cannot be used
    assert _run(capsys, "check", POS / "add.sax", "--depth", "0")[0] != 0
    assert _run(capsys, "check", POS / "nonzero_streams.sax", "--fuel-subtype", "0")[0] != 0


def test_run_add(capsys):
    code, out, _ = _run(capsys, "run", POS / "add.sax", "--entry", "add", "--arg", "2", "--arg", "3", "--trace")
    assert code == 0
    assert out.splitlines()[0].startswith("STEP 1 call #")
    assert "OUTCOME Final" in out


def test_run_negation(capsys):
    code, out, _ = _run(capsys, "run", POS / "negation.sax", "--entry", "negate", "--arg", "true.()", "--seed", "3")
    assert code == 0 and "false.#" in out


def test_run_loop_out_of_fuel(capsys):
    code, out, _ = _run(capsys, "run", CORPUS / "extra" / "loop.sax", "--entry", "loop", "--arg", "()", "--fuel", "300")
    assert code == 4 and "OutOfFuel" in out


def test_run_unknown_entry_and_bad_literal(capsys):
    assert _run(capsys, "run", POS / "add.sax", "--entry", "nope")[0] == 3
    assert _run(capsys, "run", POS / "add.sax", "--entry", "add", "--arg", "true.()", "--arg", "1")[0] == 3


def test_run_refuses_ill_typed_unless_unsafe(capsys, tmp_path):
    f = tmp_path / "stuck.sax"
    f.write_text("proc s(y : 1) = z <- { case z { () => y.() } }; case z { () => y.() }\n")
    assert _run(capsys, "run", f, "--entry", "s")[0] in (1, 2)
    code, _, err = _run(capsys, "run", f, "--entry", "s", "--unsafe")
    assert code == 5 and "stuck" in err


def test_exit_codes_deterministic(capsys):
    argv = ["run", POS / "left_unit.sax", "--entry", "lunit_apply", "--seed", "9", "--trace"]
    assert _run(capsys, *argv) == _run(capsys, *argv)


def test_solve(capsys):
    code, out, _ = _run(capsys, "solve", CORPUS / "sequents" / "constructors.seq")
    assert code == 1  # the file contains one refutable query
    lines = out.splitlines()
    assert sum(l.split()[2] == "valid" for l in lines) == 5
    assert any(" unknown " in l for l in lines)


def test_solve_parse_error(capsys, tmp_path):
    f = tmp_path / "q.seq"
    f.write_text("query x == |- x\n")
    assert _run(capsys, "solve", f)[0] == 3


def test_fuzz(capsys, tmp_path):
    report = tmp_path / "r.json"
    code, out, _ = _run(capsys, "fuzz", CORPUS, "--seeds", "2", "--sample-preservation", "3", "--report", report)
    assert code == 0 and "result: ok" in out
    doc = json.loads(report.read_text())
    assert doc["config"]["sample_every"] == 3 and doc["counts"]["runs"] == len(doc["records"])


def test_module_entry_point(tmp_path):
    r = subprocess.run([sys.executable, "-m", "drsax", "check", str(POS / "eat.sax")], capture_output=True, text=True)
    assert r.returncode == 0 and "accepted" in r.stdout
