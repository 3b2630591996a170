import random
import re

import pytest

from drsax.checker import TypeCheckError, elaborate
from drsax.configtyping import type_configuration
from drsax.parser import parse_program, parse_type
from drsax.pretty import pretty
from drsax.runtime import (
    CellObj, Configuration, Final, LiteralError, OutOfFuel, RoundRobin, SeededRandom, Stuck, apply,
    closed_term, enabled, execute, initial, nat_value, parse_literal, render_cells, render_trace, run, step,
)
from drsax.syntax import Signature, TypingContext, UnitV, Write

from conftest import CORPUS


def _sig(name, sub="pos"):
    return elaborate(parse_program((CORPUS / sub / name).read_text()).signature())


ADD = _sig("add.sax")
NEG = _sig("negation.sax")
EAT = _sig("eat.sax")


def _dest(conf):
    return next(iter(conf.procs()))


def _result(sig, entry, args, sched=None):
    conf = initial(sig, entry, args)
    d = _dest(conf)
    out, trace = execute(sig, conf, sched or RoundRobin())
    assert isinstance(out, Final)
    return closed_term(out.conf.cells(), d), out, trace


def test_negation():
    v, _, _ = _result(NEG, "negate", ["true.()"])
    assert pretty(v) == "false.()"
    v, _, _ = _result(NEG, "negate", ["false.()"])
    assert pretty(v) == "true.()"


def test_eat_zero():
    v, out, _ = _result(EAT, "eat", ["0"])
    assert pretty(v) == "()"


def _unary(cells, a):
    """Count succ tags along the cell graph, independently of closed_term."""
    n = 0
    while True:
        v = cells[a]
        if v.label == "zero":
            assert isinstance(cells[v.arg], UnitV)
            return n
        assert v.label == "succ"
        n, a = n + 1, v.arg


@pytest.mark.parametrize("x, y", [(2, 3), (0, 0), (0, 4), (5, 0), (4, 7)])
def test_add(x, y):
    conf = initial(ADD, "add", [str(x), str(y)])
    d = _dest(conf)
    out, _ = execute(ADD, conf, SeededRandom(x * 31 + y))
    assert _unary(out.conf.cells(), d) == x + y


def test_loop_runs_out_of_fuel():
    sig = _sig("loop.sax", "extra")
    out, trace = run(sig, "loop", ["()"], fuel=500)
    assert isinstance(out, OutOfFuel) and len(trace) == 500


def test_stuck_is_reported():
    sig = Signature()
    conf = Configuration()
    a = conf.fresh()
    conf.spawn(a, Write("#missing", UnitV()))
    out = step(sig, conf, RoundRobin())
    assert isinstance(out, Stuck) and out.blocked == [a]


def test_final_exactly_when_no_processes():
    conf = initial(ADD, "add", ["1", "1"])
    sched = SeededRandom(3)
    while True:
        res = step(ADD, conf, sched)
        if isinstance(res, Final):
            assert not res.conf.procs()
            break
        assert conf.procs()
        _, conf = res


@pytest.mark.parametrize("seed", range(20))
def test_write_once_and_persistence(seed):
    sig = _sig("left_unit.sax")
    conf = initial(sig, "lunit_apply", [])
    sched = SeededRandom(seed)
    cells: dict = {}
    while True:
        res = step(sig, conf, sched)
        if not isinstance(res, tuple):
            break
        _, conf = res
        assert not conf.violations
        now = conf.cells()
        for a, v in cells.items():
            assert now.get(a) == v
        cells = dict(now)


def test_schedule_independence():
    seen = set()
    for seed in range(25):
        v, _, _ = _result(ADD, "add", ["3", "2"], SeededRandom(seed))
        seen.add(pretty(v))
    assert seen == {"succ.succ.succ.succ.succ.zero.()"}


def test_literals():
    assert pretty(parse_literal("2")) == "succ.succ.zero.()"
    assert pretty(parse_literal("(3, true.())")) == "(succ.succ.succ.zero.(), true.())"
    assert pretty(parse_literal("()")) == "()"
    for bad in ["(", "2 3", "true", "(1,)"]:
        with pytest.raises(LiteralError):
            parse_literal(bad)


def test_literal_must_fit_type():
    with pytest.raises(LiteralError):
        initial(ADD, "add", ["true.()", "1"])
    with pytest.raises(LiteralError):
        initial(ADD, "add", ["1"])
    with pytest.raises(KeyError):
        initial(ADD, "nope", [])


def test_nat_value():
    assert nat_value(parse_literal("7")) == 7
    assert nat_value(parse_literal("true.()")) is None


def test_trace_format():
    out, trace = run(NEG, "negate", ["true.()"])
    lines = render_trace(trace)
    assert all(re.fullmatch(r"STEP \d+ [a-z]+( #\d+)+", l) for l in lines)
    cells = render_cells(out.conf, trace)
    assert all(l.startswith("cell #") for l in cells)
    nums = [int(l.split()[1][1:]) for l in cells]
    assert nums == sorted(nums)


def test_traces_equal_modulo_allocation():
    a = render_trace(run(ADD, "add", ["2", "1"], SeededRandom(5))[1])
    b = render_trace(run(ADD, "add", ["2", "1"], SeededRandom(5))[1])
    assert a == b


def test_enabled_and_apply():
    conf = initial(NEG, "negate", ["true.()"])
    (r,) = enabled(conf)
    assert r.rule == "call"
    c2 = apply(NEG, conf, r)
    assert c2 is not conf and conf.objects[r.addrs[0]] != c2.objects[r.addrs[0]]


# -- configuration typing ------------------------------------------------------


def test_empty_configuration():
    g = TypingContext().extend("a", parse_type("1"))
    assert type_configuration(Signature(), g, Configuration()) == g


def test_unit_cell():
    conf = Configuration()
    a = conf.fresh()
    conf.put_cell(a, UnitV())
    conf.types[a] = parse_type("1")
    delta = type_configuration(Signature(), TypingContext(), conf)
    assert delta.addrs() == [a]


def test_ill_typed_cell_rejected():
    prog = parse_program("type bool = +{true : 1, false : 1}")
    conf = Configuration()
    a = conf.fresh()
    conf.put_cell(a, UnitV())
    conf.types[a] = parse_type("bool", prog)
    with pytest.raises(TypeCheckError):
        type_configuration(prog.signature(), TypingContext(), conf)


def test_preservation_every_step():
    for sig, entry, args in [(ADD, "add", ["2", "2"]), (NEG, "negate", ["false.()"]), (EAT, "eat", ["2"])]:
        conf = initial(sig, entry, args)
        delta = type_configuration(sig, TypingContext(), conf)
        sched = SeededRandom(11)
        while True:
            res = step(sig, conf, sched)
            if not isinstance(res, tuple):
                break
            _, conf = res
            new = type_configuration(sig, TypingContext(), conf)
            assert set(delta.addrs()) <= set(new.addrs())
            delta = new
