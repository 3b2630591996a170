from pathlib import Path

import pytest

from drsax.parser import parse_program

ROOT = Path(__file__).resolve().parent.parent
CORPUS = ROOT / "corpus"

NAT = "type nat = +{zero : 1, succ : nat}\n"
BOOL = "type bool = +{true : 1, false : 1}\n"
STR = "type str = &{head : nat, tail : str}\n"


def load(path) -> object:
    return parse_program(Path(path).read_text()).signature()


def sig_of(text: str):
    return parse_program(text).signature()


@pytest.fixture
def basic_sig():
    return sig_of(NAT + BOOL + STR + "fun plus/2\n")
