"""Dependently refined futures: syntax, assertion prover, subtyping,
bidirectional process typing, a rewriting runtime and a soundness harness."""

from .checker import (
    CheckerConfig, Derivation, ModedJudgment, Obligation, TypeCheckError, check_definition,
    check_process, elaborate,
)
from .configtyping import type_configuration
from .harness import FuzzConfig, HarnessReport, RunSpec, soundness_fuzz
from .observe import observably_satisfies, positive_subcontext
from .parser import ParseError, parse_assertion, parse_process, parse_program, parse_term, parse_type
from .pretty import pretty
from .prover import ProverConfig, Status, Verdict, entails
from .runtime import Final, OutOfFuel, RoundRobin, SeededRandom, Stuck, execute, initial, run
from .smtlib import export_smtlib
from .subtyping import subtype, subtype_context
from .syntax import Signature, TypingContext, erase

__all__ = [
    "CheckerConfig", "Derivation", "ModedJudgment", "Obligation", "TypeCheckError", "check_definition",
    "check_process", "elaborate", "type_configuration", "FuzzConfig", "HarnessReport", "RunSpec",
    "soundness_fuzz", "observably_satisfies", "positive_subcontext", "ParseError", "parse_assertion",
    "parse_process", "parse_program", "parse_term", "parse_type", "pretty", "ProverConfig", "Status",
    "Verdict", "entails", "Final", "OutOfFuel", "RoundRobin", "SeededRandom", "Stuck", "execute",
    "initial", "run", "export_smtlib", "subtype", "subtype_context", "Signature", "TypingContext", "erase",
]
