"""Standalone sequent files for ``solve``.

Declarations (``type``, ``fun``, ``axiom``) use program syntax.  Two extra
line forms are recognised::

    vars x, y
    query x == succ.y; is zero(y) |- is succ(x)

``vars`` adds free variables for the queries that follow it; hypotheses are
separated by ``;``.
"""

from __future__ import annotations

from dataclasses import dataclass

from .parser import Diagnostic, ParseError, Span, parse_assertion, parse_program
from .syntax import Signature


@dataclass(frozen=True)
class Sequent:
    hyps: tuple
    goal: object
    line: int
    text: str


def _strip_comment(line: str) -> str:
    i = line.find("--")
    return line if i < 0 else line[:i]


def parse_sequents(text: str) -> tuple[Signature, list[Sequent]]:
    decls, pending = [], []
    for n, raw in enumerate(text.splitlines(), 1):
        s = _strip_comment(raw).strip()
        if s.startswith("vars ") or s.startswith("query ") or s == "query":
            pending.append((n, s))
            decls.append("")
        else:
            decls.append(raw)
    prog = parse_program("\n".join(decls))
    scope: list[str] = []
    out = []
    for n, s in pending:
        try:
            if s.startswith("vars "):
                scope += [v.strip() for v in s[5:].split(",") if v.strip()]
                continue
            body = s[5:].strip()
            if "|-" not in body:
                raise ValueError("a query needs '|-'")
            lhs, rhs = body.split("|-", 1)
            hyps = tuple(parse_assertion(h, prog, scope) for h in lhs.split(";") if h.strip())
            out.append(Sequent(hyps, parse_assertion(rhs, prog, scope), n, body))
        except (ParseError, ValueError) as e:
            raise ParseError([Diagnostic("error", f"line {n}: {e}", Span(0, 0, n, 1))]) from e
    return prog.signature(), out
