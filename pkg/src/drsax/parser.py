"""Lexer and recursive-descent parser for ``.sax`` source files."""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from .syntax import (
    FF, ONE, TT, And, Anno, App, Arrow, Axiom, BranchK, Call, Case, Copy, Cut, Eq, Fn,
    Forall, FunDecl, Implies, Is, Item, PairK, PairTm, PairV, Plus, ProcDef, Proj,
    RType, Signature, TagTm, TagV, Tensor, TyName, TypeDef, UnitK, UnitTm, UnitV, Var,
    With, Write, free_names,
)

KEYWORDS = {"type", "fun", "axiom", "proc", "case", "call", "forall", "is", "ff", "tt"}

_TOKEN = re.compile(
    r"""
    (?P<ws>[ \t\r\n]+|--[^\n]*)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_']*)
  | (?P<nat>[0-9]+)
  | (?P<sym><-|->|=>|==|/\\|[=/(),:|.{}+&*;@])
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class Span:
    start: int
    end: int
    line: int
    col: int


@dataclass(frozen=True)
class Diagnostic:
    severity: str
    message: str
    span: Span
    note: str | None = None

    def render(self, filename: str = "<input>") -> str:
        out = f"{filename}:{self.span.line}:{self.span.col}: {self.severity}: {self.message}"
        if self.note:
            out += f"\n  note: {self.note}"
        return out


class ParseError(Exception):
    def __init__(self, diagnostics: list[Diagnostic]):
        super().__init__("; ".join(d.message for d in diagnostics))
        self.diagnostics = diagnostics


@dataclass(frozen=True)
class Token:
    kind: str  # ident | nat | sym | eof
    text: str
    span: Span


@dataclass
class SourceProgram:
    items: list[Item] = field(default_factory=list)

    def signature(self) -> Signature:
        return Signature.from_items(self.items)


def _line_col(text: str, offset: int) -> tuple[int, int]:
    line = text.count("\n", 0, offset) + 1
    col = offset - (text.rfind("\n", 0, offset) + 1) + 1
    return line, col


def tokenize(text: str) -> list[Token]:
    toks = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            line, col = _line_col(text, pos)
            span = Span(pos, pos + 1, line, col)
            raise ParseError([Diagnostic("error", f"unexpected character {text[pos]!r}", span)])
        kind = m.lastgroup
        if kind != "ws":
            line, col = _line_col(text, pos)
            toks.append(Token(kind, m.group(), Span(pos, m.end(), line, col)))
        pos = m.end()
    line, col = _line_col(text, len(text))
    toks.append(Token("eof", "", Span(len(text), len(text), line, col)))
    return toks


class Parser:
    def __init__(self, text: str):
        self.text = text
        self.toks = tokenize(text)
        self.pos = 0
        self.types: set[str] = set()
        self.funs: dict[str, int] = {}
        self.procs: dict[str, int] = {}
        self._prescan()

    # -- helpers --------------------------------------------------------

    def _prescan(self):
        t = self.toks
        for i, tok in enumerate(t[:-1]):
            if tok.kind != "ident" or i + 3 >= len(t):
                continue
            nm = t[i + 1]
            if tok.text == "type" and nm.kind == "ident":
                self.types.add(nm.text)
            elif tok.text == "fun" and nm.kind == "ident" and t[i + 2].text == "/" and t[i + 3].kind == "nat":
                self.funs.setdefault(nm.text, int(t[i + 3].text))
            elif tok.text == "proc" and nm.kind == "ident":
                # arity = number of bindings minus the destination
                depth, commas, j = 0, 0, i + 2
                while j < len(t) and t[j].kind != "eof":
                    if t[j].text in "({":
                        depth += 1
                    elif t[j].text in ")}":
                        depth -= 1
                        if depth == 0:
                            break
                    elif t[j].text == "," and depth == 1:
                        commas += 1
                    j += 1
                self.procs.setdefault(nm.text, commas)

    @property
    def tok(self) -> Token:
        return self.toks[self.pos]

    def peek(self, k: int = 1) -> Token:
        return self.toks[min(self.pos + k, len(self.toks) - 1)]

    def error(self, msg: str, tok: Token | None = None, note: str | None = None):
        tok = tok or self.tok
        raise ParseError([Diagnostic("error", msg, tok.span, note)])

    def at(self, text: str) -> bool:
        return self.tok.text == text and self.tok.kind in ("sym", "ident", "nat")

    def accept(self, text: str) -> Token | None:
        if self.at(text):
            t = self.tok
            self.pos += 1
            return t
        return None

    def expect(self, text: str) -> Token:
        t = self.accept(text)
        if t is None:
            found = self.tok.text or "end of input"
            self.error(f"expected {text!r}, found {found!r}")
        return t

    def expect_eof(self):
        if self.tok.kind != "eof":
            self.error(f"unexpected {self.tok.text!r}")

    def ident(self, what: str = "identifier") -> str:
        t = self.tok
        if t.kind != "ident" or t.text in KEYWORDS:
            self.error(f"expected {what}, found {t.text or 'end of input'!r}")
        self.pos += 1
        return t.text

    def span_from(self, start: Token) -> Span:
        end = self.toks[self.pos - 1].span.end if self.pos > 0 else start.span.end
        return Span(start.span.start, end, start.span.line, start.span.col)

    # -- program ----------------------------------------------------------

    def program(self) -> SourceProgram:
        items: list[Item] = []
        seen: dict[tuple[str, str], Span] = {}
        while self.tok.kind != "eof":
            start = self.tok
            item = self.item()
            key = None
            match item:
                case TypeDef(name=n):
                    key = ("type", n)
                case FunDecl(name=n):
                    key = ("fun", n)
                case ProcDef(name=n):
                    key = ("proc", n)
            if key is not None:
                if key in seen:
                    raise ParseError([Diagnostic("error", f"duplicate definition of {key[0]} {key[1]}", start.span)])
                seen[key] = start.span
            items.append(item)
        return SourceProgram(items)

    def item(self) -> Item:
        start = self.tok
        if self.accept("type"):
            name = self.ident("type name")
            self.expect("=")
            body = self.type_(frozenset())
            if isinstance(body, TyName):
                self.error(f"type {name} is not contractive (body is a bare name)", start)
            return TypeDef(name, body, span=self.span_from(start))
        if self.accept("fun"):
            name = self.ident("function symbol")
            self.expect("/")
            if self.tok.kind != "nat":
                self.error("expected arity")
            arity = int(self.tok.text)
            self.pos += 1
            return FunDecl(name, arity, span=self.span_from(start))
        if self.accept("axiom"):
            a = self.assertion(frozenset())
            return Axiom(a, span=self.span_from(start))
        if self.accept("proc"):
            name = self.ident("process name")
            self.expect("(")
            binds = []
            scope: frozenset[str] = frozenset()
            while True:
                btok = self.tok
                x = self.ident("binder")
                if x in scope:
                    self.error(f"duplicate binder {x}", btok)
                self.expect(":")
                t = self.rtype(scope)
                binds.append((x, t))
                scope = scope | {x}
                if not self.accept(","):
                    break
            self.expect(")")
            self.expect("=")
            body = self.proc(scope)
            return ProcDef(name, tuple(binds[:-1]), binds[-1], body, span=self.span_from(start))
        self.error(f"expected 'type', 'fun', 'axiom' or 'proc', found {self.tok.text!r}")

    # -- types ------------------------------------------------------------

    def type_(self, scope: frozenset[str]):
        t = self.tok
        if t.kind == "nat":
            if t.text != "1":
                self.error("only '1' is a numeric type")
            self.pos += 1
            return ONE
        if self.accept("+"):
            return Plus(self._branches(lambda: self.type_(scope)))
        if self.accept("&"):
            return With(self._branches(lambda: self.rtype(scope)))
        if self.accept("("):
            x = self.ident("binder")
            self.expect(":")
            first = self.rtype(scope)
            self.expect(")")
            if self.accept("*"):
                return Tensor(x, first, self.type_(scope | {x}))
            if self.accept("->"):
                return Arrow(x, first, self.rtype(scope | {x}))
            self.error("expected '*' or '->' after dependent binder")
        if t.kind == "ident" and t.text not in KEYWORDS:
            self.pos += 1
            if t.text not in self.types:
                self.error(f"unknown type {t.text}", t)
            return TyName(t.text)
        self.error(f"expected a type, found {t.text or 'end of input'!r}")

    def _branches(self, component):
        self.expect("{")
        out = []
        seen = set()
        while True:
            ltok = self.tok
            label = self.ident("label")
            if label in seen:
                self.error(f"duplicate label {label}", ltok)
            seen.add(label)
            self.expect(":")
            out.append((label, component()))
            if not self.accept(","):
                break
        self.expect("}")
        return tuple(out)

    def rtype(self, scope: frozenset[str]) -> RType:
        base = self.type_(scope)
        if self.accept("|"):
            x = self.ident("binder")
            self.expect(".")
            return RType(base, x, self.assertion(scope | {x}))
        return RType(base)

    # -- assertions -------------------------------------------------------

    def assertion(self, scope) -> object:
        lhs = self.conjunction(scope)
        if self.accept("=>"):
            return Implies(lhs, self.assertion(scope))
        return lhs

    def conjunction(self, scope):
        a = self.atom(scope)
        while self.accept("/\\"):
            a = And(a, self.atom(scope))
        return a

    def atom(self, scope):
        if self.accept("ff"):
            return FF
        if self.accept("tt"):
            return TT
        if self.accept("is"):
            k = self.ident("label")
            self.expect("(")
            t = self.term(scope)
            self.expect(")")
            return Is(k, t)
        if self.accept("forall"):
            names = [self.ident("binder")]
            while not self.at("."):
                names.append(self.ident("binder"))
            self.expect(".")
            body = self.assertion(scope | set(names))
            for n in reversed(names):
                body = Forall(n, body)
            return body
        if self.at("("):
            save = self.pos
            try:
                lhs = self.term(scope)
                if self.at("=="):
                    self.pos += 1
                    return Eq(lhs, self.term(scope))
            except ParseError:
                pass
            self.pos = save
            self.expect("(")
            a = self.assertion(scope)
            self.expect(")")
            return a
        lhs = self.term(scope)
        self.expect("==")
        return Eq(lhs, self.term(scope))

    # -- terms --------------------------------------------------------------

    def term(self, scope):
        t = self.tag_term(scope)
        while self.accept("@"):
            t = App(t, self.tag_term(scope))
        return t

    def tag_term(self, scope):
        if self.tok.kind == "ident" and self.peek().text == "." and self.tok.text not in KEYWORDS:
            k = self.tok.text
            self.pos += 2
            return TagTm(k, self.tag_term(scope))
        return self.post_term(scope)

    def post_term(self, scope):
        t = self.atom_term(scope)
        while self.at(":") and self.peek().kind == "ident":
            self.pos += 1
            t = Proj(t, self.ident("label"))
        return t

    def atom_term(self, scope):
        tok = self.tok
        if self.accept("("):
            if self.accept(")"):
                return UnitTm()
            a = self.term(scope)
            if self.accept(","):
                b = self.term(scope)
                self.expect(")")
                return PairTm(a, b)
            self.expect(")")
            return a
        name = self.ident("term")
        if self.at("("):
            if name not in self.funs:
                self.error(f"unknown function symbol {name}", tok)
            self.pos += 1
            args = [self.term(scope)]
            while self.accept(","):
                args.append(self.term(scope))
            self.expect(")")
            if len(args) != self.funs[name]:
                self.error(f"{name} expects {self.funs[name]} argument(s), got {len(args)}", tok)
            return Fn(name, tuple(args))
        if name in scope:
            return Var(name)
        if self.funs.get(name) == 0:
            return Fn(name, ())
        self.error(f"unknown name {name}", tok)

    # -- processes ----------------------------------------------------------

    def _addr(self, scope, what="address") -> str:
        tok = self.tok
        x = self.ident(what)
        if x not in scope:
            self.error(f"unknown address {x}", tok)
        return x

    def proc(self, scope):
        start = self.tok
        if self.accept("case"):
            s = self._addr(scope)
            self.expect("{")
            k = self.cont(scope)
            self.expect("}")
            return Case(s, k, span=self.span_from(start))
        if self.accept("call"):
            ftok = self.tok
            f = self.ident("process name")
            if f not in self.procs:
                self.error(f"unknown process {f}", ftok)
            self.expect("(")
            args = [self._addr(scope)]
            while self.accept(","):
                args.append(self._addr(scope))
            self.expect(")")
            if len(args) - 1 != self.procs[f]:
                self.error(f"{f} expects {self.procs[f]} source(s) and a destination", ftok)
            return Call(f, tuple(args[:-1]), args[-1], span=self.span_from(start))
        if self.accept("("):
            x = self._addr(scope)
            self.expect(":")
            t = self.rtype(scope)
            self.expect(")")
            self.expect("@")
            body = self.proc(scope)
            return Anno(x, t, body, span=self.span_from(start))
        x = self.ident("address")
        if self.at(":") or (self.at("<-") and self.peek().text == "{"):
            ann = None
            if self.accept(":"):
                ann = self.rtype(scope)
            self.expect("<-")
            self.expect("{")
            left = self.proc(scope | {x})
            self.expect("}")
            self.expect(";")
            right = self.proc(scope | {x})
            return Cut(x, ann, left, right, span=self.span_from(start))
        if x not in scope:
            self.error(f"unknown address {x}", start)
        if self.accept("<-"):
            src = self._addr(scope)
            return Copy(x, src, span=self.span_from(start))
        if self.accept("."):
            v = self.value(scope)
            return Write(x, v, span=self.span_from(start))
        self.error(f"expected '<-' or '.' after {x}")

    def value(self, scope):
        if self.accept("("):
            if self.accept(")"):
                return UnitV()
            a = self._addr(scope)
            self.expect(",")
            b = self._addr(scope)
            self.expect(")")
            return PairV(a, b)
        k = self.ident("label")
        self.expect(".")
        return TagV(k, self._addr(scope))

    def cont(self, scope):
        if self.accept("("):
            if self.accept(")"):
                self.expect("=>")
                return UnitK(self.proc(scope))
            x = self.ident("binder")
            self.expect(",")
            y = self.ident("binder")
            self.expect(")")
            self.expect("=>")
            return PairK(x, y, self.proc(scope | {x, y}))
        out = []
        seen = set()
        while True:
            ltok = self.tok
            k = self.ident("label")
            if k in seen:
                self.error(f"duplicate branch {k}", ltok)
            seen.add(k)
            self.expect(".")
            x = self.ident("binder")
            self.expect("=>")
            out.append((k, x, self.proc(scope | {x})))
            if not self.accept("|"):
                break
        return BranchK(tuple(out))


def _check_closed(prog: SourceProgram, text: str):
    for it in prog.items:
        if isinstance(it, TypeDef) and free_names(it.body):
            raise ParseError([Diagnostic("error", f"type {it.name} mentions free variables", it.span)])
        if isinstance(it, Axiom) and free_names(it.body):
            raise ParseError([Diagnostic("error", "axiom is not closed", it.span)])


def parse_program(text: str) -> SourceProgram:
    p = Parser(text)
    prog = p.program()
    _check_closed(prog, text)
    return prog


def parse_type(text: str, program: SourceProgram | None = None, scope=()) -> RType:
    p = _sub_parser(text, program)
    t = p.rtype(frozenset(scope))
    p.expect_eof()
    return t


def parse_assertion(text: str, program: SourceProgram | None = None, scope=()):
    p = _sub_parser(text, program)
    a = p.assertion(frozenset(scope))
    p.expect_eof()
    return a


def parse_term(text: str, program: SourceProgram | None = None, scope=()):
    p = _sub_parser(text, program)
    t = p.term(frozenset(scope))
    p.expect_eof()
    return t


def parse_process(text: str, program: SourceProgram | None = None, scope=()):
    p = _sub_parser(text, program)
    t = p.proc(frozenset(scope))
    p.expect_eof()
    return t


def _sub_parser(text: str, program: SourceProgram | None) -> Parser:
    p = Parser(text)
    if program is not None:
        for it in program.items:
            match it:
                case TypeDef(name=n):
                    p.types.add(n)
                case FunDecl(name=n, arity=a):
                    p.funs[n] = a
                case ProcDef(name=n, params=ps):
                    p.procs[n] = len(ps)
    return p
