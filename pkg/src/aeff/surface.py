"""Concrete syntax: lexer, parser, and pretty-printer.

Programs live in ``.aeff`` files::

    # line comment
    operation op : unit            # signature declaration, ground type

    send op () ; return ()         # body: a computation or a process
    : unit                         # optional trailing type ascription

Computations and processes share the signal/interrupt syntax (``send op V
; M`` and ``recv op V ; M``); a body containing the keyword ``run`` is a
process, otherwise it is a computation.  The parser resolves variables to
positional binders on the fly, so scope errors are reported with source
positions, and the pretty-printer regenerates names from binder hints,
freshening against everything in scope.  ``parse(pretty(t))`` yields a
term alpha-equal to ``t``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Callable

from .effects import Effect, pretty_effect
from .errors import LexError, ParseError, ScopeError
from .syntax import (
    App,
    Await,
    Computation,
    Fun,
    Handler,
    HandlerKind,
    Inl,
    Inr,
    Interrupt,
    Let,
    Match,
    Par,
    PInterrupt,
    Process,
    Promise,
    PSignal,
    Return,
    Run,
    Signal,
    Term,
    Unit,
    Value,
    Var,
)
from .types import (
    ArrowT,
    BaseT,
    PromiseT,
    SumT,
    TypeExpr,
    UnitT,
    is_ground,
    pretty_type,
)

KEYWORDS = frozenset(
    "return let in fun run send recv promise rec loop as await match with "
    "inl inr unit operation".split()
)

_PUNCT = ("->", "||", ";", "(", ")", "{", "}", "<", ">", ":", ",", "+", "!", "=", "|")


@dataclass(frozen=True)
class Token:
    kind: str  # "ident" | "kw" | "punct" | "eof"
    text: str
    line: int
    col: int


_IDENT_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_']*")


def tokenize(text: str) -> list[Token]:
    toks: list[Token] = []
    line, col, i = 1, 1, 0
    n = len(text)
    while i < n:
        c = text[i]
        if c == "\n":
            line += 1
            col = 1
            i += 1
            continue
        if c in " \t\r":
            i += 1
            col += 1
            continue
        if c == "#":
            while i < n and text[i] != "\n":
                i += 1
            continue
        m = _IDENT_RE.match(text, i)
        if m:
            word = m.group(0)
            kind = "kw" if word in KEYWORDS else "ident"
            toks.append(Token(kind, word, line, col))
            col += len(word)
            i = m.end()
            continue
        for p in _PUNCT:
            if text.startswith(p, i):
                toks.append(Token("punct", p, line, col))
                col += len(p)
                i += len(p)
                break
        else:
            raise LexError(f"unexpected character {c!r}", line, col)
    toks.append(Token("eof", "", line, col))
    return toks


@dataclass
class SourceProgram:
    """A parsed ``.aeff`` file: operation signature, body, and an optional
    trailing type ascription (computations only)."""

    signature: dict[str, TypeExpr]
    body: Computation | Process
    ascription: TypeExpr | None = None
    decl_order: tuple[str, ...] = field(default_factory=tuple)


class _Parser:
    def __init__(self, toks: list[Token]):
        self.toks = toks
        self.i = 0
        self.signature: dict[str, TypeExpr] = {}
        self.decl_order: list[str] = []

    # -- token plumbing ----------------------------------------------------

    def peek(self, ahead: int = 0) -> Token:
        return self.toks[min(self.i + ahead, len(self.toks) - 1)]

    def next(self) -> Token:
        t = self.toks[self.i]
        if t.kind != "eof":
            self.i += 1
        return t

    def at(self, kind: str, text: str | None = None) -> bool:
        t = self.peek()
        return t.kind == kind and (text is None or t.text == text)

    def accept(self, kind: str, text: str | None = None) -> Token | None:
        if self.at(kind, text):
            return self.next()
        return None

    def expect(self, kind: str, text: str | None = None, what: str | None = None) -> Token:
        t = self.peek()
        if self.at(kind, text):
            return self.next()
        want = what or (text if text is not None else kind)
        found = t.text if t.kind != "eof" else "end of input"
        raise ParseError(f"expected {want!r}, found {found!r}", t.line, t.col)

    def fail(self, message: str) -> ParseError:
        t = self.peek()
        return ParseError(message, t.line, t.col)

    def _try(self, fn: Callable[[], Term]) -> Term | None:
        saved = self.i
        try:
            return fn()
        except (ParseError, ScopeError):
            self.i = saved
            return None

    # -- program -----------------------------------------------------------

    def program(self) -> SourceProgram:
        while self.at("kw", "operation"):
            self.next()
            name_tok = self.expect("ident", what="operation name")
            self.expect("punct", ":")
            ty = self.type_expr()
            if not is_ground(ty):
                raise ParseError(
                    f"operation {name_tok.text!r} must carry a ground type",
                    name_tok.line,
                    name_tok.col,
                )
            if name_tok.text in self.signature:
                raise ParseError(
                    f"operation {name_tok.text!r} declared twice",
                    name_tok.line,
                    name_tok.col,
                )
            self.signature[name_tok.text] = ty
            self.decl_order.append(name_tok.text)

        is_process = any(
            t.kind == "kw" and t.text == "run" for t in self.toks[self.i :]
        )
        body: Computation | Process
        if is_process:
            body = self.process(())
        else:
            body = self.computation(())

        ascription = None
        if self.accept("punct", ":"):
            if is_process:
                raise self.fail("type ascriptions apply to computation bodies only")
            ascription = self.type_expr()
        t = self.peek()
        if t.kind != "eof":
            raise ParseError(f"unexpected {t.text!r} after program body", t.line, t.col)
        return SourceProgram(
            self.signature, body, ascription, tuple(self.decl_order)
        )

    # -- scope helpers -----------------------------------------------------

    def lookup(self, env: tuple[str, ...], tok: Token) -> int:
        for ix, name in enumerate(env):
            if name == tok.text:
                return ix
        raise ScopeError(f"unbound variable {tok.text!r}", tok.line, tok.col)

    def operation(self) -> str:
        tok = self.expect("ident", what="operation name")
        if tok.text not in self.signature:
            raise ScopeError(f"undeclared operation {tok.text!r}", tok.line, tok.col)
        return tok.text

    # -- values --------------------------------------------------------------

    def value(self, env: tuple[str, ...]) -> Value:
        if self.at("kw", "fun"):
            return self.fun_value(env)
        if self.accept("kw", "inl"):
            return Inl(self.value(env))
        if self.accept("kw", "inr"):
            return Inr(self.value(env))
        return self.value_atom(env)

    def fun_value(self, env: tuple[str, ...]) -> Value:
        self.expect("kw", "fun")
        ann = None
        if self.accept("punct", "("):
            name = self.expect("ident", what="binder").text
            self.expect("punct", ":")
            ann = self.type_expr()
            self.expect("punct", ")")
        else:
            name = self.expect("ident", what="binder").text
        self.expect("punct", "->")
        body = self.computation((name,) + env)
        return Fun(ann, body, hint=name)

    def value_atom(self, env: tuple[str, ...]) -> Value:
        if self.at("ident"):
            tok = self.next()
            return Var(self.lookup(env, tok))
        if self.accept("punct", "<"):
            inner = self.value(env)
            self.expect("punct", ">")
            return Promise(inner)
        if self.accept("punct", "("):
            if self.accept("punct", ")"):
                return Unit()
            inner = self.value(env)
            self.expect("punct", ")")
            return inner
        raise self.fail("expected a value")

    # -- computations --------------------------------------------------------

    def computation(self, env: tuple[str, ...]) -> Computation:
        if self.accept("kw", "return"):
            return Return(self.value(env))
        if self.accept("kw", "let"):
            name = self.expect("ident", what="binder").text
            self.expect("punct", "=")
            bound = self.computation(env)
            self.expect("kw", "in")
            body = self.computation((name,) + env)
            return Let(bound, body, hint=name)
        if self.accept("kw", "send"):
            op = self.operation()
            payload = self.value_atom(env)
            self.expect("punct", ";")
            return Signal(op, payload, self.computation(env))
        if self.accept("kw", "recv"):
            op = self.operation()
            payload = self.value_atom(env)
            self.expect("punct", ";")
            return Interrupt(op, payload, self.computation(env))
        if self.at("kw", "promise"):
            return self.handler(env)
        if self.accept("kw", "await"):
            promise = self.value(env)
            self.expect("kw", "as")
            name = self.expect("ident", what="binder").text
            self.expect("kw", "in")
            body = self.computation((name,) + env)
            return Await(promise, body, hint=name)
        if self.accept("kw", "match"):
            scrutinee = self.value(env)
            self.expect("kw", "with")
            self.expect("punct", "{")
            self.expect("kw", "inl")
            lname = self.expect("ident", what="binder").text
            self.expect("punct", "->")
            left = self.computation((lname,) + env)
            self.expect("punct", "|")
            self.expect("kw", "inr")
            rname = self.expect("ident", what="binder").text
            self.expect("punct", "->")
            right = self.computation((rname,) + env)
            self.expect("punct", "}")
            return Match(scrutinee, left, right, left_hint=lname, right_hint=rname)
        if self.at("punct", "("):
            grouped = self._try(lambda: self._parenthesized_computation(env))
            if grouped is not None:
                return grouped
        if self.at("punct", "(") or self.at("punct", "<") or self.at("ident"):
            fn = self.value_atom(env)
            arg = self.value_atom(env)
            return App(fn, arg)
        raise self.fail("expected a computation")

    def _parenthesized_computation(self, env: tuple[str, ...]) -> Computation:
        self.expect("punct", "(")
        inner = self.computation(env)
        self.expect("punct", ")")
        if self.at("ident") or self.at("punct", "(") or self.at("punct", "<"):
            # looks like an application of a parenthesized value instead
            raise self.fail("grouped computation followed by a value")
        return inner

    def handler(self, env: tuple[str, ...]) -> Computation:
        self.expect("kw", "promise")
        kind = HandlerKind.PLAIN
        if self.accept("kw", "rec"):
            kind = HandlerKind.LEGACY
        elif self.accept("kw", "loop"):
            kind = HandlerKind.SUM
        self.expect("punct", "(")
        op = self.operation()
        payload_name = self.expect("ident", what="binder").text
        reinstall_name = "r"
        if kind is HandlerKind.LEGACY:
            reinstall_name = self.expect("ident", what="reinstall binder").text
            body_env = (reinstall_name, payload_name) + env
        else:
            body_env = (payload_name,) + env
        self.expect("punct", "->")
        body = self.computation(body_env)
        self.expect("punct", ")")
        self.expect("kw", "as")
        promise_name = self.expect("ident", what="binder").text
        self.expect("kw", "in")
        cont = self.computation((promise_name,) + env)
        return Handler(
            op,
            body,
            cont,
            kind,
            body_hint=payload_name,
            reinstall_hint=reinstall_name,
            cont_hint=promise_name,
        )

    # -- processes -----------------------------------------------------------

    def process(self, env: tuple[str, ...]) -> Process:
        left = self.process_prefix(env)
        if self.accept("punct", "||"):
            return Par(left, self.process(env))
        return left

    def process_prefix(self, env: tuple[str, ...]) -> Process:
        if self.accept("kw", "run"):
            return Run(self.computation(env))
        if self.accept("kw", "send"):
            op = self.operation()
            payload = self.value_atom(env)
            self.expect("punct", ";")
            return PSignal(op, payload, self.process(env))
        if self.accept("kw", "recv"):
            op = self.operation()
            payload = self.value_atom(env)
            self.expect("punct", ";")
            return PInterrupt(op, payload, self.process(env))
        if self.accept("punct", "("):
            inner = self.process(env)
            self.expect("punct", ")")
            return inner
        raise self.fail("expected a process")

    # -- types ---------------------------------------------------------------

    def type_expr(self) -> TypeExpr:
        t = self.sum_type()
        if self.accept("punct", "->"):
            cod = self.type_expr()
            eff = None
            if self.accept("punct", "!"):
                eff = self.effect_pair()
            return ArrowT(t, cod, eff)
        return t

    def sum_type(self) -> TypeExpr:
        t = self.prefix_type()
        if self.accept("punct", "+"):
            return SumT(t, self.sum_type())
        return t

    def prefix_type(self) -> TypeExpr:
        if self.accept("kw", "promise"):
            return PromiseT(self.prefix_type())
        return self.atom_type()

    def atom_type(self) -> TypeExpr:
        if self.accept("kw", "unit"):
            return UnitT()
        if self.at("ident"):
            return BaseT(self.next().text)
        if self.accept("punct", "("):
            t = self.type_expr()
            self.expect("punct", ")")
            return t
        raise self.fail("expected a type")

    def effect_pair(self) -> Effect:
        self.expect("punct", "(")
        ops = self.effect_set()
        self.expect("punct", ",")
        handlers = self.effect_map()
        self.expect("punct", ")")
        return Effect(frozenset(ops), tuple(sorted(handlers.items())))

    def effect_set(self) -> list[str]:
        self.expect("punct", "{")
        ops: list[str] = []
        if not self.at("punct", "}"):
            ops.append(self.operation())
            while self.accept("punct", ","):
                ops.append(self.operation())
        self.expect("punct", "}")
        return ops

    def effect_map(self) -> dict[str, Effect]:
        self.expect("punct", "{")
        out: dict[str, Effect] = {}
        if not self.at("punct", "}"):
            while True:
                op = self.operation()
                self.expect("punct", "->")
                out[op] = self.effect_pair()
                if not self.accept("punct", ","):
                    break
        self.expect("punct", "}")
        return out


def parse(text: str) -> SourceProgram:
    """Parse a full program; raises LexError/ParseError/ScopeError with
    line/column positions on rejection."""
    return _Parser(tokenize(text)).program()


# ---------------------------------------------------------------------------
# Pretty-printing


def _fresh(hint: str, used: tuple[str, ...]) -> str:
    name = hint or "x"
    while name in used or name in KEYWORDS:
        name += "'"
    return name


def _pv(v: Value, env: tuple[str, ...]) -> str:
    if isinstance(v, Fun):
        name = _fresh(v.hint, env)
        body = _pc(v.body, (name,) + env)
        if v.ann is None:
            return f"fun {name} -> {body}"
        return f"fun ({name} : {pretty_type(v.ann)}) -> {body}"
    if isinstance(v, Inl):
        return f"inl {_pa(v.value, env)}"
    if isinstance(v, Inr):
        return f"inr {_pa(v.value, env)}"
    return _pa(v, env)


def _pa(v: Value, env: tuple[str, ...]) -> str:
    if isinstance(v, Var):
        if v.ix < len(env):
            return env[v.ix]
        return f"?{v.ix - len(env)}"
    if isinstance(v, Unit):
        return "()"
    if isinstance(v, Promise):
        return f"<{_pv(v.value, env)}>"
    return f"({_pv(v, env)})"


def _grouped(m: Computation, env: tuple[str, ...]) -> str:
    if isinstance(m, (Return, App, Match)):
        return _pc(m, env)
    return f"({_pc(m, env)})"


def _pc(m: Computation, env: tuple[str, ...]) -> str:
    if isinstance(m, Return):
        return f"return {_pv(m.value, env)}"
    if isinstance(m, Let):
        name = _fresh(m.hint, env)
        return f"let {name} = {_grouped(m.bound, env)} in {_pc(m.body, (name,) + env)}"
    if isinstance(m, App):
        return f"{_pa(m.fn, env)} {_pa(m.arg, env)}"
    if isinstance(m, Signal):
        return f"send {m.op} {_pa(m.payload, env)} ; {_pc(m.cont, env)}"
    if isinstance(m, Interrupt):
        return f"recv {m.op} {_pa(m.payload, env)} ; {_pc(m.cont, env)}"
    if isinstance(m, Handler):
        x = _fresh(m.body_hint, env)
        p = _fresh(m.cont_hint, env)
        cont = _pc(m.cont, (p,) + env)
        if m.kind is HandlerKind.LEGACY:
            r = _fresh(m.reinstall_hint, (x,) + env)
            body = _pc(m.body, (r, x) + env)
            return f"promise rec ({m.op} {x} {r} -> {body}) as {p} in {cont}"
        body = _pc(m.body, (x,) + env)
        kw = "promise loop" if m.kind is HandlerKind.SUM else "promise"
        return f"{kw} ({m.op} {x} -> {body}) as {p} in {cont}"
    if isinstance(m, Await):
        name = _fresh(m.hint, env)
        return f"await {_pv(m.promise, env)} as {name} in {_pc(m.body, (name,) + env)}"
    if isinstance(m, Match):
        x = _fresh(m.left_hint, env)
        y = _fresh(m.right_hint, env)
        left = _pc(m.left, (x,) + env)
        right = _pc(m.right, (y,) + env)
        return f"match {_pv(m.scrutinee, env)} with {{ inl {x} -> {left} | inr {y} -> {right} }}"
    raise TypeError(f"not a computation: {m!r}")


def _pp(p: Process, env: tuple[str, ...]) -> str:
    if isinstance(p, Run):
        return f"run ({_pc(p.comp, env)})"
    if isinstance(p, Par):
        # signal/interrupt prefixes and nested pars extend maximally to
        # the right, so only a run-leaf is safe unparenthesized on the left
        left = _pp(p.left, env)
        if not isinstance(p.left, Run):
            left = f"({left})"
        return f"{left} || {_pp(p.right, env)}"
    if isinstance(p, PSignal):
        return f"send {p.op} {_pa(p.payload, env)} ; {_pp(p.cont, env)}"
    if isinstance(p, PInterrupt):
        return f"recv {p.op} {_pa(p.payload, env)} ; {_pp(p.cont, env)}"
    raise TypeError(f"not a process: {p!r}")


def pretty(t, names: tuple[str, ...] = ()) -> str:
    """Render a term, type, effect annotation, or program.

    ``names`` supplies surface names for the free variables of open
    terms, innermost first.
    """
    if isinstance(t, Value):
        return _pv(t, names)
    if isinstance(t, Computation):
        return _pc(t, names)
    if isinstance(t, Process):
        return _pp(t, names)
    if isinstance(t, Effect):
        return pretty_effect(t)
    if isinstance(t, SourceProgram):
        return pretty_program(t)
    return pretty_type(t)


def pretty_program(sp: SourceProgram) -> str:
    lines = [f"operation {op} : {pretty_type(sp.signature[op])}" for op in sp.decl_order]
    if lines:
        lines.append("")
    lines.append(pretty(sp.body))
    if sp.ascription is not None:
        lines.append(f": {pretty_type(sp.ascription)}")
    return "\n".join(lines) + "\n"
