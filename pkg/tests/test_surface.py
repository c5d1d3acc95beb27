"""Parser and pretty-printer: golden forms, round-trips, error positions."""

from __future__ import annotations

import random

import pytest

from aeff.errors import LexError, ParseError, ScopeError
from aeff.surface import parse, pretty, pretty_program, tokenize
from aeff.syntax import (
    Handler,
    HandlerKind,
    Interrupt,
    Par,
    PInterrupt,
    Promise,
    PSignal,
    Return,
    Run,
    Signal,
    Unit,
    Var,
    alpha_eq,
)
from aeff.types import ArrowT, BaseT, SumT, UnitT
from aeff.effects import effect
from gen import OPS, gen_any_comp, gen_any_process

HEADER = "".join(f"operation {op} : unit\n" for op in OPS)


def parse_body(text: str):
    return parse(HEADER + text).body


def test_parse_return_unit():
    assert parse_body("return ()") == Return(Unit())


def test_parse_signal():
    assert parse_body("send op1 () ; return ()") == Signal(
        "op1", Unit(), Return(Unit())
    )


def test_parse_plain_handler():
    got = parse_body("promise (op1 x -> return <x>) as p in return p")
    want = Handler(
        "op1", Return(Promise(Var(0))), Return(Var(0)), HandlerKind.PLAIN
    )
    assert alpha_eq(got, want)


def test_parse_legacy_handler_binders():
    got = parse_body("promise rec (op1 x r -> recv op1 x ; r ()) as p in return p")
    assert isinstance(got, Handler) and got.kind is HandlerKind.LEGACY
    # payload is the outer binder, the reinstall function the inner one
    body = got.body
    assert isinstance(body, Interrupt) and body.payload == Var(1)


def test_parse_process_forms():
    got = parse(HEADER + "send op1 () ; run (return ())").body
    assert got == PSignal("op1", Unit(), Run(Return(Unit())))
    got = parse(HEADER + "run (return ()) || run (return ()) || recv op2 () ; run (return ())").body
    assert got == Par(
        Run(Return(Unit())),
        Par(Run(Return(Unit())), PInterrupt("op2", Unit(), Run(Return(Unit())))),
    )


def test_parse_types_roundtrip_through_signature():
    sp = parse("operation op : unit + base\nreturn ()")
    assert sp.signature["op"] == SumT(UnitT(), BaseT("base"))


def test_parse_annotated_arrow_type():
    sp = parse(
        "operation op : unit\n"
        "return (fun (f : unit -> unit ! ({op}, {op -> ({}, {})})) -> f ())\n"
    )
    fn = sp.body.value
    assert fn.ann == ArrowT(
        UnitT(), UnitT(), effect({"op"}, {"op": effect()})
    )


def test_ascription_parses():
    sp = parse("operation op : unit\nreturn (inr ())\n: unit + unit")
    assert sp.ascription == SumT(UnitT(), UnitT())


def test_rejects_undeclared_operation():
    with pytest.raises(ScopeError) as err:
        parse("operation op : unit\nsend mystery () ; return ()")
    assert err.value.line == 2


def test_rejects_unbound_variable_with_position():
    with pytest.raises(ScopeError) as err:
        parse("operation op : unit\nreturn x")
    assert (err.value.line, err.value.col) == (2, 8)


def test_rejects_syntax_error_with_position():
    with pytest.raises(ParseError) as err:
        parse("operation op : unit\nlet x return () in return x")
    assert err.value.line == 2


def test_rejects_bad_character():
    with pytest.raises(LexError):
        tokenize("return $")


def test_rejects_non_ground_operation_type():
    with pytest.raises(ParseError):
        parse("operation op : unit -> unit\nreturn ()")


def test_pretty_golden():
    assert pretty(Return(Unit())) == "return ()"
    assert (
        pretty(PSignal("op1", Unit(), Run(Return(Unit()))))
        == "send op1 () ; run (return ())"
    )


def test_pretty_freshens_shadowed_names():
    # both binders hint "x", and the inner body refers to the outer one;
    # printing must keep the names apart
    from aeff.syntax import Let

    t = Let(
        Return(Unit()),
        Let(Return(Var(0)), Return(Var(1)), hint="x"),
        hint="x",
    )
    text = pretty(t)
    assert "x'" in text
    assert alpha_eq(parse(HEADER + text).body, t)


def test_roundtrip_corpus(corpus_dir):
    for f in sorted(corpus_dir.glob("*.aeff")):
        sp = parse(f.read_text())
        again = parse(pretty_program(sp))
        assert alpha_eq(again.body, sp.body), f.name
        assert again.signature == sp.signature


def test_roundtrip_generated_terms():
    rng = random.Random(0xA3FF)
    for i in range(500):
        if i % 3 == 0:
            t = gen_any_process(rng, 3)
        else:
            t = gen_any_comp(rng, 0, 5)
        text = HEADER + pretty(t)
        assert alpha_eq(parse(text).body, t), pretty(t)
