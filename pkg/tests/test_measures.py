"""Continuations, signal counts, parallel shapes, and process measures."""

from __future__ import annotations

import random

import pytest

from aeff.errors import ContinuationArityError, MeasureUndefinedError
from aeff.measures import (
    Continuation,
    Down,
    ParShape,
    RunLeaf,
    Up,
    apply_cont,
    cont_interrupts,
    cont_len,
    flat_measures,
    max_sh,
    max_signals,
    proc_measures,
    shape_of,
    signal_spine,
    step_shape,
)
from aeff.explorer import SN, explore
from aeff.reduce_par import FlatProcess
from aeff.syntax import (
    App,
    Await,
    Fun,
    Interrupt,
    Let,
    Match,
    Par,
    PInterrupt,
    Promise,
    PSignal,
    Return,
    Run,
    Signal,
    Unit,
    Var,
)
from aeff.types import UnitT
from gen import SIG, all_shapes_up_to, gen_continuation, gen_typed_comp

U = Unit()
ID = Continuation.identity()


def test_apply_identity():
    assert apply_cont(ID, Return(U)) == Return(U)


def test_apply_seq_frame():
    k = ID.then_seq(Return(Var(0)))
    assert apply_cont(k, Return(U)) == Let(Return(U), Return(Var(0)))


def test_apply_interrupt_frame():
    k = ID.then_interrupt("op1", U)
    assert apply_cont(k, Return(U)) == Interrupt("op1", U, Return(U))


def test_apply_await_cap():
    k = ID.with_await_cap(Return(Var(0)))
    assert apply_cont(k, Promise(U)) == Await(Promise(U), Return(Var(0)))


def test_apply_sum_cap():
    k = ID.with_sum_cap(Return(Var(0)), Return(Var(0)))
    from aeff.syntax import Inl

    assert apply_cont(k, Inl(U)) == Match(Inl(U), Return(Var(0)), Return(Var(0)))


def test_apply_order_innermost_first():
    # (Id o (x)N o recv op1 ()) @ M  =  let x = (recv op1 () ; M) in N
    k = ID.then_seq(Return(Var(0))).then_interrupt("op1", U)
    got = apply_cont(k, Return(U))
    assert got == Let(Interrupt("op1", U, Return(U)), Return(Var(0)))


def test_lengths():
    assert cont_len(ID) == 0
    k = ID.then_seq(Return(U)).then_interrupt("op1", U)
    assert cont_len(k) == 2
    assert cont_interrupts(k) == 1
    k2 = ID.then_interrupt("op1", U).then_interrupt("op2", U)
    assert cont_interrupts(k2) == 2
    # caps do not count as compositions
    assert cont_len(ID.with_await_cap(Return(Var(0)))) == 0


def test_arity_errors():
    with pytest.raises(ContinuationArityError):
        apply_cont(ID.with_await_cap(Return(Var(0))), Return(U))
    with pytest.raises(ContinuationArityError):
        apply_cont(ID, U)
    with pytest.raises(ContinuationArityError):
        ID.with_await_cap(Return(Var(0))).then_seq(Return(U))


def test_apply_length_law():
    rng = random.Random(21)
    for _ in range(200):
        k = gen_continuation(rng)
        m = gen_typed_comp(rng, 2)
        term = apply_cont(k, m)
        wrappers = 0
        cur = term
        while wrappers < cont_len(k):
            assert isinstance(cur, (Let, Interrupt))
            cur = cur.bound if isinstance(cur, Let) else cur.cont
            wrappers += 1
        assert cur == m
        assert wrappers == cont_len(k)


def test_max_signals_examples():
    assert max_signals(Return(U)) == 0
    assert max_signals(Signal("op1", U, Return(U))) == 1
    assert signal_spine(Signal("op1", U, Signal("op2", U, Return(U)))) == 2


def test_max_signals_requires_sn():
    omega_fun = Fun(UnitT(), App(Var(0), Var(0)))
    omega = App(omega_fun, omega_fun)
    with pytest.raises(MeasureUndefinedError):
        max_signals(omega, budget=50)


def test_shape_golden_rules():
    assert {t for _, t in step_shape(Down(RunLeaf()))} == {RunLeaf()}
    assert {t for _, t in step_shape(ParShape(Up(RunLeaf()), RunLeaf()))} == {
        Up(ParShape(RunLeaf(), Down(RunLeaf())))
    }
    assert {t for _, t in step_shape(ParShape(RunLeaf(), Up(RunLeaf())))} == {
        Up(ParShape(Down(RunLeaf()), RunLeaf()))
    }
    assert {t for _, t in step_shape(Down(ParShape(RunLeaf(), RunLeaf())))} == {
        ParShape(Down(RunLeaf()), Down(RunLeaf()))
    }
    assert {t for _, t in step_shape(Down(Up(RunLeaf())))} == {Up(Down(RunLeaf()))}


def test_shape_of():
    p = PInterrupt("op1", U, Par(Run(Return(U)), PSignal("op2", U, Run(Return(U)))))
    assert shape_of(p) == Down(ParShape(RunLeaf(), Up(RunLeaf())))


def test_max_sh_examples():
    assert max_sh(RunLeaf()) == 0
    assert max_sh(Down(RunLeaf())) == 1


def test_all_small_shapes_strongly_normalise():
    shapes = all_shapes_up_to(8)
    assert len(shapes) == 2055
    for s in shapes:
        graph, verdict = explore(s, 100_000, step=step_shape)
        assert isinstance(verdict, SN), s


def test_proc_measures_examples():
    assert proc_measures(SIG, Run(Return(U))).lex4() == (0, 0, 0, 0)
    assert proc_measures(SIG, PInterrupt("op1", U, Run(Return(U)))).lex4() == (
        0,
        0,
        1,
        0,
    )
    # a pending signal at a leaf is seq-normal: one pending emission, no steps
    assert proc_measures(SIG, Run(Signal("op1", U, Return(U)))).lex4() == (0, 1, 0, 0)


def test_proc_measures_size_counts_handlers():
    from aeff.syntax import Handler, HandlerKind

    h = Handler("op1", Return(Promise(Var(0))), Return(Var(0)), HandlerKind.PLAIN)
    m = proc_measures(SIG, Run(h))
    assert m.size_i == 1 and m.max_run == 0


def test_flat_measures():
    fp = FlatProcess((Signal("op1", U, Return(U)), Let(Return(U), Return(Var(0)))))
    m = flat_measures(SIG, fp)
    assert m.lex3() == (0, 1, 1)
    assert [leaf.path for leaf in m.leaves] == ["0", "1"]


def test_measures_fail_loudly_on_untypeable_leaf():
    bad = Run(App(U, U))
    with pytest.raises(MeasureUndefinedError):
        proc_measures(SIG, bad)
