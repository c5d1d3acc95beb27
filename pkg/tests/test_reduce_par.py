"""Golden tests for the process rules, both models."""

from __future__ import annotations

import random

import pytest

from aeff.reduce_par import (
    FlatProcess,
    is_flat_normal,
    run_leaves,
    step_flat,
    step_proc,
)
from aeff.reduce_seq import RuleLabel
from aeff.surface import parse
from aeff.syntax import (
    Interrupt,
    Let,
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
from aeff.typecheck import erase, typecheck_process
from gen import gen_any_process

U = Unit()


def rules_at_root(p):
    return {s[0].rule for s in step_proc(p) if not s[0].path}


def the_proc_step(p, rule):
    steps = [s for s in step_proc(p) if not s[0].path and s[0].rule == rule]
    assert len(steps) == 1, steps
    return steps[0][1]


def test_r14_lifts_sequential_steps():
    p = Run(Let(Return(U), Return(Var(0))))
    (lab, q), = step_proc(p)
    assert lab.rule == "r14" and lab.inner == RuleLabel("r2")
    assert q == Run(Return(U))


def test_r15_signal_hoisting():
    p = Run(Signal("op1", U, Return(U)))
    assert the_proc_step(p, "r15") == PSignal("op1", U, Run(Return(U)))


def test_r16_broadcast_left():
    p = Par(PSignal("op1", U, Run(Return(U))), Run(Return(U)))
    got = the_proc_step(p, "r16")
    assert got == PSignal(
        "op1", U, Par(Run(Return(U)), PInterrupt("op1", U, Run(Return(U))))
    )


def test_r17_broadcast_right():
    p = Par(Run(Return(U)), PSignal("op1", U, Run(Return(U))))
    got = the_proc_step(p, "r17")
    assert got == PSignal(
        "op1", U, Par(PInterrupt("op1", U, Run(Return(U))), Run(Return(U)))
    )


def test_r18_interrupt_into_run():
    p = PInterrupt("op1", U, Run(Return(U)))
    assert the_proc_step(p, "r18") == Run(Interrupt("op1", U, Return(U)))


def test_r19_interrupt_distributes_over_par():
    p = PInterrupt("op1", U, Par(Run(Return(U)), Run(Return(U))))
    got = the_proc_step(p, "r19")
    assert got == Par(
        PInterrupt("op1", U, Run(Return(U))), PInterrupt("op1", U, Run(Return(U)))
    )


def test_r20_interrupt_past_signal():
    p = PInterrupt("op1", U, PSignal("op2", U, Run(Return(U))))
    got = the_proc_step(p, "r20")
    assert got == PSignal("op2", U, PInterrupt("op1", U, Run(Return(U))))


def test_r21_congruence_paths():
    inner = Run(Let(Return(U), Return(Var(0))))
    p = Par(inner, Run(Return(U)))
    steps = step_proc(p)
    assert len(steps) == 1
    lab, q = steps[0]
    assert lab.rule == "r14" and lab.path == ("parL",)
    assert q == Par(Run(Return(U)), Run(Return(U)))
    wrapped = PSignal("op1", U, p)
    (lab2, _), = step_proc(wrapped)
    assert lab2.path == ("send", "parL")


def test_flat_singleton_normal():
    assert step_flat(FlatProcess((Return(U),))) == []
    assert is_flat_normal(FlatProcess((Return(U),)))


def test_flat_broadcast_index0():
    fp = FlatProcess((Signal("op1", U, Return(U)), Return(U)))
    steps = [s for s in step_flat(fp) if s[0].rule == "flat-broadcast"]
    assert len(steps) == 1
    lab, got = steps[0]
    assert (lab.op, lab.index) == ("op1", 0)
    assert got == FlatProcess((Return(U), Interrupt("op1", U, Return(U))))


def test_flat_broadcast_middle():
    m1, m2, m3 = Return(U), Signal("op1", U, Return(Promise(U))), Return(Promise(U))
    fp = FlatProcess((m1, m2, m3))
    steps = [s for s in step_flat(fp) if s[0].rule == "flat-broadcast"]
    assert len(steps) == 1
    lab, got = steps[0]
    assert lab.index == 1
    assert got == FlatProcess(
        (
            Interrupt("op1", U, m1),
            Return(Promise(U)),
            Interrupt("op1", U, m3),
        )
    )


def test_flat_run_steps_carry_index():
    fp = FlatProcess((Let(Return(U), Return(Var(0))), Let(Return(U), Return(Var(0)))))
    labels = [lab for lab, _ in step_flat(fp) if lab.rule == "flat-run"]
    assert [lab.index for lab in labels] == [0, 1]
    assert all(lab.inner == RuleLabel("r2") for lab in labels)


def test_flat_broadcast_shape_property():
    rng = random.Random(7)
    from gen import gen_any_comp

    for _ in range(100):
        n = rng.randrange(1, 5)
        items = tuple(gen_any_comp(rng, 0, 3) for _ in range(n))
        fp = FlatProcess(items)
        for lab, got in step_flat(fp):
            if lab.rule != "flat-broadcast":
                continue
            i = lab.index
            assert isinstance(items[i], Signal)
            assert got.items[i] == items[i].cont
            for j, new in enumerate(got.items):
                if j != i:
                    assert new == Interrupt(items[i].op, items[i].payload, items[j])


def test_step_proc_labels_distinct():
    rng = random.Random(8)
    for _ in range(200):
        p = gen_any_process(rng, 3)
        labels = [lab for lab, _ in step_proc(p)]
        assert len(labels) == len(set(labels))


def test_empty_flat_process_rejected():
    with pytest.raises(ValueError):
        FlatProcess(())


def test_run_leaves_paths():
    p = Par(Run(Return(U)), PSignal("op1", U, Run(Return(Promise(U)))))
    leaves = run_leaves(p)
    assert [path for path, _ in leaves] == [("parL",), ("parR", "send")]


def test_leafwise_preservation_on_corpus(corpus_dir):
    from aeff.explorer import explore

    for name in ("opcall-pair.aeff", "proc-broadcast.aeff", "proc-interrupt.aeff"):
        sp = parse((corpus_dir / name).read_text())
        root_rep = typecheck_process(sp.signature, (), sp.body)
        root_types = [erase(leaf.type) for leaf in root_rep.leaves]
        graph, verdict = explore(sp.body, 100_000)
        for term in graph.terms:
            rep = typecheck_process(sp.signature, (), term)
            assert [erase(leaf.type) for leaf in rep.leaves] == root_types, name
