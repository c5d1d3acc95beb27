"""The effect-annotation lattice and its size measures."""

from __future__ import annotations

import random

import pytest

from aeff.effects import (
    BOTTOM,
    Effect,
    effect,
    join,
    leq,
    op_act,
    paths,
    size_i,
    size_paths,
)
from gen import enumerate_annotations, gen_effect


def test_leq_basics():
    assert leq(BOTTOM, BOTTOM)
    big = effect({"op"}, {"op": BOTTOM})
    assert leq(BOTTOM, big)
    assert not leq(effect({"op"}), BOTTOM)


def test_join_examples():
    e = effect({"op1"}, {"op2": BOTTOM})
    assert join(BOTTOM, e) == e
    assert join(effect({"op1"}), effect({"op2"})) == effect({"op1", "op2"})
    nested = join(
        effect((), {"op": effect({"op1"})}),
        effect((), {"op": effect({"op2"})}),
    )
    assert nested == effect((), {"op": effect({"op1", "op2"})})


def test_op_act_examples():
    assert op_act("op", BOTTOM) == BOTTOM
    acted = op_act("op", effect({"op1"}, {"op": effect({"op2"})}))
    assert acted == effect({"op1", "op2"})
    nested = op_act("op", effect((), {"op": effect((), {"op": BOTTOM})}))
    assert nested == effect((), {"op": BOTTOM})


def test_size_counts_entries():
    assert size_i(BOTTOM) == 0
    assert size_i(effect((), {"op": BOTTOM})) == 1
    assert size_i(effect((), {"op": effect((), {"op2": BOTTOM})})) == 2


def test_paths_examples():
    assert paths(BOTTOM) == frozenset()
    assert paths(effect((), {"op": BOTTOM})) == {(), ("op",)}
    assert paths(effect((), {"op": effect((), {"op2": BOTTOM})})) == {
        (),
        ("op",),
        ("op", "op2"),
    }


def test_handlers_must_be_canonical():
    with pytest.raises(ValueError):
        Effect(frozenset(), (("b", BOTTOM), ("a", BOTTOM)))
    with pytest.raises(ValueError):
        Effect(frozenset(), (("a", BOTTOM), ("a", BOTTOM)))


def test_leq_is_a_partial_order():
    rng = random.Random(41)
    annotations = [gen_effect(rng) for _ in range(1000)]
    for e in annotations:
        assert leq(e, e)
    for a, b in zip(annotations, annotations[1:]):
        if leq(a, b) and leq(b, a):
            assert a == b
    for a, b, c in zip(annotations, annotations[1:], annotations[2:]):
        if leq(a, b) and leq(b, c):
            assert leq(a, c)


def test_join_is_least_upper_bound():
    rng = random.Random(42)
    for _ in range(500):
        a, b, c = gen_effect(rng), gen_effect(rng), gen_effect(rng)
        j = join(a, b)
        assert leq(a, j) and leq(b, j)
        if leq(a, c) and leq(b, c):
            assert leq(j, c)


def test_act_size_dichotomy():
    # equal size when the operation is absent, strictly smaller when present
    rng = random.Random(43)
    checked_present = 0
    for _ in range(1000):
        e = gen_effect(rng)
        op = rng.choice(("op1", "op2", "op3"))
        acted = op_act(op, e)
        if e.handler(op) is None:
            assert size_i(acted) == size_i(e)
            assert acted == e
        else:
            checked_present += 1
            assert size_i(acted) < size_i(e)
    assert checked_present > 100


def test_paths_size_coherence():
    # the path count exceeds the entry count by exactly the root, and the
    # dichotomy holds for both measures
    rng = random.Random(44)
    for _ in range(1000):
        e = gen_effect(rng)
        root = 1 if e.handlers else 0
        assert size_paths(e) - root == size_i(e)
        op = rng.choice(("op1", "op2", "op3"))
        acted = op_act(op, e)
        if e.handler(op) is None:
            assert size_paths(acted) == size_paths(e)
        else:
            assert size_paths(acted) < size_paths(e)


def test_enumerated_annotations_are_distinct():
    anns = enumerate_annotations(("op1", "op2"), 1)
    assert len(anns) == len(set(anns)) == 100
