"""Effect annotations and their lattice structure.

An annotation is a pair ``(o, iota)``: ``o`` is the finite set of signal
names a computation may emit, and ``iota`` is a finite nested partial map
describing which interrupt handlers are installed and what effects their
handler code may in turn have.  Only finite (inductively built) ``iota``
are representable; annotations that would need an infinitely deep map
(as required by legacy reinstallable handlers) cannot be written down.

Entries of ``iota`` are kept sorted by operation name so that equality is
structural and printing is canonical.  All values here are immutable and
every operation is pure.
"""

from __future__ import annotations

from typing import Iterable, Mapping, Tuple

from .syntax import node

Path = Tuple[str, ...]


@node
class Effect:
    """One annotation ``(o, iota)``.

    ``handlers`` is the canonical form of ``iota``: pairs sorted by
    operation name, each mapping to the nested annotation of the handler
    code installed for that operation.  Missing entries are bottom.
    """

    ops: frozenset[str]
    handlers: tuple[tuple[str, "Effect"], ...]

    def __post_init__(self):
        names = [op for op, _ in self.handlers]
        if names != sorted(names) or len(set(names)) != len(names):
            raise ValueError("handler entries must be sorted and unique")

    def handler(self, op: str) -> "Effect | None":
        for name, eff in self.handlers:
            if name == op:
                return eff
        return None

    def handler_ops(self) -> tuple[str, ...]:
        return tuple(op for op, _ in self.handlers)


def effect(
    ops: Iterable[str] = (), handlers: Mapping[str, Effect] | None = None
) -> Effect:
    """Build an annotation from unsorted pieces."""
    items = tuple(sorted((handlers or {}).items()))
    return Effect(frozenset(ops), items)


BOTTOM = effect()


def leq(a: Effect, b: Effect) -> bool:
    """Pointwise order: ``a.ops`` a subset of ``b.ops`` and every handler
    entry of ``a`` defined in ``b`` at a pointwise-larger annotation."""
    if not a.ops <= b.ops:
        return False
    for op, child in a.handlers:
        other = b.handler(op)
        if other is None or not leq(child, other):
            return False
    return True


def join(a: Effect, b: Effect) -> Effect:
    """Least upper bound: union of signal sets, handler maps merged
    pointwise, recursing where both sides define an operation."""
    merged: dict[str, Effect] = dict(a.handlers)
    for op, child in b.handlers:
        mine = merged.get(op)
        merged[op] = child if mine is None else join(mine, child)
    return Effect(a.ops | b.ops, tuple(sorted(merged.items())))


def op_act(op: str, e: Effect) -> Effect:
    """Action of an interrupt on an annotation.

    If a handler entry for ``op`` exists, its annotation is released: the
    entry is removed and its contents joined into the remainder.
    Otherwise the annotation is unchanged.
    """
    triggered = e.handler(op)
    if triggered is None:
        return e
    remainder = Effect(e.ops, tuple((n, c) for n, c in e.handlers if n != op))
    return join(remainder, triggered)


def size_i(e: Effect) -> int:
    """Size of the handler map: total number of defined entries,
    recursively.  Differs from ``len(paths(e))`` by exactly one when the
    map is non-empty (the root is not an entry)."""
    return sum(1 + size_i(child) for _, child in e.handlers)


def paths(e: Effect) -> frozenset[Path]:
    """Addresses of all defined entries, plus the empty path when the map
    is non-empty.  Kept as an independent cross-check of ``size_i``."""
    out: set[Path] = set()
    for op, child in e.handlers:
        out.add((op,))
        for p in paths(child):
            if p:
                out.add((op,) + p)
    if e.handlers:
        out.add(())
    return frozenset(out)


def size_paths(e: Effect) -> int:
    return len(paths(e))


def pretty_ops(ops: frozenset[str]) -> str:
    return "{" + ", ".join(sorted(ops)) + "}"


def pretty_handlers(handlers: tuple[tuple[str, Effect], ...]) -> str:
    inner = ", ".join(f"{op} -> {pretty_effect(eff)}" for op, eff in handlers)
    return "{" + inner + "}"


def pretty_effect(e: Effect) -> str:
    return f"({pretty_ops(e.ops)}, {pretty_handlers(e.handlers)})"
