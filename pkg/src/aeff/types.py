"""Value types, shared by the parser, the type checkers, and diagnostics.

A type is *skeletal* when none of its arrows carries an effect annotation
and *annotated* when all of them do; the two layers never mix inside one
type.  ``MetaT`` is an inference-internal placeholder produced for the
undetermined side of a sum injection; user-facing results never contain
one (an unresolved placeholder is reported as an ambiguity instead).
"""

from __future__ import annotations

from typing import Union

from .effects import Effect, pretty_effect
from .syntax import node


@node
class BaseT:
    name: str


@node
class UnitT:
    pass


@node
class PromiseT:
    item: "TypeExpr"


@node
class SumT:
    left: "TypeExpr"
    right: "TypeExpr"


@node
class ArrowT:
    """Function type; ``eff`` is the effect annotation of the codomain
    computation, absent in skeletal types."""

    dom: "TypeExpr"
    cod: "TypeExpr"
    eff: Effect | None = None


@node
class MetaT:
    ident: int


TypeExpr = Union[BaseT, UnitT, PromiseT, SumT, ArrowT, MetaT]

UNIT_T = UnitT()


def is_ground(t: TypeExpr) -> bool:
    """Ground types may appear as operation payloads: base types and
    finite sums/units thereof."""
    if isinstance(t, (BaseT, UnitT)):
        return True
    if isinstance(t, SumT):
        return is_ground(t.left) and is_ground(t.right)
    return False


def contains_meta(t: TypeExpr) -> bool:
    if isinstance(t, MetaT):
        return True
    if isinstance(t, PromiseT):
        return contains_meta(t.item)
    if isinstance(t, SumT):
        return contains_meta(t.left) or contains_meta(t.right)
    if isinstance(t, ArrowT):
        return contains_meta(t.dom) or contains_meta(t.cod)
    return False


def arrow_layers(t: TypeExpr) -> set[bool]:
    """Set of ``eff is not None`` flags over all arrows in ``t``."""
    if isinstance(t, ArrowT):
        return {t.eff is not None} | arrow_layers(t.dom) | arrow_layers(t.cod)
    if isinstance(t, PromiseT):
        return arrow_layers(t.item)
    if isinstance(t, SumT):
        return arrow_layers(t.left) | arrow_layers(t.right)
    return set()


def is_skeletal(t: TypeExpr) -> bool:
    return True not in arrow_layers(t)


def is_annotated(t: TypeExpr) -> bool:
    return False not in arrow_layers(t)


def pretty_type(t: TypeExpr) -> str:
    """Render a type in concrete syntax; reparses to the same type."""
    if isinstance(t, BaseT):
        return t.name
    if isinstance(t, UnitT):
        return "unit"
    if isinstance(t, MetaT):
        return f"?{t.ident}"
    if isinstance(t, PromiseT):
        return f"promise {_atom(t.item)}"
    if isinstance(t, SumT):
        return f"{_summand(t.left)} + {_summand(t.right)}"
    if isinstance(t, ArrowT):
        dom = _summand(t.dom)
        cod = _atom(t.cod) if isinstance(t.cod, ArrowT) else pretty_type(t.cod)
        if t.eff is None:
            return f"{dom} -> {cod}"
        return f"{dom} -> {cod} ! {pretty_effect(t.eff)}"
    raise TypeError(f"not a type: {t!r}")


def _summand(t: TypeExpr) -> str:
    if isinstance(t, (ArrowT, SumT)):
        return f"({pretty_type(t)})"
    return pretty_type(t)


def _atom(t: TypeExpr) -> str:
    if isinstance(t, (BaseT, UnitT, MetaT)):
        return pretty_type(t)
    return f"({pretty_type(t)})"
