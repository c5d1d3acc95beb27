"""Abstract syntax of the asynchronous-effects core calculus.

Terms come in three mutually defined sorts: values, sequential
computations, and parallel processes.  Binding is positional (de Bruijn
indices): ``Var(0)`` is the innermost binder, and every binding
constructor carries a name hint that is used only for printing and is
ignored by equality.  Consequently structural equality *is*
alpha-equivalence, which is what the reduction-graph explorer relies on
for node deduplication.

All nodes are immutable after construction and safe to share between
concurrent explorer workers.
"""

from __future__ import annotations

from dataclasses import dataclass, field, fields
from enum import Enum
from operator import attrgetter
from typing import Callable, Mapping, Union

from .errors import IllScopedTermError


def node(cls):
    """Slotted dataclass with a cached structural hash.

    Terms are treated as immutable after construction (nothing in this
    package mutates them; doing so would corrupt cached hashes and graph
    interning).  Exploration rebuilds and re-hashes spines constantly, so
    nodes are slotted for footprint and the hash is computed once: that
    keeps graph interning linear instead of quadratic in term depth.
    """
    cls.__annotations__["_hash"] = "int | None"
    cls._hash = field(default=None, init=False, repr=False, compare=False)
    cls = dataclass(eq=False, slots=True)(cls)
    names = tuple(f.name for f in fields(cls) if f.compare)

    if not names:
        seed = hash(cls.__qualname__)

        def __hash__(self, _seed=seed):
            return _seed

        def __eq__(self, other, _cls=cls):
            if other.__class__ is _cls:
                return True
            return NotImplemented

    else:
        get = attrgetter(*names)
        if len(names) == 1:

            def __hash__(self, _cls=cls, _get=get):
                h = self._hash
                if h is None:
                    h = hash((_cls, _get(self)))
                    self._hash = h
                return h

        else:

            def __hash__(self, _cls=cls, _get=get):
                h = self._hash
                if h is None:
                    h = hash((_cls,) + _get(self))
                    self._hash = h
                return h

        def __eq__(self, other, _cls=cls, _get=get):
            if self is other:
                return True
            if other.__class__ is not _cls:
                return NotImplemented
            if hash(self) != hash(other):
                return False
            return _get(self) == _get(other)

    cls.__hash__ = __hash__
    cls.__eq__ = __eq__
    return cls


class HandlerKind(str, Enum):
    """Semantics variant of an installed interrupt handler."""

    PLAIN = "plain"
    LEGACY = "legacy-reinstall"
    SUM = "sum-reinstall"


class Value:
    """Base class of value terms."""

    __slots__ = ()


class Computation:
    """Base class of sequential computation terms."""

    __slots__ = ()


class Process:
    """Base class of parallel process terms."""

    __slots__ = ()


@node
class Var(Value):
    ix: int


@node
class Fun(Value):
    """Function abstraction; ``ann`` is the binder's type, optional in
    skeletal settings."""

    ann: object  # TypeExpr | None (kept untyped here to avoid an import cycle)
    body: Computation
    hint: str = field(default="x", compare=False, repr=False)


@node
class Promise(Value):
    """A fulfilled promise carrying its payload value."""

    value: Value


@node
class Unit(Value):
    pass


@node
class Inl(Value):
    value: Value


@node
class Inr(Value):
    value: Value


@node
class Return(Computation):
    value: Value


@node
class Let(Computation):
    """``let x = bound in body``; ``body`` binds one variable."""

    bound: Computation
    body: Computation
    hint: str = field(default="x", compare=False, repr=False)


@node
class App(Computation):
    fn: Value
    arg: Value


@node
class Signal(Computation):
    """Outgoing signal: non-blocking notification propagating outwards."""

    op: str
    payload: Value
    cont: Computation


@node
class Interrupt(Computation):
    """Incoming interrupt propagating inwards, triggering matching handlers."""

    op: str
    payload: Value
    cont: Computation


@node
class Handler(Computation):
    """Installed interrupt handler ``promise (op x -> body) as p in cont``.

    ``body`` binds the interrupt payload ``x``; for the legacy-reinstall
    variant it additionally binds the reinstall function ``r`` (so the
    payload is ``Var(1)`` and the reinstall variable ``Var(0)``).
    ``cont`` binds the promise variable ``p``.
    """

    op: str
    body: Computation
    cont: Computation
    kind: HandlerKind = HandlerKind.PLAIN
    body_hint: str = field(default="x", compare=False, repr=False)
    reinstall_hint: str = field(default="r", compare=False, repr=False)
    cont_hint: str = field(default="p", compare=False, repr=False)


@node
class Await(Computation):
    """Block until ``promise`` is fulfilled; ``body`` binds the result.

    Awaiting is not an evaluation position, so the body never reduces
    until the promise value arrives.
    """

    promise: Value
    body: Computation
    hint: str = field(default="x", compare=False, repr=False)


@node
class Match(Computation):
    """Case analysis on a sum value; each branch binds one variable."""

    scrutinee: Value
    left: Computation
    right: Computation
    left_hint: str = field(default="x", compare=False, repr=False)
    right_hint: str = field(default="y", compare=False, repr=False)


@node
class Run(Process):
    comp: Computation


@node
class Par(Process):
    left: Process
    right: Process


@node
class PSignal(Process):
    """A process that has issued a signal and proceeds as ``cont``."""

    op: str
    payload: Value
    cont: Process


@node
class PInterrupt(Process):
    """A process that has received an interrupt still propagating inwards."""

    op: str
    payload: Value
    cont: Process


Term = Union[Value, Computation, Process]

UNIT = Unit()


class Renaming:
    """Total, type-respecting map from source-context to target-context
    variables.

    Backed either by a dict over indices (partial; unmapped variables are
    ill-scoped) or by a plain function (total, e.g. weakening).
    """

    def __init__(self, fn: Callable[[int], "int | None"]):
        self._fn = fn

    def __call__(self, ix: int) -> int:
        out = self._fn(ix)
        if out is None:
            raise IllScopedTermError(f"renaming does not cover variable #{ix}")
        return out

    @classmethod
    def from_dict(cls, mapping: Mapping[int, int]) -> "Renaming":
        return cls(mapping.get)

    @classmethod
    def identity(cls) -> "Renaming":
        return cls(lambda ix: ix)

    @classmethod
    def weakening(cls, by: int = 1) -> "Renaming":
        """``wk``: embed a context into the same context extended by ``by``
        fresh variables."""
        return cls(lambda ix: ix + by)

    def lifted(self) -> "Renaming":
        """``lift``: push the renaming under one binder, mapping the fresh
        variable to itself."""

        def fn(ix: int):
            if ix == 0:
                return 0
            inner = self._fn(ix - 1)
            return None if inner is None else inner + 1

        return Renaming(fn)

    def then(self, outer: "Renaming") -> "Renaming":
        """Composition: apply ``self`` first, then ``outer``."""

        def fn(ix: int):
            mid = self._fn(ix)
            return None if mid is None else outer._fn(mid)

        return Renaming(fn)


def binder_arity(t: Term, slot: str) -> int:
    """Number of variables bound by the given child slot of ``t``."""
    if isinstance(t, Handler) and slot == "body":
        return 2 if t.kind is HandlerKind.LEGACY else 1
    return 1


def _map_free(t: Term, on_var: Callable[[int, int], Term], depth: int = 0) -> Term:
    """Rebuild ``t``, replacing each variable via ``on_var(outer_ix, depth)``.

    ``outer_ix`` is the index relative to the term's root context; bound
    variables (index below ``depth``) are left untouched.  ``on_var`` must
    return a Value already shifted for ``depth``.
    """
    if isinstance(t, Var):
        if t.ix < depth:
            return t
        return on_var(t.ix - depth, depth)
    if isinstance(t, Fun):
        return Fun(t.ann, _map_free(t.body, on_var, depth + 1), hint=t.hint)
    if isinstance(t, Promise):
        return Promise(_map_free(t.value, on_var, depth))
    if isinstance(t, Unit):
        return t
    if isinstance(t, Inl):
        return Inl(_map_free(t.value, on_var, depth))
    if isinstance(t, Inr):
        return Inr(_map_free(t.value, on_var, depth))
    if isinstance(t, Return):
        return Return(_map_free(t.value, on_var, depth))
    if isinstance(t, Let):
        return Let(
            _map_free(t.bound, on_var, depth),
            _map_free(t.body, on_var, depth + 1),
            hint=t.hint,
        )
    if isinstance(t, App):
        return App(_map_free(t.fn, on_var, depth), _map_free(t.arg, on_var, depth))
    if isinstance(t, Signal):
        return Signal(
            t.op, _map_free(t.payload, on_var, depth), _map_free(t.cont, on_var, depth)
        )
    if isinstance(t, Interrupt):
        return Interrupt(
            t.op, _map_free(t.payload, on_var, depth), _map_free(t.cont, on_var, depth)
        )
    if isinstance(t, Handler):
        body_depth = depth + binder_arity(t, "body")
        return Handler(
            t.op,
            _map_free(t.body, on_var, body_depth),
            _map_free(t.cont, on_var, depth + 1),
            t.kind,
            body_hint=t.body_hint,
            reinstall_hint=t.reinstall_hint,
            cont_hint=t.cont_hint,
        )
    if isinstance(t, Await):
        return Await(
            _map_free(t.promise, on_var, depth),
            _map_free(t.body, on_var, depth + 1),
            hint=t.hint,
        )
    if isinstance(t, Match):
        return Match(
            _map_free(t.scrutinee, on_var, depth),
            _map_free(t.left, on_var, depth + 1),
            _map_free(t.right, on_var, depth + 1),
            left_hint=t.left_hint,
            right_hint=t.right_hint,
        )
    if isinstance(t, Run):
        return Run(_map_free(t.comp, on_var, depth))
    if isinstance(t, Par):
        return Par(_map_free(t.left, on_var, depth), _map_free(t.right, on_var, depth))
    if isinstance(t, PSignal):
        return PSignal(
            t.op, _map_free(t.payload, on_var, depth), _map_free(t.cont, on_var, depth)
        )
    if isinstance(t, PInterrupt):
        return PInterrupt(
            t.op, _map_free(t.payload, on_var, depth), _map_free(t.cont, on_var, depth)
        )
    raise TypeError(f"not a term: {t!r}")


def rename(t: Term, ren: Renaming) -> Term:
    """Apply a renaming to all free variables of ``t``, lifting under
    binders so bound occurrences are untouched."""
    return _map_free(t, lambda ix, depth: Var(ren(ix) + depth))


def shift(t: Term, by: int, cutoff: int = 0) -> Term:
    """Shift free variables with index >= ``cutoff`` by ``by``.

    A negative ``by`` strengthens the context and raises if a variable
    would escape it.
    """

    def on_var(ix: int, depth: int) -> Term:
        if ix < cutoff:
            return Var(ix + depth)
        out = ix + by
        if out < cutoff:
            raise IllScopedTermError(f"variable #{ix} escapes strengthened context")
        return Var(out + depth)

    return _map_free(t, on_var)


def subst(t: Term, mapping: Mapping[int, Value]) -> Term:
    """Simultaneous capture-avoiding substitution.

    Indices in ``mapping`` are replaced by their values (expressed in the
    target context) and their context slots are consumed; remaining free
    variables are kept, reindexed into the smaller context.  With
    ``{0: V}`` this is exactly the ``M[V/x]`` instantiation used by the
    reduction rules.
    """
    if not mapping:
        return t
    dom = sorted(mapping)

    def reindex(ix: int) -> int:
        drop = 0
        for d in dom:
            if d < ix:
                drop += 1
            else:
                break
        return ix - drop

    def on_var(ix: int, depth: int) -> Term:
        v = mapping.get(ix)
        if v is not None:
            return shift(v, depth) if depth else v
        return Var(reindex(ix) + depth)

    return _map_free(t, on_var)


def alpha_eq(a: Term, b: Term) -> bool:
    """Alpha-equivalence; with positional binders this is plain structural
    equality (name hints do not compare)."""
    return a == b


def uses_var(t: Term, ix: int) -> bool:
    """True iff the free variable with index ``ix`` occurs in ``t``."""
    found = False

    def on_var(i: int, depth: int) -> Term:
        nonlocal found
        if i == ix:
            found = True
        return Var(i + depth)

    _map_free(t, on_var)
    return found


def max_free_index(t: Term) -> int:
    """Largest free index in ``t``, or -1 if ``t`` is closed."""
    top = -1

    def on_var(i: int, depth: int) -> Term:
        nonlocal top
        top = max(top, i)
        return Var(i + depth)

    _map_free(t, on_var)
    return top


def is_closed(t: Term) -> bool:
    return max_free_index(t) < 0
