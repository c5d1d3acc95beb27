"""Non-deterministic small-step reduction of sequential computations.

``step_seq`` returns the complete, finite set of one-step reducts of a
computation, each labelled with a stable rule name:

===========  =============================================================
r1           beta: ``(fun x -> M) V``
r2           sequencing a returned value
r3/r4/r5     signals, handlers, and awaits commute out of ``let``
r6           signals commute out of interrupt handlers
r7           an interrupt reaching ``return`` is discarded
r8           interrupts move past signals
r9           an interrupt triggers a matching plain handler
r9-legacy    matching legacy handler; rebinds the reinstall function
r9-sum       matching sum-encoded handler; reinstalls on ``inr ()``
r10          interrupts move past non-matching handlers
r11          interrupts enter the (blocked) body of an await
r12          a fulfilled promise unblocks an await
match-inl/r  sum eliminations
===========  =============================================================

Reduction also happens in evaluation positions (the bound computation of
a ``let`` and the continuations of signals, interrupts, and handlers);
such reducts carry the inner step's label prefixed with the path of
frames leading to it.  Await bodies, match branches, function bodies, and
handler bodies are not evaluation positions.

Terms may be open; no rule touches free variables.  All functions are
pure and safe to call concurrently.
"""

from __future__ import annotations

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
    Promise,
    Return,
    Signal,
    Var,
    node,
    shift,
    subst,
    uses_var,
)
from .types import UnitT

_VAR0 = Var(0)

Step = tuple["RuleLabel", Computation]


@node
class RuleLabel:
    """A rule name plus the evaluation-context path it fired under."""

    rule: str
    path: tuple[str, ...] = ()

    def __str__(self) -> str:
        if not self.path:
            return self.rule
        return f"{self.rule}@{'.'.join(self.path)}"

    def at(self, frame: str) -> "RuleLabel":
        return RuleLabel(self.rule, (frame,) + self.path)


def _root_step(m: Computation) -> Step | None:
    """The at-most-one redex at the root of ``m``."""
    cls = m.__class__
    if cls is Let:
        bound = m.bound
        bcls = bound.__class__
        if bcls is Return:
            return RuleLabel("r2"), subst(m.body, {0: bound.value})
        if bcls is Signal:
            return RuleLabel("r3"), Signal(
                bound.op, bound.payload, Let(bound.cont, m.body, hint=m.hint)
            )
        if bcls is Handler:
            return RuleLabel("r4"), Handler(
                bound.op,
                bound.body,
                Let(bound.cont, shift(m.body, 1, cutoff=1), hint=m.hint),
                bound.kind,
                body_hint=bound.body_hint,
                reinstall_hint=bound.reinstall_hint,
                cont_hint=bound.cont_hint,
            )
        if bcls is Await:
            return RuleLabel("r5"), Await(
                bound.promise,
                Let(bound.body, shift(m.body, 1, cutoff=1), hint=m.hint),
                hint=bound.hint,
            )
        return None

    if cls is Interrupt:
        inner = m.cont
        icls = inner.__class__
        if icls is Return:
            return RuleLabel("r7"), inner
        if icls is Signal:
            return RuleLabel("r8"), Signal(
                inner.op, inner.payload, Interrupt(m.op, m.payload, inner.cont)
            )
        if icls is Handler:
            if inner.op != m.op:
                return RuleLabel("r10"), Handler(
                    inner.op,
                    inner.body,
                    Interrupt(m.op, shift(m.payload, 1), inner.cont),
                    inner.kind,
                    body_hint=inner.body_hint,
                    reinstall_hint=inner.reinstall_hint,
                    cont_hint=inner.cont_hint,
                )
            return _trigger(m.op, m.payload, inner)
        if icls is Await:
            return RuleLabel("r11"), Await(
                inner.promise,
                Interrupt(m.op, shift(m.payload, 1), inner.body),
                hint=inner.hint,
            )
        return None

    if cls is Handler:
        sig = m.cont
        if sig.__class__ is Signal:
            # the hoisted payload must not capture the promise variable; on
            # well-typed terms it never does (payloads are ground-typed)
            if not uses_var(sig.payload, 0):
                return RuleLabel("r6"), Signal(
                    sig.op,
                    shift(sig.payload, -1),
                    Handler(
                        m.op,
                        m.body,
                        sig.cont,
                        m.kind,
                        body_hint=m.body_hint,
                        reinstall_hint=m.reinstall_hint,
                        cont_hint=m.cont_hint,
                    ),
                )
        return None

    if cls is App:
        if m.fn.__class__ is Fun:
            return RuleLabel("r1"), subst(m.fn.body, {0: m.arg})
        return None

    if cls is Await:
        if m.promise.__class__ is Promise:
            return RuleLabel("r12"), subst(m.body, {0: m.promise.value})
        return None

    if cls is Match:
        scls = m.scrutinee.__class__
        if scls is Inl:
            return RuleLabel("match-inl"), subst(m.left, {0: m.scrutinee.value})
        if scls is Inr:
            return RuleLabel("match-inr"), subst(m.right, {0: m.scrutinee.value})
        return None

    return None


def _trigger(op: str, payload, h: Handler) -> Step:
    """An interrupt meets its matching handler: the three r9 variants."""
    tail = Interrupt(op, shift(payload, 1), h.cont)
    if h.kind is HandlerKind.PLAIN:
        return RuleLabel("r9"), Let(
            subst(h.body, {0: payload}), tail, hint=h.cont_hint
        )
    if h.kind is HandlerKind.SUM:
        reinstalled = Handler(
            h.op,
            shift(h.body, 2, cutoff=1),
            Return(_VAR0),
            HandlerKind.SUM,
            body_hint=h.body_hint,
            cont_hint="q",
        )
        dispatch = Match(
            _VAR0,
            Return(_VAR0),
            reinstalled,
            left_hint="z",
            right_hint="w",
        )
        handled = Let(subst(h.body, {0: payload}), dispatch, hint="y")
        return RuleLabel("r9-sum"), Let(handled, tail, hint=h.cont_hint)
    # legacy: the handler body sees `r`, a thunk reinstalling the handler
    reinstaller = Fun(
        UnitT(),
        Handler(
            h.op,
            shift(h.body, 1, cutoff=2),
            Return(_VAR0),
            HandlerKind.LEGACY,
            body_hint=h.body_hint,
            reinstall_hint=h.reinstall_hint,
            cont_hint="q",
        ),
        hint="_",
    )
    bound = subst(h.body, {0: reinstaller, 1: payload})
    return RuleLabel("r9-legacy"), Let(bound, tail, hint=h.cont_hint)


# evaluation positions: frame name and hole slot per constructor
_EVAL_POS = {
    Let: ("let", "bound"),
    Signal: ("send", "cont"),
    Interrupt: ("recv", "cont"),
    Handler: ("promise", "cont"),
}


def _rebuild(chain: list[Computation], inner: Computation) -> Computation:
    """Plug ``inner`` back under the recorded evaluation frames."""
    for f in reversed(chain):
        if isinstance(f, Let):
            inner = Let(inner, f.body, hint=f.hint)
        elif isinstance(f, Signal):
            inner = Signal(f.op, f.payload, inner)
        elif isinstance(f, Interrupt):
            inner = Interrupt(f.op, f.payload, inner)
        else:
            inner = Handler(
                f.op,
                f.body,
                inner,
                f.kind,
                body_hint=f.body_hint,
                reinstall_hint=f.reinstall_hint,
                cont_hint=f.cont_hint,
            )
    return inner


def step_seq(m: Computation) -> list[Step]:
    """All one-step reducts of ``m``: at each position along the spine of
    evaluation frames, the at-most-one root rule that applies there.
    Outermost redexes come first.  Iterative, since divergent terms grow
    spines thousands of frames deep within a modest exploration budget.
    """
    out: list[Step] = []
    chain: list[Computation] = []
    frames: list[str] = []
    cur = m
    while True:
        root = _root_step(cur)
        if root is not None:
            lab, target = root
            out.append((RuleLabel(lab.rule, tuple(frames)), _rebuild(chain, target)))
        pos = _EVAL_POS.get(cur.__class__)
        if pos is None:
            return out
        frames.append(pos[0])
        chain.append(cur)
        cur = getattr(cur, pos[1])


def is_normal(m: Computation) -> bool:
    """No rule applies, i.e. ``step_seq`` is empty."""
    return not step_seq(m)


def leftmost_step(m: Computation) -> Step | None:
    """Deterministic strategy: the first reduct in ``step_seq`` order."""
    steps = step_seq(m)
    return steps[0] if steps else None
