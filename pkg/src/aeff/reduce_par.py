"""Small-step reduction of parallel processes.

Two independent models are provided:

* the *tree* model over ``Process`` terms, with rules

  ====  ====================================================================
  r14   a run-leaf computation takes a sequential step
  r15   a signal is hoisted out of a run-leaf
  r16   a signal left of ``||`` broadcasts, interrupting its right sibling
  r17   symmetric broadcast from the right
  r18   a pending interrupt enters a run-leaf as a computation interrupt
  r19   a pending interrupt distributes over ``||``
  r20   a pending interrupt commutes past a hoisted signal
  ====  ====================================================================

  plus closure under process contexts (both sides of ``||`` and the
  continuations of hoisted signals and pending interrupts), recorded as a
  path prefix on the label;

* the *flat* model over non-empty lists of computations, where one
  computation may step (``flat-run``) or a computation whose head is a
  signal broadcasts it, wrapping every other list entry in the matching
  interrupt (``flat-broadcast``).

No conversion between the two models is offered.  All step functions are
pure; distinct reducts may be explored concurrently.
"""

from __future__ import annotations

from .reduce_seq import RuleLabel, step_seq
from .syntax import (
    Computation,
    Interrupt,
    Par,
    PInterrupt,
    Process,
    PSignal,
    Run,
    Signal,
    Value,
    node,
)


@node
class ProcRuleLabel:
    """Process rule label: rule name, context path, the inner sequential
    label for ``r14``/``flat-run`` steps, and broadcast details."""

    rule: str
    path: tuple[str, ...] = ()
    inner: RuleLabel | None = None
    op: str | None = None
    index: int | None = None
    payload: Value | None = None

    def __str__(self) -> str:
        base = self.rule
        if self.index is not None:
            detail = str(self.index) if self.op is None else f"{self.op}, {self.index}"
            base = f"{base}({detail})"
        if self.inner is not None:
            base = f"{base}[{self.inner}]"
        if self.path:
            base = f"{base}@{'.'.join(self.path)}"
        return base

    def at(self, frame: str) -> "ProcRuleLabel":
        return ProcRuleLabel(
            self.rule, (frame,) + self.path, self.inner, self.op, self.index, self.payload
        )


@node
class FlatProcess:
    """A process as a non-empty ordered list of computations."""

    items: tuple[Computation, ...]

    def __post_init__(self):
        if not self.items:
            raise ValueError("a flat process holds at least one computation")


ProcStep = tuple[ProcRuleLabel, Process]
FlatStep = tuple[ProcRuleLabel, FlatProcess]


def _root_steps(p: Process) -> list[ProcStep]:
    out: list[ProcStep] = []
    if isinstance(p, Run):
        comp = p.comp
        if isinstance(comp, Signal):
            out.append(
                (
                    ProcRuleLabel("r15", op=comp.op, payload=comp.payload),
                    PSignal(comp.op, comp.payload, Run(comp.cont)),
                )
            )
        for lab, n in step_seq(comp):
            out.append((ProcRuleLabel("r14", inner=lab), Run(n)))
        return out
    if isinstance(p, Par):
        if isinstance(p.left, PSignal):
            sig = p.left
            out.append(
                (
                    ProcRuleLabel("r16", op=sig.op, payload=sig.payload),
                    PSignal(
                        sig.op,
                        sig.payload,
                        Par(sig.cont, PInterrupt(sig.op, sig.payload, p.right)),
                    ),
                )
            )
        if isinstance(p.right, PSignal):
            sig = p.right
            out.append(
                (
                    ProcRuleLabel("r17", op=sig.op, payload=sig.payload),
                    PSignal(
                        sig.op,
                        sig.payload,
                        Par(PInterrupt(sig.op, sig.payload, p.left), sig.cont),
                    ),
                )
            )
        return out
    if isinstance(p, PInterrupt):
        inner = p.cont
        if isinstance(inner, Run):
            out.append(
                (
                    ProcRuleLabel("r18", op=p.op, payload=p.payload),
                    Run(Interrupt(p.op, p.payload, inner.comp)),
                )
            )
        elif isinstance(inner, Par):
            out.append(
                (
                    ProcRuleLabel("r19", op=p.op, payload=p.payload),
                    Par(
                        PInterrupt(p.op, p.payload, inner.left),
                        PInterrupt(p.op, p.payload, inner.right),
                    ),
                )
            )
        elif isinstance(inner, PSignal):
            out.append(
                (
                    ProcRuleLabel("r20", op=p.op, payload=p.payload),
                    PSignal(
                        inner.op,
                        inner.payload,
                        PInterrupt(p.op, p.payload, inner.cont),
                    ),
                )
            )
        return out
    return out


def _rebuild_proc(
    chain: list[Process], frames: list[str], inner: Process
) -> Process:
    for parent, frame in zip(reversed(chain), reversed(frames)):
        if frame == "parL":
            inner = Par(inner, parent.right)
        elif frame == "parR":
            inner = Par(parent.left, inner)
        elif frame == "send":
            inner = PSignal(parent.op, parent.payload, inner)
        else:
            inner = PInterrupt(parent.op, parent.payload, inner)
    return inner


_POP = object()


def step_proc(p: Process) -> list[ProcStep]:
    """All one-step reducts of a tree process: at every subprocess
    position, the root rules that apply there, outermost-first and
    left-to-right.  Iterative, since hoisted-signal spines of divergent
    processes grow deep within a modest exploration budget.
    """
    out: list[ProcStep] = []
    frames: list[str] = []
    chain: list[Process] = []
    stack: list = [p]
    while stack:
        item = stack.pop()
        if item is _POP:
            frames.pop()
            chain.pop()
            continue
        if isinstance(item, tuple):
            frame, parent, child = item
            frames.append(frame)
            chain.append(parent)
            stack.append(_POP)
            stack.append(child)
            continue
        proc = item
        for lab, target in _root_steps(proc):
            full = ProcRuleLabel(
                lab.rule, tuple(frames), lab.inner, lab.op, lab.index, lab.payload
            )
            out.append((full, _rebuild_proc(chain, frames, target)))
        if isinstance(proc, Par):
            stack.append(("parR", proc, proc.right))
            stack.append(("parL", proc, proc.left))
        elif isinstance(proc, PSignal):
            stack.append(("send", proc, proc.cont))
        elif isinstance(proc, PInterrupt):
            stack.append(("recv", proc, proc.cont))
    return out


def is_proc_normal(p: Process) -> bool:
    return not step_proc(p)


def step_flat(fp: FlatProcess) -> list[FlatStep]:
    """All one-step reducts of a flat process.

    A broadcast at index ``i`` strips the emitting computation's head
    signal and wraps every other entry in the corresponding interrupt.
    """
    out: list[FlatStep] = []
    items = fp.items
    for i, m in enumerate(items):
        for lab, n in step_seq(m):
            out.append(
                (
                    ProcRuleLabel("flat-run", inner=lab, index=i),
                    FlatProcess(items[:i] + (n,) + items[i + 1 :]),
                )
            )
    for i, m in enumerate(items):
        if isinstance(m, Signal):
            broadcast = tuple(
                m.cont if j == i else Interrupt(m.op, m.payload, other)
                for j, other in enumerate(items)
            )
            out.append(
                (
                    ProcRuleLabel("flat-broadcast", op=m.op, index=i, payload=m.payload),
                    FlatProcess(broadcast),
                )
            )
    return out


def is_flat_normal(fp: FlatProcess) -> bool:
    return not step_flat(fp)


def run_leaves(p: Process) -> list[tuple[tuple[str, ...], Computation]]:
    """Run-leaf computations with their process paths, left to right."""
    out: list[tuple[tuple[str, ...], Computation]] = []

    def go(proc: Process, path: tuple[str, ...]) -> None:
        if isinstance(proc, Run):
            out.append((path, proc.comp))
        elif isinstance(proc, Par):
            go(proc.left, path + ("parL",))
            go(proc.right, path + ("parR",))
        elif isinstance(proc, (PSignal, PInterrupt)):
            slot = "send" if isinstance(proc, PSignal) else "recv"
            go(proc.cont, path + (slot,))
        else:
            raise TypeError(f"not a process: {proc!r}")

    go(p, ())
    return out
