"""Quantities used in the termination arguments.

* Continuations: the sequencing/interrupt frame stacks computations
  execute under, with application ``@`` and the frame counts ``|K|`` and
  ``|K|_down``.  They are first-class here (unlike evaluation contexts in
  the reducer) because several verified properties quantify over them.
* ``max_signals``: the most top-level signals any normal form of a
  computation exposes, i.e. how many signals it can still emit.
* Parallel shapes: processes with their run-leaves erased, together with
  the shape-level reduction relation and its longest-run measure
  ``max_sh``.
* ``proc_measures`` / ``flat_measures``: the lexicographic tuples driving
  the audit of process reduction (annotation size, pending signals,
  shape distance, run steps; the flat model drops the shape component).

``max_signals`` and the run-step components require a strong-
normalisation verdict first; they fail loudly on divergent input rather
than loop.  Measure computations share module-level caches: concurrent
readers are fine, results are immutable once written.
"""

from __future__ import annotations

from dataclasses import dataclass

from .effects import Effect, size_i
from .errors import ContinuationArityError, MeasureUndefinedError
from .explorer import DEFAULT_BUDGET, SN, call_with_deep_stack, explore
from .reduce_par import FlatProcess, run_leaves
from .reduce_seq import RuleLabel
from .surface import pretty
from .syntax import (
    Await,
    Computation,
    Interrupt,
    Let,
    Match,
    Par,
    PInterrupt,
    Process,
    PSignal,
    Run,
    Signal,
    Value,
    node,
)
from .typecheck import Signature, infer_effects

# ---------------------------------------------------------------------------
# Continuations


@node
class SeqFrame:
    """``K  o  (x)N``: run the hole, then ``N`` with its value."""

    body: Computation
    hint: str = "x"


@node
class InterruptFrame:
    """``K o recv op V``: the environment has an interrupt ready to
    propagate into the hole."""

    op: str
    payload: Value


@node
class AwaitCap:
    """Innermost awaiting frame; applied to a value ``V`` it forms
    ``await V as x in body``."""

    body: Computation
    hint: str = "x"


@node
class SumCap:
    """Innermost matching frame; applied to a value it forms a match."""

    left: Computation
    right: Computation
    left_hint: str = "x"
    right_hint: str = "y"


Frame = SeqFrame | InterruptFrame
Cap = AwaitCap | SumCap


@node
class Continuation:
    """A stack of frames over the identity, outermost first, optionally
    capped at the inner end (at most one cap, used exactly once)."""

    frames: tuple[Frame, ...] = ()
    cap: Cap | None = None

    @classmethod
    def identity(cls) -> "Continuation":
        return cls()

    def then_seq(self, body: Computation, hint: str = "x") -> "Continuation":
        self._no_cap()
        return Continuation(self.frames + (SeqFrame(body, hint),), None)

    def then_interrupt(self, op: str, payload: Value) -> "Continuation":
        self._no_cap()
        return Continuation(self.frames + (InterruptFrame(op, payload),), None)

    def with_await_cap(self, body: Computation, hint: str = "x") -> "Continuation":
        self._no_cap()
        return Continuation(self.frames, AwaitCap(body, hint))

    def with_sum_cap(
        self, left: Computation, right: Computation, left_hint="x", right_hint="y"
    ) -> "Continuation":
        self._no_cap()
        return Continuation(self.frames, SumCap(left, right, left_hint, right_hint))

    def _no_cap(self):
        if self.cap is not None:
            raise ContinuationArityError("continuation already capped")


def apply_cont(k: Continuation, arg: Computation | Value) -> Computation:
    """Application ``K @ arg``: plug the argument under the innermost
    frame and wrap outwards.  Capped continuations take a value, others a
    computation."""
    if k.cap is not None:
        if not isinstance(arg, Value):
            raise ContinuationArityError("a capped continuation plugs a value")
        if isinstance(k.cap, AwaitCap):
            term: Computation = Await(arg, k.cap.body, hint=k.cap.hint)
        else:
            term = Match(
                arg,
                k.cap.left,
                k.cap.right,
                left_hint=k.cap.left_hint,
                right_hint=k.cap.right_hint,
            )
    else:
        if not isinstance(arg, Computation):
            raise ContinuationArityError("an uncapped continuation plugs a computation")
        term = arg
    for frame in reversed(k.frames):
        if isinstance(frame, SeqFrame):
            term = Let(term, frame.body, hint=frame.hint)
        else:
            term = Interrupt(frame.op, frame.payload, term)
    return term


def cont_len(k: Continuation) -> int:
    """Number of (non-cap) frame compositions."""
    return len(k.frames)


def cont_interrupts(k: Continuation) -> int:
    """Number of interrupt frames, ``|K|_down``."""
    return sum(1 for f in k.frames if isinstance(f, InterruptFrame))


# ---------------------------------------------------------------------------
# Sequential summaries (shared cache)


@dataclass(frozen=True)
class SeqSummary:
    sn: bool
    budget_used: int
    max_steps: int = 0
    max_signals: int = 0


_seq_cache: dict[Computation, SeqSummary] = {}
_effect_cache: dict[tuple, Effect] = {}
_shape_cache: dict["ParallelShape", int] = {}


def clear_measure_caches() -> None:
    _seq_cache.clear()
    _effect_cache.clear()
    _shape_cache.clear()


def signal_spine(m: Computation) -> int:
    """Length of the outermost contiguous chain of signals."""
    n = 0
    while isinstance(m, Signal):
        n += 1
        m = m.cont
    return n


def _seq_summary(m: Computation, budget: int) -> SeqSummary:
    cached = _seq_cache.get(m)
    if cached is not None and (cached.sn or cached.budget_used >= budget):
        return cached
    graph, verdict = explore(m, budget)
    if isinstance(verdict, SN):
        spine = max(signal_spine(nf) for nf in verdict.normal_forms)
        summary = SeqSummary(True, budget, verdict.max_steps, spine)
    else:
        summary = SeqSummary(False, budget)
    _seq_cache[m] = summary
    return summary


def _require_sn(m: Computation, budget: int, where: str = "") -> SeqSummary:
    summary = _seq_summary(m, budget)
    if not summary.sn:
        suffix = f" ({where})" if where else ""
        raise MeasureUndefinedError(
            f"measure undefined: not strongly normalising within budget "
            f"{budget}{suffix}: {pretty(m)[:200]}"
        )
    return summary


def max_signals(m: Computation, budget: int = DEFAULT_BUDGET) -> int:
    """Maximum number of top-level signals over all normal forms of ``m``,
    i.e. the most signals ``m`` can emit while it reduces."""
    return _require_sn(m, budget).max_signals


def max_steps_of(m: Computation, budget: int = DEFAULT_BUDGET) -> int:
    """Longest reduction sequence of a strongly normalising computation."""
    return _require_sn(m, budget).max_steps


def leaf_effect(sig: Signature, m: Computation) -> Effect:
    """Inferred effect annotation of a closed leaf computation, cached.

    Unresolved injection placeholders in the value type are tolerated:
    the annotation is the same under every way of resolving them.
    """
    key = (tuple(sorted(sig.items())), m)
    got = _effect_cache.get(key)
    if got is None:
        _, got = infer_effects(sig, (), m, allow_ambiguous=True)
        _effect_cache[key] = got
    return got


# ---------------------------------------------------------------------------
# Parallel shapes


@node
class RunLeaf:
    pass


@node
class ParShape:
    left: "ParallelShape"
    right: "ParallelShape"


@node
class Down:
    inner: "ParallelShape"


@node
class Up:
    inner: "ParallelShape"


ParallelShape = RunLeaf | ParShape | Down | Up

_RUN = RunLeaf()


def shape_of(p: Process) -> ParallelShape:
    """Erase run-leaf computations, keeping the parallel structure."""
    if isinstance(p, Run):
        return _RUN
    if isinstance(p, Par):
        return ParShape(shape_of(p.left), shape_of(p.right))
    if isinstance(p, PSignal):
        return Up(shape_of(p.cont))
    if isinstance(p, PInterrupt):
        return Down(shape_of(p.cont))
    raise TypeError(f"not a process: {p!r}")


def _shape_root(s: ParallelShape) -> list[tuple[RuleLabel, ParallelShape]]:
    out: list[tuple[RuleLabel, ParallelShape]] = []
    if isinstance(s, ParShape):
        if isinstance(s.left, Up):
            out.append(
                (RuleLabel("sh16"), Up(ParShape(s.left.inner, Down(s.right))))
            )
        if isinstance(s.right, Up):
            out.append(
                (RuleLabel("sh17"), Up(ParShape(Down(s.left), s.right.inner)))
            )
    elif isinstance(s, Down):
        inner = s.inner
        if isinstance(inner, RunLeaf):
            out.append((RuleLabel("sh18"), inner))
        elif isinstance(inner, ParShape):
            out.append(
                (RuleLabel("sh19"), ParShape(Down(inner.left), Down(inner.right)))
            )
        elif isinstance(inner, Up):
            out.append((RuleLabel("sh20"), Up(Down(inner.inner))))
    return out


def step_shape(s: ParallelShape) -> list[tuple[RuleLabel, ParallelShape]]:
    """Shape-level restriction of the process rules, closed under shape
    contexts."""
    out = _shape_root(s)
    if isinstance(s, ParShape):
        for lab, t in step_shape(s.left):
            out.append((lab.at("parL"), ParShape(t, s.right)))
        for lab, t in step_shape(s.right):
            out.append((lab.at("parR"), ParShape(s.left, t)))
    elif isinstance(s, Down):
        for lab, t in step_shape(s.inner):
            out.append((lab.at("recv"), Down(t)))
    elif isinstance(s, Up):
        for lab, t in step_shape(s.inner):
            out.append((lab.at("send"), Up(t)))
    return out


def max_sh(s: ParallelShape, budget: int = DEFAULT_BUDGET) -> int:
    """Longest shape-reduction sequence (shape reduction always
    terminates; the budget is a guard, not a tuning knob)."""
    got = _shape_cache.get(s)
    if got is not None:
        return got
    graph, verdict = explore(s, budget, step=step_shape)
    if not isinstance(verdict, SN):
        raise MeasureUndefinedError("shape reduction did not quiesce in budget")
    _shape_cache[s] = verdict.max_steps
    return verdict.max_steps


# ---------------------------------------------------------------------------
# Process measure tuples


@dataclass(frozen=True)
class LeafMeasures:
    path: str
    size_i: int
    max_up: int
    max_run: int


@dataclass(frozen=True)
class ProcMeasures:
    size_i: int
    max_up: int
    max_sh: int
    max_run: int
    leaves: tuple[LeafMeasures, ...]

    def lex4(self) -> tuple[int, int, int, int]:
        return (self.size_i, self.max_up, self.max_sh, self.max_run)


@dataclass(frozen=True)
class FlatMeasures:
    size_i: int
    max_up: int
    max_run: int
    leaves: tuple[LeafMeasures, ...]

    def lex3(self) -> tuple[int, int, int]:
        return (self.size_i, self.max_up, self.max_run)


def _leaf_measures(
    sig: Signature, where: str, comp: Computation, budget: int
) -> LeafMeasures:
    from .typecheck import TypeCheckError

    try:
        eff = leaf_effect(sig, comp)
    except TypeCheckError as exc:
        raise MeasureUndefinedError(
            f"leaf {where} is not effect-typeable: {exc}"
        ) from exc
    summary = _require_sn(comp, budget, where=f"leaf {where}")
    return LeafMeasures(where, size_i(eff), summary.max_signals, summary.max_steps)


def proc_measures(sig: Signature, p: Process, budget: int = DEFAULT_BUDGET) -> ProcMeasures:
    """The quadruple (annotation size, pending signals, shape distance,
    run steps), summed over run-leaves, plus the per-leaf breakdown."""
    return call_with_deep_stack(_proc_measures_impl, sig, p, budget)


def _proc_measures_impl(sig: Signature, p: Process, budget: int) -> ProcMeasures:
    leaves = tuple(
        _leaf_measures(sig, "/".join(path) or "root", comp, budget)
        for path, comp in run_leaves(p)
    )
    return ProcMeasures(
        sum(l.size_i for l in leaves),
        sum(l.max_up for l in leaves),
        max_sh(shape_of(p), budget),
        sum(l.max_run for l in leaves),
        leaves,
    )


def flat_measures(
    sig: Signature, fp: FlatProcess, budget: int = DEFAULT_BUDGET
) -> FlatMeasures:
    """The flat-model triple: annotation size, pending signals, run steps."""
    return call_with_deep_stack(_flat_measures_impl, sig, fp, budget)


def _flat_measures_impl(sig: Signature, fp: FlatProcess, budget: int) -> FlatMeasures:
    leaves = tuple(
        _leaf_measures(sig, str(i), comp, budget) for i, comp in enumerate(fp.items)
    )
    return FlatMeasures(
        sum(l.size_i for l in leaves),
        sum(l.max_up for l in leaves),
        sum(l.max_run for l in leaves),
        leaves,
    )
