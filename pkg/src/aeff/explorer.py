"""Exhaustive reduction-graph exploration and termination verdicts.

``explore`` closes a computation, process, flat process, or parallel
shape under its step function breadth-first, deduplicating nodes up to
alpha-equivalence (structural equality of positional-binder terms).  The
outcome is a ``ReductionGraph`` plus one of three verdicts:

* ``SN``: the graph is finite and acyclic; carries the length of the
  longest reduction sequence and the set of normal forms;
* ``NonSN``: a reachable alpha-repeated state was found; carries the
  witness cycle, which is re-verified edge by edge before being reported;
* ``BudgetExceeded``: the node budget was hit before quiescence and no
  cycle was seen (divergence through ever-growing states looks like
  this).

Exploration is deterministic: identical roots and budgets produce
identical graphs.  Frontier expansion could be parallelised: the node set
only needs insert-if-absent, and results are independent of expansion
order; the implementation here is sequential.

Deeply nested terms (divergent computations grow thousands of binders
deep within a modest node budget) exceed the default C stack under
recursive term operations, so the entry points run on a dedicated
big-stack thread.
"""

from __future__ import annotations

import gc
import sys
import threading
from collections import deque
from dataclasses import dataclass, field
from typing import Callable, Hashable, Iterable, Union

from .errors import AeffError, AuditPreconditionError, MeasureUndefinedError
from .reduce_par import FlatProcess, run_leaves, step_flat, step_proc
from .reduce_seq import step_seq
from .syntax import Computation, Handler, HandlerKind, Process, Term
from .typecheck import Signature, TypeCheckError

DEFAULT_BUDGET = 100_000

_DEEP_STACK_BYTES = 512 * 1024 * 1024
_DEEP_RECURSION_LIMIT = 1_000_000
_local = threading.local()


def call_with_deep_stack(fn: Callable, /, *args, **kwargs):
    """Run ``fn`` on a thread with a large stack and recursion limit."""
    if getattr(_local, "deep", False):
        return fn(*args, **kwargs)
    box: dict = {}

    def runner():
        _local.deep = True
        old_limit = sys.getrecursionlimit()
        sys.setrecursionlimit(_DEEP_RECURSION_LIMIT)
        try:
            box["value"] = fn(*args, **kwargs)
        except BaseException as exc:  # re-raised on the caller's thread
            box["error"] = exc
        finally:
            sys.setrecursionlimit(old_limit)

    old_size = threading.stack_size(_DEEP_STACK_BYTES)
    try:
        worker = threading.Thread(target=runner, name="aeff-deep")
        worker.start()
    finally:
        threading.stack_size(old_size)
    worker.join()
    if "error" in box:
        raise box["error"]
    return box["value"]


Node = Hashable
Label = Hashable
StepFn = Callable[[Node], Iterable[tuple[Label, Node]]]


@dataclass
class ReductionGraph:
    """Explored state graph; node 0 is the root."""

    terms: list[Node]
    succ: list[list[tuple[Label, int]]]
    root: int = 0
    complete: bool = True
    budget: int = DEFAULT_BUDGET
    unexpanded: int = 0
    ids: dict[Node, int] = field(default_factory=dict, repr=False)

    def __len__(self) -> int:
        return len(self.terms)

    def edges(self) -> Iterable[tuple[int, Label, int]]:
        for src, outs in enumerate(self.succ):
            for lab, dst in outs:
                yield src, lab, dst

    def edge_count(self) -> int:
        return sum(len(outs) for outs in self.succ)

    def sinks(self) -> list[int]:
        return [n for n, outs in enumerate(self.succ) if not outs]


@dataclass(frozen=True)
class SN:
    max_steps: int
    normal_forms: frozenset


@dataclass(frozen=True)
class NonSN:
    """Witness: node ids with ``cycle[0] == cycle[-1]`` and an edge
    between each consecutive pair."""

    cycle: tuple[int, ...]


@dataclass(frozen=True)
class BudgetExceeded:
    nodes_explored: int


Verdict = Union[SN, NonSN, BudgetExceeded]


def step_function_for(term: Node) -> StepFn:
    if isinstance(term, Computation):
        return step_seq
    if isinstance(term, Process):
        return step_proc
    if isinstance(term, FlatProcess):
        return step_flat
    raise AeffError(f"no step function for {term!r}")


def explore(
    root: Node, budget: int = DEFAULT_BUDGET, step: StepFn | None = None
) -> tuple[ReductionGraph, Verdict]:
    """Breadth-first closure under the step function, up to ``budget``
    nodes."""
    if budget < 1:
        raise ValueError("budget must be at least 1")
    if step is None:
        step = step_function_for(root)
    return call_with_deep_stack(_explore_impl, root, budget, step)


def _explore_impl(root: Node, budget: int, step: StepFn) -> tuple[ReductionGraph, Verdict]:
    # Terms are acyclic, so reference counting reclaims all garbage; the
    # cycle collector only adds repeated sweeps over millions of live
    # nodes while large graphs are built and analysed.
    gc_was_enabled = gc.isenabled()
    gc.disable()
    try:
        return _explore_nogc(root, budget, step)
    finally:
        if gc_was_enabled:
            gc.enable()


def _explore_nogc(root: Node, budget: int, step: StepFn) -> tuple[ReductionGraph, Verdict]:
    terms: list[Node] = [root]
    ids: dict[Node, int] = {root: 0}
    succ: list[list[tuple[Label, int]]] = [[]]
    queue: deque[int] = deque([0])
    overflow = False

    while queue:
        nid = queue.popleft()
        outs = succ[nid]
        for lab, target in step(terms[nid]):
            tid = ids.get(target)
            if tid is None:
                if len(terms) >= budget:
                    overflow = True
                    continue
                tid = len(terms)
                ids[target] = tid
                terms.append(target)
                succ.append([])
                queue.append(tid)
            outs.append((lab, tid))

    graph = ReductionGraph(
        terms=terms,
        succ=succ,
        complete=not overflow,
        budget=budget,
        unexpanded=0,
        ids=ids,
    )

    cycle = _find_cycle(succ)
    if cycle is not None:
        verdict = NonSN(tuple(cycle))
        verify_cycle(graph, verdict, step)
        return graph, verdict
    if overflow:
        return graph, BudgetExceeded(len(terms))
    msteps = node_max_steps(graph)
    nfs = frozenset(terms[n] for n in graph.sinks())
    return graph, SN(msteps[graph.root], nfs)


def _find_cycle(succ: list[list[tuple[Label, int]]]) -> list[int] | None:
    """Iterative three-colour DFS; returns a cycle as a node path with the
    repeated node at both ends."""
    n = len(succ)
    color = [0] * n  # 0 unvisited, 1 on stack, 2 done
    for start in range(n):
        if color[start]:
            continue
        color[start] = 1
        stack = [(start, iter(succ[start]))]
        path = [start]
        while stack:
            nid, it = stack[-1]
            edge = next(it, None)
            if edge is None:
                color[nid] = 2
                stack.pop()
                path.pop()
                continue
            nxt = edge[1]
            if color[nxt] == 0:
                color[nxt] = 1
                stack.append((nxt, iter(succ[nxt])))
                path.append(nxt)
            elif color[nxt] == 1:
                at = path.index(nxt)
                return path[at:] + [nxt]
    return None


def verify_cycle(graph: ReductionGraph, verdict: NonSN, step: StepFn | None = None) -> None:
    """Re-check a divergence witness edge by edge with the step function."""
    if step is None:
        step = step_function_for(graph.terms[graph.root])
    cycle = verdict.cycle
    if len(cycle) < 2 or cycle[0] != cycle[-1]:
        raise AeffError("malformed cycle witness")
    if any(nid < 0 or nid >= len(graph.terms) for nid in cycle):
        raise AeffError("cycle witness names unknown nodes")
    for a, b in zip(cycle, cycle[1:]):
        targets = {t for _, t in step(graph.terms[a])}
        if graph.terms[b] not in targets:
            raise AeffError(f"cycle witness edge {a}->{b} does not re-verify")


def _postorder(succ: list[list[tuple[Label, int]]], root: int) -> list[int]:
    seen = [False] * len(succ)
    order: list[int] = []
    seen[root] = True
    stack: list[tuple[int, Iterable]] = [(root, iter(succ[root]))]
    while stack:
        nid, it = stack[-1]
        edge = next(it, None)
        if edge is None:
            order.append(nid)
            stack.pop()
            continue
        nxt = edge[1]
        if not seen[nxt]:
            seen[nxt] = True
            stack.append((nxt, iter(succ[nxt])))
    return order


def node_max_steps(graph: ReductionGraph) -> list[int]:
    """Longest path to a sink from each node: 0 at sinks, else one more
    than the best successor.  Defined on fully explored acyclic graphs."""
    if not graph.complete:
        raise MeasureUndefinedError("graph exploration hit its budget")
    msteps = [0] * len(graph.terms)
    for nid in _postorder(graph.succ, graph.root):
        outs = graph.succ[nid]
        if outs:
            msteps[nid] = 1 + max(msteps[d] for _, d in outs)
    return msteps


def max_steps(graph: ReductionGraph) -> int:
    """Length of the longest reduction sequence from the root."""
    return node_max_steps(graph)[graph.root]


def normal_forms(graph: ReductionGraph) -> frozenset:
    """Terms of the sink nodes of a fully explored graph."""
    if not graph.complete:
        raise MeasureUndefinedError("graph exploration hit its budget")
    return frozenset(graph.terms[n] for n in graph.sinks())


# ---------------------------------------------------------------------------
# Lexicographic-decrease audit


@dataclass(frozen=True)
class AuditEdge:
    src: int
    dst: int
    label: str
    src_measures: tuple[int, ...]
    dst_measures: tuple[int, ...]

    @property
    def decreases(self) -> bool:
        return self.dst_measures < self.src_measures


@dataclass
class AuditReport:
    model: str  # "tree" | "flat"
    graph: ReductionGraph
    verdict: Verdict
    edges: list[AuditEdge]

    @property
    def violations(self) -> list[AuditEdge]:
        return [e for e in self.edges if not e.decreases]

    @property
    def quiescent(self) -> bool:
        return isinstance(self.verdict, SN)

    @property
    def ok(self) -> bool:
        return self.quiescent and not self.violations


def _leaf_computations(root: Process | FlatProcess) -> list[tuple[str, Computation]]:
    if isinstance(root, FlatProcess):
        return [(str(i), m) for i, m in enumerate(root.items)]
    return [("/".join(path) or "root", m) for path, m in run_leaves(root)]


def audit_lex_decrease(
    sig: Signature, root: Process | FlatProcess, budget: int = DEFAULT_BUDGET
) -> AuditReport:
    """Explore the process graph and check that every edge strictly
    decreases the termination-measure tuple lexicographically.

    Tree processes use the quadruple (annotation size, pending signals,
    shape distance, run steps); flat processes drop the shape component.
    The measures are only defined for effect-typed, reinstall-free
    leaves, so reinstallable handlers of either kind are rejected up
    front.
    """
    return call_with_deep_stack(_audit_impl, sig, root, budget)


def _audit_impl(sig: Signature, root, budget: int) -> AuditReport:
    from . import measures  # late import: measures builds on the explorer

    offending = []
    for where, comp in _leaf_computations(root):
        for sub in _iter_subterms(comp):
            if isinstance(sub, Handler) and sub.kind is not HandlerKind.PLAIN:
                offending.append(where)
                break
    if offending:
        raise AuditPreconditionError(
            "reinstall handlers present; the lexicographic measures do not "
            f"cover them (leaves: {', '.join(offending)})",
            tuple(offending),
        )

    for where, comp in _leaf_computations(root):
        try:
            measures.leaf_effect(sig, comp)
        except TypeCheckError as exc:
            raise AuditPreconditionError(
                f"leaf {where} is not effect-typeable: {exc}", (where,)
            ) from exc

    if isinstance(root, FlatProcess):
        model = "flat"
        tuple_of = lambda t: measures.flat_measures(sig, t, budget).lex3()
    else:
        model = "tree"
        tuple_of = lambda t: measures.proc_measures(sig, t, budget).lex4()

    graph, verdict = explore(root, budget)
    cache: dict[int, tuple[int, ...]] = {}

    def measures_of(nid: int) -> tuple[int, ...]:
        got = cache.get(nid)
        if got is None:
            got = tuple_of(graph.terms[nid])
            cache[nid] = got
        return got

    edges = [
        AuditEdge(src, dst, str(lab), measures_of(src), measures_of(dst))
        for src, lab, dst in graph.edges()
    ]
    return AuditReport(model, graph, verdict, edges)


def _iter_subterms(t: Term):
    """All subterms, iteratively (terms can be very deep)."""
    from dataclasses import fields as dc_fields

    from .syntax import Value

    stack = [t]
    while stack:
        cur = stack.pop()
        yield cur
        for f in dc_fields(cur):
            v = getattr(cur, f.name)
            if isinstance(v, (Value, Computation, Process)):
                stack.append(v)
