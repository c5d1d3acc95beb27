"""Command-line front end.

Subcommands: ``check`` (typing), ``run`` (single reduction trace),
``explore`` (full reduction graph and termination verdict), ``measures``
(termination measure tuples), ``audit`` (lexicographic decrease of the
measures along every edge), ``shapes`` (parallel-shape reduction).

Output is human-readable by default; ``--format structured`` emits one
JSON record per line, byte-identical across runs for identical
invocations.  ``--figures DIR`` additionally renders matplotlib figures
next to the delimited output.  Exit codes: 0 success / strongly
normalising, 1 rejected input (parse, scope, or type errors), 2 not
strongly normalising where that was the question (including budget
exhaustion), 3 audit violation, 64 usage errors.
"""

from __future__ import annotations

import argparse
import json
import os
import random
import sys
from pathlib import Path

from .effects import pretty_effect
from .errors import (
    AeffError,
    AuditPreconditionError,
    LexError,
    MeasureUndefinedError,
    ParseError,
    ScopeError,
)
from .explorer import (
    SN,
    BudgetExceeded,
    NonSN,
    audit_lex_decrease,
    call_with_deep_stack,
    explore,
)
from .measures import flat_measures, max_sh, proc_measures, shape_of, step_shape
from .reduce_par import FlatProcess, Par, step_proc
from .reduce_seq import step_seq
from .surface import SourceProgram, parse, pretty
from .syntax import Computation, Process, Run
from .typecheck import ParT, RunT, TypeCheckError, check_program
from .types import pretty_type

EXIT_OK = 0
EXIT_REJECTED = 1
EXIT_NOT_SN = 2
EXIT_VIOLATION = 3
EXIT_USAGE = 64

DEFAULT_BUDGET_ENV = "AEFF_BUDGET"


def _default_budget() -> int:
    raw = os.environ.get(DEFAULT_BUDGET_ENV)
    if raw is None:
        return 100_000
    try:
        return max(1, int(raw))
    except ValueError:
        return 100_000


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


class Emitter:
    def __init__(self, structured: bool):
        self.structured = structured

    def rec(self, human: str | None, **fields) -> None:
        if self.structured:
            sys.stdout.write(
                json.dumps(fields, sort_keys=True, separators=(",", ":")) + "\n"
            )
        elif human is not None:
            sys.stdout.write(human + "\n")

    def diagnostic(self, record: dict, human: str) -> None:
        if self.structured:
            sys.stdout.write(
                json.dumps(record, sort_keys=True, separators=(",", ":")) + "\n"
            )
        else:
            sys.stderr.write(human + "\n")


def build_parser() -> argparse.ArgumentParser:
    top = _Parser(prog="aeff", description=__doc__.splitlines()[0])
    sub = top.add_subparsers(dest="command", required=True)

    def common(p, figures=True, model=False):
        p.add_argument("file", help="input .aeff file")
        p.add_argument(
            "--format", choices=("human", "structured"), default="human",
            help="human text or line-delimited JSON records",
        )
        p.add_argument(
            "--budget", type=int, default=_default_budget(),
            help=f"node/step budget (default from ${DEFAULT_BUDGET_ENV} or 100000)",
        )
        if model:
            p.add_argument(
                "--model", choices=("tree", "flat"), default="tree",
                help="process model: structured tree or flat list",
            )
        if figures:
            p.add_argument(
                "--figures", metavar="DIR", default=None,
                help="also render matplotlib figures into DIR",
            )

    p = sub.add_parser("check", help="type-check a program")
    p.add_argument("file")
    p.add_argument("--mode", choices=("effects", "skeletal"), default="effects")
    p.add_argument("--format", choices=("human", "structured"), default="human")

    p = sub.add_parser("run", help="reduce with a strategy, printing the trace")
    common(p, figures=False)
    p.add_argument(
        "--strategy", choices=("all", "leftmost", "random"), default="leftmost"
    )
    p.add_argument("--seed", type=int, default=None)

    p = sub.add_parser("explore", help="explore the full reduction graph")
    common(p, model=True)

    p = sub.add_parser("measures", help="report the termination measure tuples")
    common(p, model=True)

    p = sub.add_parser("audit", help="check lexicographic decrease along every edge")
    common(p, model=True)

    p = sub.add_parser("shapes", help="reduce the parallel shape of a process")
    common(p)

    return top


# ---------------------------------------------------------------------------
# helpers


def _load(path: str, out: Emitter) -> SourceProgram | None:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        out.diagnostic(
            {"record": "diagnostic", "severity": "error", "code": "io", "message": str(exc)},
            f"error: {exc}",
        )
        return None
    try:
        return parse(text)
    except (LexError, ParseError, ScopeError) as exc:
        code = type(exc).__name__.replace("Error", "").lower() + "-error"
        out.diagnostic(
            {
                "record": "diagnostic",
                "severity": "error",
                "code": code,
                "message": str(exc),
                "line": exc.line,
                "col": exc.col,
            },
            f"{path}:{exc}",
        )
        return None


def _type_error(out: Emitter, exc: TypeCheckError) -> int:
    d = exc.diagnostic
    human = f"error[{d.code}]: {d.message}"
    if d.where:
        human += f"\n  in: {d.where}"
    if d.expected or d.actual:
        human += f"\n  expected: {d.expected}  actual: {d.actual}"
    out.diagnostic(d.as_record(), human)
    return EXIT_REJECTED


def _flatten(body, out: Emitter) -> FlatProcess | None:
    """Flat model: a computation body, or a ``||`` spine of run leaves."""
    if isinstance(body, Computation):
        return FlatProcess((body,))
    items: list[Computation] = []

    def walk(p) -> bool:
        if isinstance(p, Run):
            items.append(p.comp)
            return True
        if isinstance(p, Par):
            return walk(p.left) and walk(p.right)
        return False

    if walk(body):
        return FlatProcess(tuple(items))
    out.diagnostic(
        {
            "record": "diagnostic",
            "severity": "error",
            "code": "usage",
            "message": "the flat model needs a plain parallel list of run leaves",
        },
        "error: the flat model needs a plain parallel list of run leaves",
    )
    return None


def _pretty_proctype(pt) -> str:
    if isinstance(pt, RunT):
        if pt.eff is None:
            return pretty_type(pt.type)
        return f"{pretty_type(pt.type)} ! {pretty_effect(pt.eff)}"
    if isinstance(pt, ParT):
        return f"({_pretty_proctype(pt.left)} || {_pretty_proctype(pt.right)})"
    raise TypeError(pt)


def pretty_shape(s) -> str:
    from .measures import Down, ParShape, RunLeaf, Up

    if isinstance(s, RunLeaf):
        return "run"
    if isinstance(s, ParShape):
        return f"({pretty_shape(s.left)} || {pretty_shape(s.right)})"
    if isinstance(s, Up):
        return f"up {pretty_shape(s.inner)}"
    if isinstance(s, Down):
        return f"down {pretty_shape(s.inner)}"
    raise TypeError(s)


def _verdict_record(out: Emitter, verdict, graph) -> None:
    if isinstance(verdict, SN):
        nf_ids = sorted(graph.sinks())
        out.rec(
            f"verdict: SN (max steps {verdict.max_steps}, "
            f"{len(nf_ids)} normal form(s))",
            record="verdict",
            verdict="SN",
            max_steps=verdict.max_steps,
            normal_forms=nf_ids,
        )
    elif isinstance(verdict, NonSN):
        out.rec(
            f"verdict: NonSN (cycle through nodes {list(verdict.cycle)})",
            record="verdict",
            verdict="NonSN",
            cycle=list(verdict.cycle),
        )
    else:
        out.rec(
            f"verdict: budget exceeded at {verdict.nodes_explored} nodes",
            record="verdict",
            verdict="BudgetExceeded",
            nodes_explored=verdict.nodes_explored,
        )


def _emit_figure(out: Emitter, path: Path) -> None:
    out.rec(f"wrote figure: {path}", record="figure", path=str(path))


def _figdir(args) -> Path | None:
    raw = getattr(args, "figures", None)
    if raw is None:
        return None
    d = Path(raw)
    d.mkdir(parents=True, exist_ok=True)
    return d


# ---------------------------------------------------------------------------
# commands


def cmd_check(args) -> int:
    out = Emitter(args.format == "structured")
    sp = _load(args.file, out)
    if sp is None:
        return EXIT_REJECTED
    try:
        report = check_program(sp, args.mode)
    except TypeCheckError as exc:
        return _type_error(out, exc)
    if report.kind == "computation":
        eff = None if report.eff is None else pretty_effect(report.eff)
        human = f"type: {pretty_type(report.type)}"
        if eff is not None:
            human += f"\neffects: {eff}"
        out.rec(
            human,
            record="check",
            kind="computation",
            mode=args.mode,
            type=pretty_type(report.type),
            effects=eff,
        )
    else:
        pr = report.process
        for leaf in pr.leaves:
            eff = None if leaf.eff is None else pretty_effect(leaf.eff)
            path = "/".join(leaf.path) or "root"
            human = f"leaf {path}: {pretty_type(leaf.type)}"
            if eff is not None:
                human += f" ! {eff}"
            out.rec(
                human,
                record="leaf",
                path=path,
                type=pretty_type(leaf.type),
                effects=eff,
            )
        out.rec(
            f"process type: {_pretty_proctype(pr.composite)}",
            record="check",
            kind="process",
            mode=args.mode,
            type=_pretty_proctype(pr.composite),
        )
    return EXIT_OK


def cmd_run(args) -> int:
    out = Emitter(args.format == "structured")
    if args.strategy == "all":
        out.diagnostic(
            {
                "record": "diagnostic",
                "severity": "error",
                "code": "usage",
                "message": "strategy 'all' is the explore subcommand",
            },
            "error: strategy 'all' explores every reduct; use `aeff explore`",
        )
        return EXIT_USAGE
    if args.strategy == "random" and args.seed is None:
        out.diagnostic(
            {
                "record": "diagnostic",
                "severity": "error",
                "code": "usage",
                "message": "the random strategy requires --seed",
            },
            "error: the random strategy requires --seed",
        )
        return EXIT_USAGE
    sp = _load(args.file, out)
    if sp is None:
        return EXIT_REJECTED
    term = sp.body
    step = step_proc if isinstance(term, Process) else step_seq
    rng = random.Random(args.seed) if args.strategy == "random" else None

    steps_taken = 0
    while steps_taken < args.budget:
        options = step(term)
        if not options:
            break
        lab, term = options[0] if rng is None else rng.choice(options)
        steps_taken += 1
        fields = {"record": "trace-step", "index": steps_taken, "label": str(lab)}
        if hasattr(lab, "op"):
            fields["rule"] = lab.rule
            fields["op"] = lab.op
            fields["position"] = lab.index
            fields["payload"] = None if lab.payload is None else pretty(lab.payload)
        else:
            fields["rule"] = lab.rule
        fields["term"] = pretty(term)
        out.rec(f"step {steps_taken}: {lab}  =>  {pretty(term)}", **fields)

    finished = not step(term)
    out.rec(
        f"{'normal form' if finished else 'budget exhausted'} after "
        f"{steps_taken} step(s): {pretty(term)}",
        record="result",
        status="normal-form" if finished else "budget-exhausted",
        steps=steps_taken,
        term=pretty(term),
    )
    return EXIT_OK if finished else EXIT_NOT_SN


def cmd_explore(args) -> int:
    out = Emitter(args.format == "structured")
    sp = _load(args.file, out)
    if sp is None:
        return EXIT_REJECTED
    root = sp.body
    if args.model == "flat":
        root = _flatten(root, out)
        if root is None:
            return EXIT_USAGE
    graph, verdict = explore(root, args.budget)

    def node_pretty(t):
        if isinstance(t, FlatProcess):
            return " || ".join(pretty(m) for m in t.items)
        return pretty(t)

    if out.structured:
        for nid, t in enumerate(graph.terms):
            is_nf = (not graph.succ[nid]) if graph.complete else None
            out.rec(None, record="node", id=nid, term=node_pretty(t), is_normal=is_nf)
        for src, lab, dst in graph.edges():
            out.rec(None, record="edge", src=src, label=str(lab), dst=dst)
    else:
        out.rec(
            f"explored {len(graph)} node(s), {graph.edge_count()} edge(s)"
            f"{'' if graph.complete else ' (truncated by budget)'}"
        )
        if isinstance(verdict, SN):
            for nid in sorted(graph.sinks()):
                out.rec(f"normal form [{nid}]: {node_pretty(graph.terms[nid])}")

    figdir = _figdir(args)
    if figdir is not None:
        from . import figures

        target = figdir / f"{Path(args.file).stem}-explore.png"
        figures.reduction_graph_figure(graph, verdict, str(target), Path(args.file).name)
        _emit_figure(out, target)
    # the verdict summary record closes the export
    _verdict_record(out, verdict, graph)
    return EXIT_OK if isinstance(verdict, SN) else EXIT_NOT_SN


def _measure_subject(sp: SourceProgram, args, out: Emitter):
    body = sp.body
    if args.model == "flat":
        return _flatten(body, out)
    return Run(body) if isinstance(body, Computation) else body


def cmd_measures(args) -> int:
    out = Emitter(args.format == "structured")
    sp = _load(args.file, out)
    if sp is None:
        return EXIT_REJECTED
    subject = _measure_subject(sp, args, out)
    if subject is None:
        return EXIT_USAGE
    try:
        if isinstance(subject, FlatProcess):
            m = flat_measures(sp.signature, subject, args.budget)
            total = {"size_i": m.size_i, "max_up": m.max_up, "max_run": m.max_run}
        else:
            m = proc_measures(sp.signature, subject, args.budget)
            total = {
                "size_i": m.size_i,
                "max_up": m.max_up,
                "max_sh": m.max_sh,
                "max_run": m.max_run,
            }
    except TypeCheckError as exc:
        return _type_error(out, exc)
    except MeasureUndefinedError as exc:
        out.diagnostic(
            {
                "record": "diagnostic",
                "severity": "error",
                "code": "measure-undefined",
                "message": str(exc),
            },
            f"error: {exc}",
        )
        return EXIT_NOT_SN
    for leaf in m.leaves:
        out.rec(
            f"leaf {leaf.path}: size_i={leaf.size_i} max_up={leaf.max_up} "
            f"max_run={leaf.max_run}",
            record="leaf-measures",
            path=leaf.path,
            size_i=leaf.size_i,
            max_up=leaf.max_up,
            max_run=leaf.max_run,
        )
    human = "total: " + " ".join(f"{k}={v}" for k, v in total.items())
    out.rec(human, record="process-measures", **total)

    figdir = _figdir(args)
    if figdir is not None:
        from . import figures

        comps = list(total)
        names = [leaf.path for leaf in m.leaves] + ["total"]
        rows = [
            tuple(getattr(leaf, c, 0) if c != "max_sh" else 0 for c in comps)
            for leaf in m.leaves
        ] + [tuple(total[c] for c in comps)]
        target = figdir / f"{Path(args.file).stem}-measures.png"
        figures.measures_figure(names, rows, comps, str(target), Path(args.file).name)
        _emit_figure(out, target)
    return EXIT_OK


def cmd_audit(args) -> int:
    out = Emitter(args.format == "structured")
    sp = _load(args.file, out)
    if sp is None:
        return EXIT_REJECTED
    subject = _measure_subject(sp, args, out)
    if subject is None:
        return EXIT_USAGE
    try:
        report = audit_lex_decrease(sp.signature, subject, args.budget)
    except AuditPreconditionError as exc:
        out.diagnostic(
            {
                "record": "diagnostic",
                "severity": "error",
                "code": "audit-precondition",
                "message": str(exc),
                "leaves": list(exc.leaves),
            },
            f"error: {exc}",
        )
        return EXIT_REJECTED
    except MeasureUndefinedError as exc:
        out.diagnostic(
            {
                "record": "diagnostic",
                "severity": "error",
                "code": "measure-undefined",
                "message": str(exc),
            },
            f"error: {exc}",
        )
        return EXIT_NOT_SN

    for e in report.edges:
        ok = e.decreases
        out.rec(
            None if ok else f"VIOLATION {e.src}->{e.dst} [{e.label}] "
            f"{e.src_measures} -> {e.dst_measures}",
            record="audit-edge",
            src=e.src,
            dst=e.dst,
            label=e.label,
            src_measures=list(e.src_measures),
            dst_measures=list(e.dst_measures),
            decreases=ok,
        )
    out.rec(
        f"audited {len(report.edges)} edge(s) over {len(report.graph)} node(s): "
        f"{len(report.violations)} violation(s), "
        f"{'quiescent' if report.quiescent else 'NOT quiescent'}",
        record="audit-summary",
        model=report.model,
        edges=len(report.edges),
        nodes=len(report.graph),
        violations=len(report.violations),
        quiescent=report.quiescent,
    )

    figdir = _figdir(args)
    if figdir is not None:
        from . import figures

        comps = (
            ["size_i", "max_up", "max_run"]
            if report.model == "flat"
            else ["size_i", "max_up", "max_sh", "max_run"]
        )
        decided = [0] * len(comps)
        for e in report.edges:
            if e.decreases:
                for i, (a, b) in enumerate(zip(e.src_measures, e.dst_measures)):
                    if b < a:
                        decided[i] += 1
                        break
        target = figdir / f"{Path(args.file).stem}-audit.png"
        figures.audit_figure(
            comps, decided, len(report.violations), str(target), Path(args.file).name
        )
        _emit_figure(out, target)

    if not report.quiescent:
        return EXIT_NOT_SN
    if report.violations:
        return EXIT_VIOLATION
    return EXIT_OK


def cmd_shapes(args) -> int:
    out = Emitter(args.format == "structured")
    sp = _load(args.file, out)
    if sp is None:
        return EXIT_REJECTED
    body = sp.body
    proc = Run(body) if isinstance(body, Computation) else body
    shape = shape_of(proc)
    graph, verdict = explore(shape, args.budget, step=step_shape)
    if out.structured:
        for nid, s in enumerate(graph.terms):
            is_nf = (not graph.succ[nid]) if graph.complete else None
            out.rec(None, record="node", id=nid, term=pretty_shape(s), is_normal=is_nf)
        for src, lab, dst in graph.edges():
            out.rec(None, record="edge", src=src, label=str(lab), dst=dst)
    else:
        out.rec(f"shape: {pretty_shape(shape)}")
    _verdict_record(out, verdict, graph)
    if isinstance(verdict, SN):
        out.rec(
            f"max_sh: {verdict.max_steps}",
            record="shape-measure",
            max_sh=verdict.max_steps,
        )

    figdir = _figdir(args)
    if figdir is not None:
        from . import figures

        target = figdir / f"{Path(args.file).stem}-shapes.png"
        figures.reduction_graph_figure(
            graph, verdict, str(target), f"{Path(args.file).name} (shape)"
        )
        _emit_figure(out, target)
    return EXIT_OK if isinstance(verdict, SN) else EXIT_NOT_SN


_COMMANDS = {
    "check": cmd_check,
    "run": cmd_run,
    "explore": cmd_explore,
    "measures": cmd_measures,
    "audit": cmd_audit,
    "shapes": cmd_shapes,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return call_with_deep_stack(_COMMANDS[args.command], args)
    except AeffError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_REJECTED


if __name__ == "__main__":
    sys.exit(main())
