"""Figure rendering for the CLI report paths.

Every figure is derived purely from graph/measure structure (no
randomness, no timestamps), drawn with the Agg backend, and written to a
file next to the delimited output.
"""

from __future__ import annotations

from collections import deque

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402

from .explorer import SN, BudgetExceeded, NonSN, ReductionGraph, Verdict

_MAX_DRAWN_NODES = 400


def _depths(graph: ReductionGraph, limit: int) -> dict[int, int]:
    depth = {graph.root: 0}
    queue = deque([graph.root])
    while queue:
        nid = queue.popleft()
        if len(depth) >= limit and nid not in depth:
            continue
        for _, dst in graph.succ[nid]:
            if dst not in depth and len(depth) < limit:
                depth[dst] = depth[nid] + 1
                queue.append(dst)
    return depth


def _verdict_text(verdict: Verdict) -> str:
    if isinstance(verdict, SN):
        return f"SN, max steps {verdict.max_steps}, {len(verdict.normal_forms)} normal form(s)"
    if isinstance(verdict, NonSN):
        return f"divergent: cycle of length {len(verdict.cycle) - 1}"
    if isinstance(verdict, BudgetExceeded):
        return f"budget exceeded at {verdict.nodes_explored} nodes"
    return str(verdict)


def reduction_graph_figure(
    graph: ReductionGraph, verdict: Verdict, path: str, title: str
) -> None:
    """Layered drawing of the reduction graph: x = distance from the
    root, sinks highlighted.  Very large graphs are truncated to the
    first nodes in exploration order."""
    depth = _depths(graph, _MAX_DRAWN_NODES)
    layers: dict[int, list[int]] = {}
    for nid in sorted(depth):
        layers.setdefault(depth[nid], []).append(nid)
    pos: dict[int, tuple[float, float]] = {}
    for d, nodes in layers.items():
        for i, nid in enumerate(nodes):
            pos[nid] = (float(d), i - (len(nodes) - 1) / 2.0)

    fig, ax = plt.subplots(figsize=(9, 5.5))
    for src, _, dst in graph.edges():
        if src in pos and dst in pos:
            (x0, y0), (x1, y1) = pos[src], pos[dst]
            ax.annotate(
                "",
                xy=(x1, y1),
                xytext=(x0, y0),
                arrowprops=dict(arrowstyle="->", color="0.65", lw=0.7),
            )
    sinks = set(graph.sinks()) if graph.complete else set()
    cycle_nodes = set(verdict.cycle) if isinstance(verdict, NonSN) else set()
    for nid, (x, y) in pos.items():
        if nid == graph.root:
            color = "tab:blue"
        elif nid in cycle_nodes:
            color = "tab:red"
        elif nid in sinks:
            color = "tab:green"
        else:
            color = "0.4"
        ax.plot([x], [y], "o", color=color, markersize=5)

    shown = len(pos)
    note = "" if shown == len(graph) else f" (showing {shown}/{len(graph)} nodes)"
    ax.set_title(f"{title}\n{_verdict_text(verdict)}{note}", fontsize=10)
    ax.set_xlabel("steps from root")
    ax.set_yticks([])
    fig.tight_layout()
    fig.savefig(path, dpi=110)
    plt.close(fig)


def measures_figure(names: list[str], tuples: list[tuple[int, ...]], components: list[str], path: str, title: str) -> None:
    """Grouped bars: one group per leaf (plus the total), one bar per
    measure component."""
    fig, ax = plt.subplots(figsize=(8, 4.5))
    width = 0.8 / max(1, len(components))
    for ci, comp in enumerate(components):
        xs = [i + ci * width for i in range(len(names))]
        ys = [t[ci] for t in tuples]
        ax.bar(xs, ys, width=width, label=comp)
    ax.set_xticks([i + 0.4 - width / 2 for i in range(len(names))])
    ax.set_xticklabels(names, rotation=20, ha="right", fontsize=8)
    ax.set_ylabel("measure value")
    ax.set_title(title, fontsize=10)
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=110)
    plt.close(fig)


def audit_figure(components: list[str], decided_counts: list[int], violations: int, path: str, title: str) -> None:
    """For each measure component, how many edges were decided by it
    (first strictly smaller coordinate), plus any violations in red."""
    fig, ax = plt.subplots(figsize=(7, 4))
    labels = components + ["violation"]
    counts = decided_counts + [violations]
    colors = ["tab:blue"] * len(components) + ["tab:red"]
    ax.bar(range(len(labels)), counts, color=colors)
    ax.set_xticks(range(len(labels)))
    ax.set_xticklabels(labels, rotation=15, ha="right", fontsize=9)
    ax.set_ylabel("edges")
    ax.set_title(title, fontsize=10)
    for i, c in enumerate(counts):
        ax.text(i, c, str(c), ha="center", va="bottom", fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=110)
    plt.close(fig)
