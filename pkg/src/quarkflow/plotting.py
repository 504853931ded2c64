"""Matplotlib figures for decompositions and benchmark tables."""

from __future__ import annotations

import math
from typing import Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
from matplotlib.lines import Line2D  # noqa: E402
from matplotlib.patches import Circle, FancyArrowPatch, Patch  # noqa: E402

from .decompose import Decomposition, stage_color  # noqa: E402
from .graph import topological_order  # noqa: E402

NODE_R = 0.28


def layered_positions(decomp: Decomposition) -> dict[int, tuple[float, float]]:
    """Rows by longest-path depth, top to bottom; columns by creating stage then id."""
    g = decomp.graph
    depth = [0] * g.n
    for j in topological_order(g):
        depth[j] = max((depth[i] + 1 for i in g.pred[j]), default=0)
    rows: dict[int, list[int]] = {}
    for i in range(g.n):
        rows.setdefault(depth[i], []).append(i)
    pos = {}
    for r, members in rows.items():
        members.sort(key=lambda i: (decomp.c[i], i))
        offset = (len(members) - 1) / 2
        for col, i in enumerate(members):
            pos[i] = (col - offset, -float(r))
    return pos


def _triple_line(ax, p, q, color) -> None:
    (x0, y0), (x1, y1) = p, q
    length = math.hypot(x1 - x0, y1 - y0) or 1.0
    nx, ny = -(y1 - y0) / length, (x1 - x0) / length
    for k in (-1, 0, 1):
        dx, dy = 0.05 * k * nx, 0.05 * k * ny
        ax.plot([x0 + dx, x1 + dx], [y0 + dy, y1 + dy], color=color, lw=1.0, zorder=1)


def _arc(ax, p, q, color, rad) -> None:
    ax.add_patch(FancyArrowPatch(p, q, connectionstyle=f"arc3,rad={rad}", arrowstyle="-",
                                 color=color, lw=1.0, zorder=1))


def _draw_edge(ax, p, q, color, swept) -> None:
    """Edges spanning more than one row bend so they do not hide the rows between."""
    long_edge = abs(p[1] - q[1]) > 1 and abs(p[0] - q[0]) < 0.5
    if long_edge:
        rad = min(0.35, max(0.08, 0.6 / abs(p[1] - q[1])))
        for k in ((-1, 0, 1) if swept else (0,)):
            _arc(ax, p, q, color, rad + 0.03 * k)
    elif swept:
        _triple_line(ax, p, q, color)
    else:
        ax.plot([p[0], q[0]], [p[1], q[1]], color=color, lw=1.0, zorder=1)


def plot_decomposition(decomp: Decomposition, path: str, title: str | None = None) -> None:
    """Stage-coloured drawing: shared vertices get a double outline and swept
    edges are drawn as three parallel lines."""
    g = decomp.graph
    pos = layered_positions(decomp)
    xs = [p[0] for p in pos.values()]
    ys = [p[1] for p in pos.values()]
    width = max(4.0, min(40.0, 0.9 * (max(xs) - min(xs) + 2)))
    height = max(3.0, min(60.0, 0.9 * (max(ys) - min(ys) + 2)))
    fig, ax = plt.subplots(figsize=(width, height))
    for x in g.edges:
        col = stage_color(decomp.c[x.dst])
        _draw_edge(ax, pos[x.src], pos[x.dst], col, x.swept)
    for v in g.vertices:
        i = v.id
        x, y = pos[i]
        col = stage_color(decomp.c[i])
        ax.add_patch(Circle((x, y), NODE_R, color=col, zorder=2))
        if decomp.d[i] > decomp.c[i]:
            ax.add_patch(Circle((x, y), NODE_R * 1.3, fill=False, ec=stage_color(decomp.d[i]),
                                lw=1.5, zorder=2))
        ax.text(x, y, f"{i}$_{{{v.weight}}}$", ha="center", va="center", color="white",
                fontsize=8, zorder=3)
    handles = [Patch(color=stage_color(s.k), label=f"stage {s.k}") for s in decomp.stages]
    handles.append(Line2D([], [], color="black", lw=3, label="swept edge (triple line)"))
    ax.legend(handles=handles, loc="upper left", bbox_to_anchor=(1.0, 1.0), frameon=False)
    ax.set_xlim(min(xs) - 2, max(xs) + 2)
    ax.set_ylim(min(ys) - 1, max(ys) + 1)
    ax.set_aspect("equal")
    ax.axis("off")
    if title:
        ax.set_title(title)
    fig.savefig(path, bbox_inches="tight", dpi=100)
    plt.close(fig)


def plot_bench(rows: Sequence, path: str) -> None:
    """Median solve time per example on a log axis, with budgets as ticks."""
    fig, ax = plt.subplots(figsize=(6, 3.5))
    names = [r.name for r in rows]
    times = [max(r.median_ms, 1e-3) for r in rows]
    colors = ["#2ca02c" if r.within_budget else "#d62728" for r in rows]
    ax.bar(names, times, color=colors)
    for k, r in enumerate(rows):
        if r.budget_ms is not None:
            ax.plot([k - 0.4, k + 0.4], [r.budget_ms] * 2, color="black", ls="--", lw=1)
    ax.set_yscale("log")
    ax.set_ylabel("median solve time (ms)")
    for side in ("top", "right"):
        ax.spines[side].set_visible(False)
    fig.tight_layout()
    fig.savefig(path, dpi=100)
    plt.close(fig)
