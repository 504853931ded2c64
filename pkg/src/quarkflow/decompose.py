"""Staged decompositions built from an optimal (c, d, e) assignment."""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping

from .errors import InfeasibleAssignment, MissingExprMetadata
from .frontend import SHIFT_OFFSETS, StencilProgram, format_const
from .graph import ComputationalGraph, topological_order
from .model import K, ModelVar, build_model, c, check_feasible, d, e


@dataclass(frozen=True)
class Stage:
    k: int
    vertices: tuple[int, ...]
    edges: tuple[tuple[int, int], ...]
    sources: tuple[int, ...]
    sinks: tuple[int, ...]
    shared_in: tuple[int, ...]
    shared_out: tuple[int, ...]

    @property
    def created(self) -> tuple[int, ...]:
        """Vertices computed in this stage (those with an incoming edge here)."""
        return tuple(sorted({j for _, j in self.edges}))


@dataclass(frozen=True)
class Decomposition:
    graph: ComputationalGraph
    K: int
    c: tuple[int, ...]
    d: tuple[int, ...]
    e: tuple[int, ...]
    stages: tuple[Stage, ...]

    @property
    def shared(self) -> list[int]:
        return [i for i in range(self.graph.n) if self.d[i] > self.c[i]]

    def assignment(self) -> dict[ModelVar, int]:
        out = {ModelVar("ground"): 0, K: self.K}
        for i in range(self.graph.n):
            out[c(i)], out[d(i)], out[e(i)] = self.c[i], self.d[i], self.e[i]
        return out


def decompose(graph: ComputationalGraph, assignment: Mapping[ModelVar, int]) -> Decomposition:
    """Stages ``V_k = {i : c_i <= k <= d_i}`` and ``E_k = {(i, j) : c_j = k}``."""
    violations = check_feasible(build_model(graph), assignment)
    if violations:
        raise InfeasibleAssignment(violations)
    n = graph.n
    n_stages = assignment[K]
    cs = tuple(assignment[c(i)] for i in range(n))
    ds = tuple(assignment[d(i)] for i in range(n))
    es = tuple(assignment[e(i)] for i in range(n))
    graph_sources = set(graph.sources)
    stages = []
    for k in range(1, n_stages + 1):
        verts = tuple(i for i in range(n) if cs[i] <= k <= ds[i])
        edges = tuple((x.src, x.dst) for x in graph.edges if cs[x.dst] == k)
        has_in = {j for _, j in edges}
        has_out = {i for i, _ in edges}
        stages.append(Stage(
            k=k,
            vertices=verts,
            edges=edges,
            sources=tuple(i for i in verts if i not in has_in),
            sinks=tuple(i for i in verts if i not in has_out),
            shared_in=tuple(i for i in verts if cs[i] < k or (k == 1 and i in graph_sources)),
            shared_out=tuple(i for i in verts if ds[i] > k),
        ))
    return Decomposition(graph, n_stages, cs, ds, es, tuple(stages))


@dataclass(frozen=True)
class SharingReport:
    K: int
    wk: int
    spans: tuple[int, ...]
    weights: tuple[int, ...]
    contributions: tuple[int, ...]
    total: int
    objective: int

    @property
    def shared_vertices(self) -> list[int]:
        return [i for i, s in enumerate(self.spans) if s > 0]


def sharing_report(decomp: Decomposition, wk: int = 1) -> SharingReport:
    spans = tuple(dj - cj for cj, dj in zip(decomp.c, decomp.d))
    weights = decomp.graph.weights
    contrib = tuple(s * w for s, w in zip(spans, weights))
    total = sum(contrib)
    return SharingReport(decomp.K, wk, spans, weights, contrib, total, wk * decomp.K + total)


# --- interchange ---------------------------------------------------------------

def decomposition_to_dict(decomp: Decomposition) -> dict:
    return {
        "K": decomp.K,
        "assignment": [{"id": i, "c": decomp.c[i], "d": decomp.d[i], "e": decomp.e[i]}
                       for i in range(decomp.graph.n)],
        "stages": [{"k": s.k, "vertices": list(s.vertices),
                    "edges": [list(x) for x in s.edges], "shared_out": list(s.shared_out)}
                   for s in decomp.stages],
    }


def write_decomposition_json(decomp: Decomposition) -> str:
    return json.dumps(decomposition_to_dict(decomp), indent=2) + "\n"


# --- rendering -----------------------------------------------------------------

PALETTE = ("#1f77b4", "#2ca02c", "#9467bd", "#d62728", "#ff7f0e", "#8c564b",
           "#e377c2", "#7f7f7f", "#bcbd22", "#17becf", "#393b79", "#637939")


def stage_color(k: int) -> str:
    return PALETTE[(k - 1) % len(PALETTE)]


def render_dot(decomp: Decomposition) -> str:
    """Graphviz source: vertices and edges coloured by stage, swept edges
    drawn as heavy triple lines, shared vertices with a double outline."""
    g = decomp.graph
    lines = ["digraph decomposition {",
             "  rankdir=TB;",
             '  node [shape=circle, style=filled, fontcolor=white, fontname="Helvetica"];',
             "  edge [arrowsize=0.7];"]
    for v in g.vertices:
        i = v.id
        attrs = [f"label=<{i}<SUB>{v.weight}</SUB>>",
                 f'fillcolor="{stage_color(decomp.c[i])}"']
        if decomp.d[i] > decomp.c[i]:
            attrs.append("peripheries=2")
        if v.label:
            attrs.append(f"tooltip={json.dumps(v.label)}")
        lines.append(f"  {i} [{', '.join(attrs)}];")
    for x in g.edges:
        col = stage_color(decomp.c[x.dst])
        if x.swept:
            lines.append(f'  {x.src} -> {x.dst} [color="{col}:invis:{col}:invis:{col}", penwidth=3];')
        else:
            lines.append(f'  {x.src} -> {x.dst} [color="{col}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"


# --- kernels -------------------------------------------------------------------

def _operand(arg) -> str:
    if isinstance(arg, Fraction):
        return f"({format_const(arg)})"
    return f"t{arg}"


def _statement(j: int, expr) -> str:
    if expr.kind == "shift":
        axis, off = SHIFT_OFFSETS[expr.op]
        sign = "+" if off > 0 else "-"
        return f"t{j} = IN(t{expr.args[0]}, {axis}{sign}{abs(off)});"
    if expr.kind == "neg":
        return f"t{j} = -t{expr.args[0]};"
    if expr.kind == "binary":
        a, b = expr.args
        return f"t{j} = {_operand(a)} {expr.op} {_operand(b)};"
    raise ValueError(f"vertex {j} of kind {expr.kind!r} has no statement")


def emit_stage_kernels(decomp: Decomposition, program: StencilProgram | None = None) -> list[str]:
    """One kernel per stage, in the neutral single-assignment syntax.

    ``in`` lists the values a stage receives (graph inputs for stage 1, values
    created earlier otherwise); ``out`` lists the values it hands on (shared
    values, plus the graph outputs in the last stage).  Statements follow
    topological order with ties broken by vertex id.
    """
    g = decomp.graph
    if g.exprs is None:
        raise MissingExprMetadata()
    order = topological_order(g)
    sinks = set(g.sinks)
    named: dict[int, str] = {}
    if program is not None:
        names = {name for name, _ in program.inputs + program.lets + program.outputs}
        named = {v.id: v.label for v in g.vertices if v.label in names}
    kernels = []
    for stage in decomp.stages:
        k = stage.k
        created = set(stage.created)
        outs = [i for i in stage.vertices if decomp.d[i] > k or (k == decomp.K and i in sinks)]
        lines = [f"kernel stage_{k}",
                 "in: " + ", ".join(f"t{i}" for i in stage.shared_in) + ";",
                 "out: " + ", ".join(f"t{i}" for i in outs) + ";"]
        for j in order:
            if j in created:
                stmt = _statement(j, g.exprs[j])
                lines.append(f"{stmt}  # {named[j]}" if j in named else stmt)
        lines.append("end")
        kernels.append("\n".join(lines) + "\n")
    return kernels
