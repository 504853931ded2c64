"""Weighted computational graphs with swept edges.

A vertex is an intermediate value of a stencil update formula, stored once per
grid point; its weight is the storage it takes there.  An edge ``(i, j)`` says
that value ``j`` is computed directly from value ``i``.  A *swept* edge reads
``i`` at a neighbouring grid point instead of the same one.
"""

from __future__ import annotations

import heapq
import json
from dataclasses import dataclass, field
from functools import cached_property
from typing import Any, Iterable, Sequence

from .errors import CycleFound, DuplicateEdge, EmptyGraph, GraphError, ParseError, SchemaError


@dataclass(frozen=True)
class Vertex:
    id: int
    weight: int = 1
    label: str | None = None


@dataclass(frozen=True)
class Edge:
    src: int
    dst: int
    swept: bool = False


@dataclass(frozen=True)
class ComputationalGraph:
    vertices: tuple[Vertex, ...]
    edges: tuple[Edge, ...]
    # Per-vertex expression records from the frontend; absent for graphs read
    # from JSON.  Not part of equality.
    exprs: tuple[Any, ...] | None = field(default=None, compare=False, repr=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "vertices", tuple(self.vertices))
        object.__setattr__(self, "edges", tuple(self.edges))

    def __len__(self) -> int:
        return len(self.vertices)

    @property
    def n(self) -> int:
        return len(self.vertices)

    @cached_property
    def weights(self) -> tuple[int, ...]:
        return tuple(v.weight for v in self.vertices)

    @cached_property
    def succ(self) -> tuple[tuple[int, ...], ...]:
        out: list[list[int]] = [[] for _ in self.vertices]
        for e in self.edges:
            out[e.src].append(e.dst)
        return tuple(tuple(s) for s in out)

    @cached_property
    def pred(self) -> tuple[tuple[int, ...], ...]:
        inc: list[list[int]] = [[] for _ in self.vertices]
        for e in self.edges:
            inc[e.dst].append(e.src)
        return tuple(tuple(p) for p in inc)

    @cached_property
    def swept_set(self) -> frozenset[tuple[int, int]]:
        return frozenset((e.src, e.dst) for e in self.edges if e.swept)

    @property
    def sources(self) -> list[int]:
        return [i for i, p in enumerate(self.pred) if not p]

    @property
    def sinks(self) -> list[int]:
        return [i for i, s in enumerate(self.succ) if not s]

    @cached_property
    def has_incoming_swept(self) -> tuple[bool, ...]:
        flags = [False] * self.n
        for e in self.edges:
            if e.swept:
                flags[e.dst] = True
        return tuple(flags)

    @property
    def n_swept(self) -> int:
        return sum(1 for e in self.edges if e.swept)


def make_graph(weights: int | Sequence[int],
               edges: Iterable[tuple[int, int] | tuple[int, int, bool]],
               labels: Sequence[str | None] | None = None) -> ComputationalGraph:
    """Build a graph from a vertex count (unit weights) or a weight list, and
    ``(src, dst)`` or ``(src, dst, swept)`` tuples."""
    if isinstance(weights, int):
        weights = [1] * weights
    labels = labels or [None] * len(weights)
    vertices = [Vertex(i, w, lab) for i, (w, lab) in enumerate(zip(weights, labels))]
    es = []
    for e in edges:
        src, dst = e[0], e[1]
        es.append(Edge(src, dst, bool(e[2]) if len(e) > 2 else False))
    return ComputationalGraph(tuple(vertices), tuple(es))


@dataclass(frozen=True)
class ValidationReport:
    n_vertices: int
    n_edges: int
    n_swept: int
    sources: list[int]
    sinks: list[int]
    isolated: list[int]
    acyclic: bool = True


def _find_cycle(n: int, succ: Sequence[Sequence[int]]) -> list[int] | None:
    color = [0] * n
    parent = [-1] * n
    for root in range(n):
        if color[root]:
            continue
        stack = [(root, iter(succ[root]))]
        color[root] = 1
        while stack:
            node, it = stack[-1]
            for nxt in it:
                if color[nxt] == 0:
                    color[nxt] = 1
                    parent[nxt] = node
                    stack.append((nxt, iter(succ[nxt])))
                    break
                if color[nxt] == 1:
                    cycle = [node]
                    while cycle[-1] != nxt:
                        cycle.append(parent[cycle[-1]])
                    return cycle[::-1]
            else:
                color[node] = 2
                stack.pop()
    return None


def validate(graph: ComputationalGraph) -> ValidationReport:
    """Check the DAG invariants and describe the graph's boundary.

    Raises EmptyGraph, CycleFound (self-loops included), DuplicateEdge, or
    GraphError for non-dense ids, bad weights and dangling edge endpoints.
    """
    n = graph.n
    if n == 0:
        raise EmptyGraph()
    for i, v in enumerate(graph.vertices):
        if v.id != i:
            raise GraphError(f"vertex ids must be dense and ordered; position {i} holds id {v.id}")
        if not isinstance(v.weight, int) or v.weight < 1:
            raise GraphError(f"vertex {i}: weight must be >= 1")
    seen: set[tuple[int, int]] = set()
    for e in graph.edges:
        if not (0 <= e.src < n and 0 <= e.dst < n):
            raise GraphError(f"edge ({e.src}, {e.dst}) references an unknown vertex")
        if e.src == e.dst:
            raise CycleFound([e.src])
        if (e.src, e.dst) in seen:
            raise DuplicateEdge(e.src, e.dst)
        seen.add((e.src, e.dst))
    cycle = _find_cycle(n, graph.succ)
    if cycle is not None:
        raise CycleFound(cycle)
    isolated = [i for i in range(n) if not graph.succ[i] and not graph.pred[i]]
    return ValidationReport(n, len(graph.edges), graph.n_swept,
                            graph.sources, graph.sinks, isolated)


def topological_order(graph: ComputationalGraph) -> list[int]:
    """Kahn's algorithm, always releasing the smallest ready vertex id first."""
    indeg = [len(p) for p in graph.pred]
    ready = [i for i, d in enumerate(indeg) if d == 0]
    heapq.heapify(ready)
    order = []
    while ready:
        i = heapq.heappop(ready)
        order.append(i)
        for j in graph.succ[i]:
            indeg[j] -= 1
            if indeg[j] == 0:
                heapq.heappush(ready, j)
    if len(order) != graph.n:
        raise CycleFound(_find_cycle(graph.n, graph.succ) or [])
    return order


def swept_labels(graph: ComputationalGraph) -> list[int]:
    """Maximum number of swept edges on any path ending at each vertex."""
    labels = [0] * graph.n
    swept = graph.swept_set
    for j in topological_order(graph):
        best = 0
        for i in graph.pred[j]:
            best = max(best, labels[i] + ((i, j) in swept))
        labels[j] = best
    return labels


def swept_depth(graph: ComputationalGraph) -> int:
    """Largest number of swept edges on a directed path; a lower bound on the
    number of atomic stages."""
    labels = swept_labels(graph)
    return max((labels[t] for t in graph.sinks), default=0)


# --- JSON interchange -------------------------------------------------------

_TOP_KEYS = {"vertices", "edges"}
_VERTEX_KEYS = {"id", "weight", "label"}
_EDGE_KEYS = {"src", "dst", "swept"}


def graph_to_dict(graph: ComputationalGraph) -> dict:
    vertices = []
    for v in graph.vertices:
        rec: dict[str, Any] = {"id": v.id, "weight": v.weight}
        if v.label is not None:
            rec["label"] = v.label
        vertices.append(rec)
    edges = [{"src": e.src, "dst": e.dst, "swept": e.swept} for e in graph.edges]
    return {"vertices": vertices, "edges": edges}


def write_graph_json(graph: ComputationalGraph) -> str:
    return json.dumps(graph_to_dict(graph), indent=2) + "\n"


def _is_int(x: object) -> bool:
    return isinstance(x, int) and not isinstance(x, bool)


def _check_keys(obj: object, allowed: set[str], required: set[str], where: str) -> dict:
    if not isinstance(obj, dict):
        raise SchemaError(where, f"{where} must be an object")
    for key in obj:
        if key not in allowed:
            raise SchemaError(f"{where}.{key}", f"unknown field {where}.{key}")
    for key in sorted(required):
        if key not in obj:
            raise SchemaError(f"{where}.{key}", f"missing field {where}.{key}")
    return obj


def graph_from_dict(obj: object) -> ComputationalGraph:
    obj = _check_keys(obj, _TOP_KEYS, _TOP_KEYS, "graph")
    if not isinstance(obj["vertices"], list):
        raise SchemaError("vertices", "vertices must be a list")
    if not isinstance(obj["edges"], list):
        raise SchemaError("edges", "edges must be a list")
    by_id: dict[int, Vertex] = {}
    for k, rec in enumerate(obj["vertices"]):
        where = f"vertices[{k}]"
        rec = _check_keys(rec, _VERTEX_KEYS, {"id", "weight"}, where)
        vid, weight, label = rec["id"], rec["weight"], rec.get("label")
        if not _is_int(vid) or vid < 0:
            raise SchemaError(f"{where}.id", "id must be a non-negative integer")
        if not _is_int(weight):
            raise SchemaError(f"{where}.weight", "weight must be an integer")
        if weight < 1:
            raise SchemaError(f"{where}.weight", "weight must be ≥ 1")
        if label is not None and not isinstance(label, str):
            raise SchemaError(f"{where}.label", "label must be a string")
        if vid in by_id:
            raise SchemaError(f"{where}.id", f"duplicate vertex id {vid}")
        by_id[vid] = Vertex(vid, weight, label)
    if sorted(by_id) != list(range(len(by_id))):
        raise SchemaError("vertices", "vertex ids must be dense 0..n-1")
    edges = []
    for k, rec in enumerate(obj["edges"]):
        where = f"edges[{k}]"
        rec = _check_keys(rec, _EDGE_KEYS, _EDGE_KEYS, where)
        for key in ("src", "dst"):
            if not _is_int(rec[key]) or rec[key] not in by_id:
                raise SchemaError(f"{where}.{key}", f"{where}.{key} references unknown vertex {rec[key]!r}")
        if not isinstance(rec["swept"], bool):
            raise SchemaError(f"{where}.swept", "swept must be a boolean")
        edges.append(Edge(rec["src"], rec["dst"], rec["swept"]))
    return ComputationalGraph(tuple(by_id[i] for i in range(len(by_id))), tuple(edges))


def read_graph_json(text: str) -> ComputationalGraph:
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.lineno, exc.msg) from None
    return graph_from_dict(obj)
