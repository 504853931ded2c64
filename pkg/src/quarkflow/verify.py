"""Independent checks on decompositions, and a brute-force optimum for small
graphs.

Nothing here reuses the flow solver.  :func:`verify` rebuilds stage structure
from the stage lists alone, and :func:`brute_force_optimum` enumerates
creating stages directly, settling the effective stages with a Bellman-Ford
feasibility test.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Any, Iterable, Mapping, Sequence

from .errors import CycleFound, Infeasible, TooLarge
from .graph import ComputationalGraph, make_graph, swept_depth, topological_order, validate
from .model import GROUND, K, ModelVar, c, d, e

StageLabels = dict  # vertex id -> non-negative label


def atomic_labels(vertices: Iterable[int],
                  edges: Iterable[tuple[int, int, bool]]) -> StageLabels:
    """Longest swept-edge count over paths ending at each vertex of a stage.

    A vertex without incoming edges gets 0; otherwise the maximum over its
    incoming edges of the source label plus one for a swept edge.  The stage
    is atomic exactly when no label exceeds 1.
    """
    verts = list(dict.fromkeys(vertices))
    pred: dict[int, list[tuple[int, bool]]] = {v: [] for v in verts}
    succ: dict[int, list[int]] = {v: [] for v in verts}
    indeg = {v: 0 for v in verts}
    for src, dst, swept in edges:
        for v in (src, dst):
            if v not in pred:
                verts.append(v)
                pred[v], succ[v], indeg[v] = [], [], 0
        pred[dst].append((src, bool(swept)))
        succ[src].append(dst)
        indeg[dst] += 1
    ready = [v for v in verts if indeg[v] == 0]
    labels: StageLabels = {}
    while ready:
        j = ready.pop()
        labels[j] = max((labels[i] + s for i, s in pred[j]), default=0)
        for k in succ[j]:
            indeg[k] -= 1
            if indeg[k] == 0:
                ready.append(k)
    if len(labels) != len(verts):
        stuck = [v for v in verts if v not in labels]
        raise CycleFound(stuck)
    return {v: labels[v] for v in verts}


def _double_swept_path(labels: StageLabels,
                       pred: Mapping[int, list[tuple[int, bool]]]) -> list[int] | None:
    """Walk back from a label-2 vertex along label-realising edges."""
    target = next((v for v in sorted(labels) if labels[v] == 2), None)
    if target is None:
        return None
    path = [target]
    j = target
    while pred[j]:
        for i, s in pred[j]:
            if labels[i] + s == labels[j]:
                break
        path.append(i)
        j = i
    return path[::-1]


def max_swept_on_paths(vertices: Iterable[int], edges: Iterable[tuple[int, int, bool]]) -> int:
    """Exhaustive path enumeration; exponential, meant as a test oracle."""
    succ: dict[int, list[tuple[int, bool]]] = {v: [] for v in vertices}
    for src, dst, swept in edges:
        succ.setdefault(src, []).append((dst, bool(swept)))
        succ.setdefault(dst, [])
    best = 0
    stack = [(v, 0) for v in succ]
    while stack:
        v, count = stack.pop()
        best = max(best, count)
        for w, s in succ[v]:
            stack.append((w, count + s))
    return best


# --- verification ----------------------------------------------------------------

@dataclass
class CriterionResult:
    passed: bool = True
    message: str = ""
    witness: Any = None

    def fail(self, message: str, witness: Any) -> None:
        if self.passed:
            self.passed, self.message, self.witness = False, message, witness


@dataclass
class VerificationReport:
    criteria: dict[int, CriterionResult] = field(default_factory=dict)
    labels: list[StageLabels] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.criteria.values())

    def to_dict(self) -> dict:
        out: dict[str, Any] = {"overall": "pass" if self.passed else "fail"}
        for n, r in sorted(self.criteria.items()):
            out[f"criterion{n}"] = {"result": "pass" if r.passed else "fail",
                                    "message": r.message, "witness": r.witness}
        return out


def _stage_lists(decomposition: Any) -> list[tuple[list[int], list[tuple[int, int]]]]:
    if hasattr(decomposition, "stages") and not isinstance(decomposition, Mapping):
        return [(list(s.vertices), [tuple(x) for x in s.edges]) for s in decomposition.stages]
    stages = decomposition["stages"]
    return [(list(s["vertices"]), [tuple(x) for x in s["edges"]]) for s in stages]


def verify(graph: ComputationalGraph, decomposition: Any) -> VerificationReport:
    """Check a decomposition against the three decomposition criteria.

    ``decomposition`` is a :class:`~quarkflow.decompose.Decomposition` or its
    JSON form; only the per-stage vertex and edge lists are read.  Each failed
    criterion reports its first witness.
    """
    stages = _stage_lists(decomposition)
    graph_edges = {(x.src, x.dst) for x in graph.edges}
    swept = graph.swept_set
    r1, r2, r3 = CriterionResult(), CriterionResult(), CriterionResult()
    report = VerificationReport({1: r1, 2: r2, 3: r3})

    owner: dict[tuple[int, int], list[int]] = {}
    for k, (verts, edges) in enumerate(stages, start=1):
        vset = set(verts)
        for edge in edges:
            if edge not in graph_edges:
                r1.fail(f"stage {k} holds {edge}, which is not an edge of the graph",
                        {"stage": k, "edge": list(edge)})
                continue
            if edge[0] not in vset or edge[1] not in vset:
                r1.fail(f"stage {k} holds edge {edge} without both endpoints",
                        {"stage": k, "edge": list(edge)})
            owner.setdefault(edge, []).append(k)
    for x in graph.edges:
        ks = owner.get((x.src, x.dst), [])
        if len(ks) != 1:
            r1.fail(f"edge ({x.src}, {x.dst}) belongs to {len(ks)} stages",
                    {"edge": [x.src, x.dst], "stages": ks})
    for j in range(graph.n):
        ks = sorted({k for i in graph.pred[j] for k in owner.get((i, j), [])})
        if len(ks) > 1:
            r1.fail(f"incoming edges of vertex {j} are split across stages {ks}",
                    {"vertex": j, "stages": ks})

    if not stages:
        r2.fail("decomposition has no stages", None)
    else:
        graph_sources = set(graph.sources)
        for k, (verts, edges) in enumerate(stages, start=1):
            has_in = {dst for _, dst in edges}
            srcs = [v for v in verts if v not in has_in]
            if k == 1:
                extra = sorted(set(srcs) - graph_sources)
                missing = sorted(graph_sources - set(srcs))
                if extra:
                    r2.fail(f"vertex {extra[0]} is a source of stage 1 but not of the graph",
                            {"stage": 1, "vertex": extra[0]})
                elif missing:
                    r2.fail(f"graph source {missing[0]} is not a source of stage 1",
                            {"stage": 1, "vertex": missing[0]})
            else:
                prev = set(stages[k - 2][0])
                for v in srcs:
                    if v not in prev:
                        r2.fail(f"source {v} of stage {k} is missing from stage {k - 1}",
                                {"stage": k, "vertex": v})
                        break
        last = set(stages[-1][0])
        for t in graph.sinks:
            if t not in last:
                r2.fail(f"graph sink {t} is not in the last stage", {"stage": len(stages), "vertex": t})
                break

    for k, (verts, edges) in enumerate(stages, start=1):
        triples = [(i, j, (i, j) in swept) for i, j in edges if (i, j) in graph_edges]
        try:
            labels = atomic_labels(verts, triples)
        except CycleFound as exc:
            r3.fail(f"stage {k} contains a cycle", {"stage": k, "cycle": exc.cycle})
            report.labels.append({})
            continue
        report.labels.append(labels)
        if labels and max(labels.values()) > 1:
            pred: dict[int, list[tuple[int, bool]]] = {v: [] for v in labels}
            for i, j, s in triples:
                pred[j].append((i, s))
            path = _double_swept_path(labels, pred)
            r3.fail(f"stage {k} has a path through two swept edges",
                    {"stage": k, "path": path, "label": 2})
    return report


def effective_stage_labels(decomp: Any) -> list[StageLabels]:
    """Per-stage labels read off the effective stages: ``e_i - c_i`` where the
    vertex is created, 0 where it is carried in."""
    out = []
    for stage in decomp.stages:
        k = stage.k
        out.append({i: (decomp.e[i] - decomp.c[i]) if decomp.c[i] == k else 0
                    for i in stage.vertices})
    return out


# --- brute-force optimum ------------------------------------------------------------

def feasible_effective_stages(graph: ComputationalGraph, cs: Sequence[int]) -> list[int] | None:
    """Bellman-Ford over the effective-stage constraints with ``c`` fixed.

    Variables are e_0..e_{n-1} plus a zero node; ``x - y <= b`` becomes an
    edge ``y -> x`` of length ``b``.  Returns shortest distances (a feasible
    labelling) or None on a negative cycle.
    """
    n = graph.n
    z = n
    arcs: list[tuple[int, int, int]] = []
    for i in range(n):
        arcs.append((z, i, cs[i] + 1))
        low = cs[i] + 1 if graph.has_incoming_swept[i] else cs[i]
        arcs.append((i, z, -low))
    for x in graph.edges:
        arcs.append((x.dst, x.src, -1 if x.swept else 0))
    dist = [0] * (n + 1)  # every node starts reachable: a virtual source at 0
    for _ in range(n + 1):
        changed = False
        for y, x, b in arcs:
            if dist[y] + b < dist[x]:
                dist[x] = dist[y] + b
                changed = True
        if not changed:
            return [dist[i] - dist[z] for i in range(n)]
    return None


def brute_force_optimum(graph: ComputationalGraph, wk: int = 1, max_vertices: int = 8,
                        max_K: int | None = None) -> tuple[int, dict[ModelVar, int]]:
    """Exact optimum of the decomposition program by enumeration.

    Creating stages are enumerated in topological order with sources pinned to
    1 and ``c`` non-decreasing along edges; each choice keeps the cheapest
    discarding stages, and partial sharing cost prunes the search.  Stage
    counts are tried upward from the swept depth.  Every stage boundary has at
    least one value crossing it, so a ``K``-stage solution costs at least
    ``wk*K + (K-1)*min(w)``; with ``max_K`` left as None the search stops once
    that bound reaches the best objective found, which makes the result exact.
    """
    validate(graph)
    n = graph.n
    if n > max_vertices:
        raise TooLarge(f"{n} vertices exceeds the oracle limit of {max_vertices}")
    order = topological_order(graph)
    preds = graph.pred
    swept = graph.swept_set
    in_swept = graph.has_incoming_swept
    is_sink = [not s for s in graph.succ]
    w = graph.weights
    w_min = min(w)
    depth = swept_depth(graph)

    best: list[Any] = [None, None]  # objective, (K, c, d)

    def search(n_stages: int) -> None:
        cs = [0] * n
        es = [0] * n
        dlb = [0] * n
        base = wk * n_stages

        def rec(pos: int, partial: int) -> None:
            if best[0] is not None and base + partial >= best[0]:
                return
            if pos == n:
                e_sol = feasible_effective_stages(graph, cs)
                if e_sol is not None:
                    best[0] = base + partial
                    best[1] = (n_stages, list(cs), list(dlb), e_sol)
                return
            j = order[pos]
            ps = preds[j]
            lo = max((cs[p] for p in ps), default=1)
            hi = n_stages if ps else 1
            for cj in range(lo, hi + 1):
                ej = cj + 1 if in_swept[j] else cj
                for p in ps:
                    ej = max(ej, es[p] + ((p, j) in swept))
                if ej > cj + 1:
                    continue
                saved = [dlb[p] for p in ps]
                extra = 0
                for p in ps:
                    if cj > dlb[p]:
                        extra += w[p] * (cj - dlb[p])
                        dlb[p] = cj
                cs[j], es[j] = cj, ej
                dlb[j] = n_stages if is_sink[j] else cj
                extra += w[j] * (dlb[j] - cj)
                rec(pos + 1, partial + extra)
                for p, v in zip(ps, saved):
                    dlb[p] = v

        rec(0, 0)

    n_stages = max(depth, 1)
    while True:
        if max_K is not None and n_stages > max_K:
            break
        if best[0] is not None and wk * n_stages + (n_stages - 1) * w_min >= best[0]:
            break
        if best[0] is None and max_K is None and n_stages > depth + n + 1:
            break
        search(n_stages)
        n_stages += 1
    if best[0] is None:
        raise Infeasible(f"no decomposition with at most {n_stages - 1} stages")
    n_stages, cs, ds, es = best[1]
    assignment = {GROUND: 0, K: n_stages}
    for i in range(n):
        assignment[c(i)], assignment[d(i)], assignment[e(i)] = cs[i], ds[i], es[i]
    return best[0], assignment


def random_graph(seed: int, n_vertices: int, edge_prob: float = 0.4,
                 swept_prob: float = 0.4, max_weight: int = 4) -> ComputationalGraph:
    """Seeded random DAG with edges only from lower to higher ids.

    A draw with no edges at all (for more than one vertex) is replaced by the
    chain 0 -> 1 -> ... -> n-1, keeping the drawn swept flags for it.
    """
    if n_vertices < 1:
        raise ValueError("n_vertices must be >= 1")
    rng = random.Random(seed)
    weights = [rng.randint(1, max_weight) for _ in range(n_vertices)]
    edges = []
    for i in range(n_vertices):
        for j in range(i + 1, n_vertices):
            if rng.random() < edge_prob:
                edges.append((i, j, rng.random() < swept_prob))
    if not edges and n_vertices > 1:
        edges = [(i, i + 1, rng.random() < swept_prob) for i in range(n_vertices - 1)]
    return make_graph(weights, edges)
