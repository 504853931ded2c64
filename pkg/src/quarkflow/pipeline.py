"""End-to-end runs: graph -> model -> flow network -> decomposition."""

from __future__ import annotations

import random
import statistics
import time
from dataclasses import dataclass
from typing import Callable, Sequence

from .decompose import Decomposition, SharingReport, decompose, sharing_report
from .flow import FlowNetwork, FlowSolution, build_network, extract_assignment, solve_mcnf
from .graph import ComputationalGraph, swept_depth
from .model import DecompositionModel, ModelVar, build_model, objective_value
from .verify import brute_force_optimum, random_graph, verify


@dataclass
class RunResult:
    graph: ComputationalGraph
    model: DecompositionModel
    network: FlowNetwork
    solution: FlowSolution
    assignment: dict[ModelVar, int]
    decomposition: Decomposition
    sharing: SharingReport
    seconds: float

    @property
    def K(self) -> int:
        return self.decomposition.K

    @property
    def objective(self) -> int:
        return objective_value(self.model, self.assignment)


def run(graph: ComputationalGraph, wk: int = 1) -> RunResult:
    """Solve one graph; ``seconds`` covers model building through decomposition."""
    t0 = time.perf_counter()
    model = build_model(graph, wk)
    network = build_network(model)
    solution = solve_mcnf(network)
    assignment = extract_assignment(solution)
    decomp = decompose(graph, assignment)
    seconds = time.perf_counter() - t0
    return RunResult(graph, model, network, solution, assignment, decomp,
                     sharing_report(decomp, wk), seconds)


def summary_lines(result: RunResult) -> list[tuple[str, str]]:
    """Stable ``key: value`` pairs; ``time_ms`` is the only run-dependent one."""
    g = result.graph
    d = result.decomposition
    rep = result.sharing
    swept = g.swept_set
    out = [
        ("vertices", str(g.n)),
        ("edges", str(len(g.edges))),
        ("swept_edges", str(g.n_swept)),
        ("swept_depth", str(swept_depth(g))),
        ("wk", str(rep.wk)),
        ("stages", str(d.K)),
    ]
    for s in d.stages:
        n_sw = sum(1 for x in s.edges if x in swept)
        out.append((f"stage_{s.k}", f"vertices={len(s.vertices)} edges={len(s.edges)} "
                                    f"swept={n_sw} shared_out={len(s.shared_out)}"))
    shared = rep.shared_vertices
    out += [
        ("shared_vertices", " ".join(map(str, shared)) if shared else "-"),
        ("shared_count", str(len(shared))),
        ("shared_weight", str(rep.total)),
        ("objective", str(rep.objective)),
        ("time_ms", f"{result.seconds * 1000:.3f}"),
    ]
    return out


@dataclass(frozen=True)
class SweepRow:
    wk: int
    K: int
    shared_weight: int
    objective: int


def wk_sweep(graph: ComputationalGraph, wks: Sequence[int]) -> tuple[list[SweepRow], bool]:
    """Rerun with each stage weight; the flag says whether K and the shared
    weight stayed the same across all of them."""
    rows = []
    for wk in wks:
        r = run(graph, wk)
        rows.append(SweepRow(wk, r.K, r.sharing.total, r.sharing.objective))
    stable = len({(r.K, r.shared_weight) for r in rows}) <= 1
    return rows, stable


@dataclass(frozen=True)
class BenchRow:
    name: str
    vertices: int
    edges: int
    swept: int
    K: int
    shared_weight: int
    median_ms: float
    budget_ms: float | None

    @property
    def within_budget(self) -> bool:
        return self.budget_ms is None or self.median_ms < self.budget_ms


BUDGET_MS = {"heat3d": 100.0, "euler3d": 10_000.0}


def bench(name: str, factory: Callable[[], ComputationalGraph], repeat: int = 10,
          wk: int = 1) -> BenchRow:
    """Median solve time over ``repeat`` runs (graph construction excluded)."""
    if repeat < 1:
        raise ValueError("repeat must be >= 1")
    graph = factory()
    times = []
    result = None
    for _ in range(repeat):
        result = run(graph, wk)
        times.append(result.seconds * 1000)
    return BenchRow(name, graph.n, len(graph.edges), graph.n_swept, result.K,
                    result.sharing.total, statistics.median(times), BUDGET_MS.get(name))


def oracle_suite(seeds: Sequence[int], max_vertices: int = 8) -> tuple[int, list[int]]:
    """Compare solver and brute-force objectives on seeded random graphs.

    Returns the match count and the seeds that disagreed or failed verification.
    """
    matched, bad = 0, []
    for seed in seeds:
        n = random.Random(seed).randint(1, max_vertices)
        g = random_graph(seed, n)
        r = run(g)
        best, _ = brute_force_optimum(g, max_vertices=max_vertices)
        if r.objective == best and verify(g, r.decomposition).passed:
            matched += 1
        else:
            bad.append(seed)
    return matched, bad
