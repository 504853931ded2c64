"""The decomposition integer program as a system of difference constraints.

Every vertex ``i`` gets a creating stage ``c_i``, a discarding stage ``d_i``
and an effective stage ``e_i``; ``K`` is the stage count and ``ground`` is a
reference variable fixed at 0 that carries the source pinning ``c_i = 1``.
Each constraint has the form ``u - v <= bound`` (or ``== bound``) with a bound
in {-1, 0, 1}, so the constraint matrix is totally unimodular.

Constraint families, numbered as they are reported in violations:

1. ``c_i - d_i <= 0``
2. ``c_i - ground == 1``          for graph sources
3. ``d_i - K == 0``               for graph sinks
4. ``c_i - c_j <= 0``, ``c_j - d_i <= 0``   for every edge (i, j)
5. ``c_i - e_i <= 0``, ``e_i - c_i <= 1``
6. ``e_i - e_j <= 0``             for non-swept edges
7. ``e_i - e_j <= -1``            for swept edges
8. ``c_i - e_i <= -1``            for vertices with an incoming swept edge
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

from .errors import MissingVar
from .graph import ComputationalGraph, validate

_KIND_ORDER = {"ground": 0, "K": 1, "c": 2, "d": 3, "e": 4}


@dataclass(frozen=True)
class ModelVar:
    kind: str
    i: int | None = None

    def __str__(self) -> str:
        return self.kind if self.i is None else f"{self.kind}{self.i}"

    def sort_key(self) -> tuple[int, int, int]:
        if self.i is None:
            return (_KIND_ORDER[self.kind], 0, 0)
        return (2, self.i, _KIND_ORDER[self.kind])

    @classmethod
    def parse(cls, text: str) -> ModelVar:
        if text in ("K", "ground"):
            return cls(text)
        if text[:1] in "cde" and text[1:].isdigit():
            return cls(text[0], int(text[1:]))
        raise ValueError(f"not a model variable: {text!r}")


GROUND = ModelVar("ground")
K = ModelVar("K")


def c(i: int) -> ModelVar:
    return ModelVar("c", i)


def d(i: int) -> ModelVar:
    return ModelVar("d", i)


def e(i: int) -> ModelVar:
    return ModelVar("e", i)


@dataclass(frozen=True)
class DiffConstraint:
    u: ModelVar
    v: ModelVar
    bound: int
    equality: bool = False
    family: int = 0

    def __str__(self) -> str:
        rel = "==" if self.equality else "<="
        return f"{self.u} - {self.v} {rel} {self.bound}"

    def holds(self, values: Mapping[ModelVar, int]) -> bool:
        diff = values[self.u] - values[self.v]
        return diff == self.bound if self.equality else diff <= self.bound


@dataclass(frozen=True)
class DecompositionModel:
    graph: ComputationalGraph
    vars: tuple[ModelVar, ...]
    constraints: tuple[DiffConstraint, ...]
    objective: dict[ModelVar, int]
    wk: int = 1

    def expanded(self) -> list[DiffConstraint]:
        """Constraints with each equality split into a pair of inequalities."""
        out = []
        for con in self.constraints:
            if con.equality:
                out.append(DiffConstraint(con.u, con.v, con.bound, False, con.family))
                out.append(DiffConstraint(con.v, con.u, -con.bound, False, con.family))
            else:
                out.append(con)
        return out

    def dump(self) -> str:
        lines = [str(con) for con in self.constraints]
        terms = []
        # K first, then per vertex the d term before the c term
        order = {"ground": 0, "K": 1, "d": 2, "c": 3, "e": 4}
        for var in sorted(self.objective, key=lambda v: (v.i is not None, v.i or 0, order[v.kind])):
            coef = self.objective[var]
            if coef:
                sign = "-" if coef < 0 else "+"
                terms.append(f"{sign} {abs(coef)}*{var}")
        obj = " ".join(terms)
        obj = obj[2:] if obj.startswith("+ ") else obj
        lines.append(f"min: {obj}")
        return "\n".join(lines) + "\n"


def build_model(graph: ComputationalGraph, wk: int = 1) -> DecompositionModel:
    """Emit the eight constraint families and the blended objective
    ``wk*K + sum_i w_i*(d_i - c_i)`` for a validated graph."""
    if not isinstance(wk, int) or wk < 1:
        raise ValueError("wk must be a positive integer")
    report = validate(graph)
    n = graph.n
    vars_ = [GROUND, K]
    for i in range(n):
        vars_ += [c(i), d(i), e(i)]

    cons: list[DiffConstraint] = []
    add = cons.append
    for i in range(n):
        add(DiffConstraint(c(i), d(i), 0, family=1))
    for i in report.sources:
        add(DiffConstraint(c(i), GROUND, 1, True, family=2))
    for i in report.sinks:
        add(DiffConstraint(d(i), K, 0, True, family=3))
    for edge in graph.edges:
        i, j = edge.src, edge.dst
        add(DiffConstraint(c(i), c(j), 0, family=4))
        add(DiffConstraint(c(j), d(i), 0, family=4))
    for i in range(n):
        add(DiffConstraint(c(i), e(i), 0, family=5))
        add(DiffConstraint(e(i), c(i), 1, family=5))
    for edge in graph.edges:
        if edge.swept:
            add(DiffConstraint(e(edge.src), e(edge.dst), -1, family=7))
        else:
            add(DiffConstraint(e(edge.src), e(edge.dst), 0, family=6))
    for i in range(n):
        if graph.has_incoming_swept[i]:
            add(DiffConstraint(c(i), e(i), -1, family=8))

    objective = {var: 0 for var in vars_}
    objective[K] = wk
    for i, w in enumerate(graph.weights):
        objective[d(i)] = w
        objective[c(i)] = -w
    return DecompositionModel(graph, tuple(vars_), tuple(cons), objective, wk)


def _require(model: DecompositionModel, assignment: Mapping[ModelVar, int]) -> None:
    for var in model.vars:
        if var not in assignment:
            raise MissingVar(var)


def objective_value(model: DecompositionModel, assignment: Mapping[ModelVar, int]) -> int:
    values = dict(assignment)
    values.setdefault(GROUND, 0)
    _require(model, values)
    return sum(coef * values[var] for var, coef in model.objective.items() if coef)


def check_feasible(model: DecompositionModel,
                   assignment: Mapping[ModelVar, int]) -> list[DiffConstraint]:
    """Return the violated constraints; empty iff the assignment is feasible.

    ``ground`` defaults to 0 when absent, since it is pinned by convention.
    """
    values = dict(assignment)
    values.setdefault(GROUND, 0)
    _require(model, values)
    return [con for con in model.constraints if not con.holds(values)]
