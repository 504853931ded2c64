"""Minimum-cost transshipment network for the decomposition program, and an
exact-integer network simplex to solve it.

Orientation convention (fixed project-wide): a constraint ``u - v <= b``
becomes an arc ``u -> v`` with cost ``b``.  Node potentials ``pi`` then obey
``cost - pi(u) + pi(v) >= 0`` on every arc at its lower bound, which is the
constraint itself, so optimal potentials are an optimal assignment.  A node's
supply is minus its objective coefficient.

Arc table, by constraint family (flow variable names follow the transshipment
program's own naming ``x_{from,to}``):

====== ====================== =============== ======= ======================
family constraint             arc             cost    lower bound
====== ====================== =============== ======= ======================
1      c_i - d_i <= 0         c_i -> d_i      0       0      x_{c_i,d_i}
2      c_i - ground == 1      c_i -> ground   1       free   x_{c_i,0}
3      d_i - K == 0           d_i -> K        0       free   x_{d_i,K}
4      c_i - c_j <= 0         c_i -> c_j      0       0      x_{c_i,c_j}
4      c_j - d_i <= 0         c_j -> d_i      0       0      x_{c_j,d_i}
5      c_i - e_i <= 0         c_i -> e_i      0       0      x_{c_i,e_i}
5      e_i - c_i <= 1         e_i -> c_i      1       0      x_{e_i,c_i}
6      e_i - e_j <= 0         e_i -> e_j      0       0      x_{e_i,e_j}
7      e_i - e_j <= -1        e_i -> e_j      -1      0      x_{e_i,e_j}
8      c_i - e_i <= -1        c_i -> e_i      -1      0      x_{c_i,e_i}
====== ====================== =============== ======= ======================

Families 5 and 8 give two parallel ``c_i -> e_i`` arcs for a vertex with an
incoming swept edge; the cost-0 one is dominated, so together they act as the
single arc of cost ``-1`` the textbook form writes for that case.  Supplies:
``+w_i`` at ``c_i``, ``-w_i`` at ``d_i``, 0 at ``e_i``, ``-wk`` at ``K`` and
``+wk`` at ``ground``.

Strong duality reads ``primal objective == -(sum of cost * flow)``: the
transshipment problem is a minimisation whose optimum is the negated optimum
of the potential problem.

Free arcs (equalities) carry flow in ``[-M, M]`` with ``M`` far above any
basic flow; a solution touching ``+-M`` raises.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from typing import Mapping

from .errors import InconsistentPinning, NegativeCostCycleWithFreeArcs, NonConvergence, Unbalanced
from .model import GROUND, DecompositionModel, DiffConstraint, ModelVar, c

INF = math.inf


@dataclass(frozen=True)
class FlowNode:
    id: int
    var: ModelVar
    supply: int


@dataclass(frozen=True)
class FlowArc:
    tail: int
    head: int
    cost: int
    free: bool = False
    constraint: DiffConstraint | None = None

    @property
    def lower(self) -> float | int:
        return -INF if self.free else 0


@dataclass(frozen=True)
class FlowNetwork:
    nodes: tuple[FlowNode, ...]
    arcs: tuple[FlowArc, ...]
    model: DecompositionModel | None = field(default=None, compare=False, repr=False)

    @property
    def index(self) -> dict[ModelVar, int]:
        return {node.var: node.id for node in self.nodes}

    @property
    def big_m(self) -> int:
        n_vertices = self.model.graph.n if self.model is not None else len(self.nodes)
        max_cost = max((abs(a.cost) for a in self.arcs), default=0)
        total = sum(abs(node.supply) for node in self.nodes)
        return (n_vertices + 2) * (max_cost + 1) * max(total, 1)

    def dimacs(self) -> str:
        """DIMACS ``min`` format; free arcs carry explicit ``-M .. M`` bounds
        and ordinary arcs use ``M`` as their upper bound."""
        big = self.big_m
        lines = [f"c quarkflow transshipment network, M = {big}",
                 f"p min {len(self.nodes)} {len(self.arcs)}"]
        for node in self.nodes:
            if node.supply:
                lines.append(f"n {node.id + 1} {node.supply}")
        for arc in self.arcs:
            lo = -big if arc.free else 0
            lines.append(f"a {arc.tail + 1} {arc.head + 1} {lo} {big} {arc.cost}")
        return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class FlowSolution:
    network: FlowNetwork
    flows: tuple[int, ...]
    potentials: dict[ModelVar, int]
    cost: int
    pivots: int = 0

    @property
    def objective(self) -> int:
        """Value of the potential (primal) program implied by strong duality."""
        return -self.cost


def build_network(model: DecompositionModel) -> FlowNetwork:
    """One node per model variable, one arc per constraint (see module table)."""
    order = sorted(model.vars, key=ModelVar.sort_key)
    idx = {var: k for k, var in enumerate(order)}
    supply = {var: -model.objective.get(var, 0) for var in order}
    supply[GROUND] = -sum(v for var, v in supply.items() if var != GROUND)
    nodes = tuple(FlowNode(idx[var], var, supply[var]) for var in order)
    arcs = tuple(FlowArc(idx[con.u], idx[con.v], con.bound, con.equality, con)
                 for con in model.constraints)
    return FlowNetwork(nodes, arcs, model)


def solve_mcnf(network: FlowNetwork, max_pivots: int | None = None) -> FlowSolution:
    """Network simplex over a strongly feasible spanning-tree basis.

    Entering arcs come from a cyclic block search in arc-index order; the
    leaving arc is the last blocking arc met when walking the pivot cycle from
    its apex in the direction of flow, which rules out cycling.  All
    arithmetic is on Python integers.
    """
    nodes, arcs = network.nodes, network.arcs
    n, m = len(nodes), len(arcs)
    total = sum(node.supply for node in nodes)
    if total:
        raise Unbalanced(total)
    if n == 0:
        return FlowSolution(network, (), {}, 0)
    big = network.big_m
    if max_pivots is None:
        max_pivots = 50 * max(m, 1) ** 2

    supply = [node.supply for node in nodes]
    tail = [a.tail for a in arcs]
    head = [a.head for a in arcs]
    cost = [a.cost for a in arcs]
    cap: list[float | int] = []
    for a in arcs:
        if a.free:
            # shift flow by +M so the arc lives on [0, 2M]
            supply[a.tail] += big
            supply[a.head] -= big
            cap.append(2 * big)
        else:
            cap.append(INF)
    flow = [0] * m

    root = n
    faux = (n + 1) * (max((abs(x) for x in cost), default=0) + 1)
    parent = [root] * (n + 1)
    pedge = [-1] * (n + 1)
    depth = [1] * (n + 1)
    pi = [0] * (n + 1)
    children: list[dict[int, None]] = [dict() for _ in range(n + 1)]
    depth[root] = 0
    parent[root] = -1
    for i in range(n):
        a = m + i
        if supply[i] >= 0:
            tail.append(i)
            head.append(root)
            flow.append(supply[i])
            pi[i] = faux
        else:
            tail.append(root)
            head.append(i)
            flow.append(-supply[i])
            pi[i] = -faux
        cost.append(faux)
        cap.append(INF)
        pedge[i] = a
        children[root][i] = None
    n_arcs = m + n
    block = max(1, math.isqrt(n_arcs - 1) + 1)
    pos = 0
    pivots = 0

    while True:
        # pricing: cyclic block search for the most violating arc in a block
        entering, best = -1, 0
        scanned = 0
        while scanned < n_arcs:
            stop = min(scanned + block, n_arcs)
            for k in range(scanned, stop):
                a = pos + k
                if a >= n_arcs:
                    a -= n_arcs
                f = flow[a]
                if f == 0:
                    v = pi[tail[a]] - pi[head[a]] - cost[a]
                elif f == cap[a]:
                    v = cost[a] - pi[tail[a]] + pi[head[a]]
                else:
                    continue
                if v > best:
                    best, entering = v, a
            scanned = stop
            if entering >= 0:
                break
        if entering < 0:
            break
        pos = (pos + scanned) % n_arcs
        pivots += 1
        if pivots > max_pivots:
            raise NonConvergence(max_pivots)

        a = entering
        if flow[a] == 0:
            p, q = tail[a], head[a]
        else:
            p, q = head[a], tail[a]

        up_p: list[int] = []
        up_q: list[int] = []
        x, y = p, q
        while depth[x] > depth[y]:
            up_p.append(x)
            x = parent[x]
        while depth[y] > depth[x]:
            up_q.append(y)
            y = parent[y]
        while x != y:
            up_p.append(x)
            x = parent[x]
            up_q.append(y)
            y = parent[y]

        # the cycle, walked from the apex down to p, across the entering arc,
        # then from q back up to the apex
        cyc_arcs: list[int] = []
        cyc_fwd: list[bool] = []
        cyc_node: list[int] = []
        for z in reversed(up_p):
            e = pedge[z]
            cyc_arcs.append(e)
            cyc_fwd.append(tail[e] == parent[z])
            cyc_node.append(z)
        cyc_arcs.append(a)
        cyc_fwd.append(tail[a] == p)
        cyc_node.append(-1)
        for z in up_q:
            e = pedge[z]
            cyc_arcs.append(e)
            cyc_fwd.append(tail[e] == z)
            cyc_node.append(z)

        delta: float | int = INF
        leave = -1
        for k, e in enumerate(cyc_arcs):
            r = cap[e] - flow[e] if cyc_fwd[k] else flow[e]
            if r <= delta:
                delta, leave = r, k
        if delta == INF:
            raise NegativeCostCycleWithFreeArcs(
                "negative-cost cycle of uncapacitated arcs: the integer program is infeasible")
        if delta:
            for k, e in enumerate(cyc_arcs):
                if cyc_fwd[k]:
                    flow[e] += delta
                else:
                    flow[e] -= delta

        t = cyc_node[leave]
        if t < 0:
            continue  # entering arc went straight to its other bound
        if leave < len(up_p):
            u_in, u_out = p, q
        else:
            u_in, u_out = q, p

        # re-hang the detached subtree of t from u_in, under u_out
        prev, prev_edge = u_out, a
        x = u_in
        while True:
            old_parent, old_edge = parent[x], pedge[x]
            del children[old_parent][x]
            parent[x], pedge[x] = prev, prev_edge
            children[prev][x] = None
            if x == t:
                break
            prev, prev_edge = x, old_edge
            x = old_parent

        stack = [u_in]
        while stack:
            x = stack.pop()
            px, e = parent[x], pedge[x]
            depth[x] = depth[px] + 1
            pi[x] = pi[px] - cost[e] if tail[e] == px else pi[px] + cost[e]
            stack.extend(children[x])

    for i in range(n):
        if flow[m + i]:
            raise NegativeCostCycleWithFreeArcs(
                "no feasible flow: the integer program is unbounded")
    true_flow = []
    for k, arc in enumerate(arcs):
        f = flow[k]
        if arc.free:
            f -= big
            if f <= -big or f >= big:
                raise NegativeCostCycleWithFreeArcs(
                    f"free arc {arc.constraint} reached the bound M = {big}")
        true_flow.append(int(f))

    if len(children[root]) > 1:
        pot = _residual_potentials(network, true_flow, big)
    else:
        pot = pi[:n]
    g = network.index.get(GROUND)
    offset = pot[g] if g is not None else 0
    potentials = {node.var: int(pot[node.id] - offset) for node in nodes}
    total_cost = sum(arc.cost * f for arc, f in zip(arcs, true_flow))
    return FlowSolution(network, tuple(true_flow), potentials, total_cost, pivots)


def _residual_potentials(network: FlowNetwork, flows: list[int], big: int) -> list[int]:
    """Potentials from shortest residual distances out of ground.

    Used when several artificial arcs stay in the final basis and the tree
    alone does not fix the relative potentials of its pieces.
    """
    n = len(network.nodes)
    adj: list[list[tuple[int, int]]] = [[] for _ in range(n)]
    for arc, f in zip(network.arcs, flows):
        adj[arc.tail].append((arc.head, arc.cost))
        if arc.free or f > 0:
            adj[arc.head].append((arc.tail, -arc.cost))
    src = network.index.get(GROUND, 0)
    dist: list[float | int] = [INF] * n
    dist[src] = 0
    queue = deque([src])
    queued = [False] * n
    queued[src] = True
    while queue:
        u = queue.popleft()
        queued[u] = False
        du = dist[u]
        for v, w in adj[u]:
            if du + w < dist[v]:
                dist[v] = du + w
                if not queued[v]:
                    queued[v] = True
                    queue.append(v)
    if any(x == INF for x in dist):
        raise InconsistentPinning("some model variables are unreachable from ground")
    return [-int(x) for x in dist]


def optimality_violations(solution: FlowSolution) -> list[str]:
    """Check balance, bounds and reduced-cost optimality arc by arc."""
    network = solution.network
    pot = [solution.potentials[node.var] for node in network.nodes]
    problems = []
    net = [0] * len(network.nodes)
    big = network.big_m
    for k, (arc, f) in enumerate(zip(network.arcs, solution.flows)):
        net[arc.tail] += f
        net[arc.head] -= f
        rc = arc.cost - pot[arc.tail] + pot[arc.head]
        if arc.free:
            if rc != 0:
                problems.append(f"arc {k} ({arc.constraint}): free arc with reduced cost {rc}")
            if abs(f) >= big:
                problems.append(f"arc {k} ({arc.constraint}): flow {f} touches M")
        else:
            if f < 0:
                problems.append(f"arc {k} ({arc.constraint}): negative flow {f}")
            if rc < 0:
                problems.append(f"arc {k} ({arc.constraint}): reduced cost {rc} < 0")
            if f > 0 and rc != 0:
                problems.append(f"arc {k} ({arc.constraint}): flow {f} with reduced cost {rc}")
    for node, value in zip(network.nodes, net):
        if value != node.supply:
            problems.append(f"node {node.var}: net outflow {value} != supply {node.supply}")
    for x in list(solution.flows) + list(solution.potentials.values()):
        if not isinstance(x, int):
            problems.append(f"non-integer value {x!r}")
    return problems


def extract_assignment(solution: FlowSolution) -> dict[ModelVar, int]:
    """Potentials shifted uniformly so every graph source has ``c_i = 1``."""
    pot = solution.potentials
    model = solution.network.model
    sources = model.graph.sources if model is not None else []
    if not sources:
        return dict(pot)
    shift = 1 - pot[c(sources[0])]
    out = {var: value + shift for var, value in pot.items()}
    bad = [i for i in sources if out[c(i)] != 1]
    if bad:
        raise InconsistentPinning(f"sources {bad} do not share the creating stage of source {sources[0]}")
    return out


def assignment_from_mapping(values: Mapping[str, int]) -> dict[ModelVar, int]:
    return {ModelVar.parse(k): v for k, v in values.items()}
