import random

import pytest
from hypothesis import given, settings

from quarkflow.errors import NonConvergence, Unbalanced
from quarkflow.flow import (FlowArc, FlowNetwork, FlowNode, build_network, extract_assignment,
                            optimality_violations, solve_mcnf)
from quarkflow.graph import make_graph
from quarkflow.model import GROUND, K, ModelVar, build_model, c, check_feasible, d, e, objective_value
from quarkflow.pipeline import run

from conftest import dags, single_swept


def test_single_swept_network_layout():
    net = build_network(build_model(single_swept(), wk=2))
    assert [str(n.var) for n in net.nodes] == ["ground", "K", "c0", "d0", "e0", "c1", "d1", "e1"]
    # supply is minus the objective coefficient; ground balances K
    assert [n.supply for n in net.nodes] == [2, -2, 1, -1, 0, 1, -1, 0]
    assert sum(n.supply for n in net.nodes) == 0
    assert len(net.arcs) == len(net.model.constraints)


def test_equality_becomes_free_arc():
    net = build_network(build_model(single_swept()))
    idx = net.index
    pin = [a for a in net.arcs if a.tail == idx[c(0)] and a.head == idx[GROUND]]
    assert len(pin) == 1
    assert pin[0].cost == 1 and pin[0].free and pin[0].lower == float("-inf")


def test_arc_orientation_follows_constraint():
    net = build_network(build_model(single_swept()))
    for arc in net.arcs:
        con = arc.constraint
        assert net.nodes[arc.tail].var == con.u and net.nodes[arc.head].var == con.v
        assert arc.cost == con.bound


def test_forced_flow():
    nodes = (FlowNode(0, ModelVar("K"), 1), FlowNode(1, ModelVar("c", 0), -1))
    net = FlowNetwork(nodes, (FlowArc(0, 1, 3),))
    sol = solve_mcnf(net)
    assert sol.flows == (1,) and sol.cost == 3
    pk, pc = sol.potentials[ModelVar("K")], sol.potentials[ModelVar("c", 0)]
    assert 3 - pk + pc == 0


def test_unbalanced():
    nodes = (FlowNode(0, ModelVar("K"), 2), FlowNode(1, ModelVar("c", 0), -1))
    with pytest.raises(Unbalanced):
        solve_mcnf(FlowNetwork(nodes, (FlowArc(0, 1, 3),)))


def test_pivot_cap():
    net = build_network(build_model(make_graph(4, [(0, 1, True), (1, 2, True), (2, 3, True)])))
    with pytest.raises(NonConvergence):
        solve_mcnf(net, max_pivots=0)


def test_single_swept_potentials():
    sol = solve_mcnf(build_network(build_model(single_swept(), wk=3)))
    a = extract_assignment(sol)
    assert a[GROUND] == 0 and a[K] == 1
    assert (a[c(0)], a[c(1)], a[d(0)], a[d(1)], a[e(0)], a[e(1)]) == (1, 1, 1, 1, 1, 2)
    assert sol.objective == 3 == -sol.cost


def test_heat1d_potentials(heat1d_run):
    assert heat1d_run.K == 2
    assert heat1d_run.sharing.total == 2


def test_extraction_is_gauge_invariant():
    sol = solve_mcnf(build_network(build_model(make_graph(3, [(0, 1, True), (1, 2, True)]))))
    shifted = type(sol)(sol.network, sol.flows, {v: p + 5 for v, p in sol.potentials.items()},
                        sol.cost, sol.pivots)
    assert extract_assignment(shifted) == extract_assignment(sol)


def test_no_swept_graph_is_one_stage():
    g = make_graph([1, 2, 3], [(0, 1), (1, 2), (0, 2)])
    a = extract_assignment(solve_mcnf(build_network(build_model(g))))
    assert a[K] == 1
    assert all(a[c(i)] == a[d(i)] == 1 for i in range(3))


def test_dimacs_dump():
    net = build_network(build_model(single_swept()))
    lines = net.dimacs().splitlines()
    assert f"p min 8 {len(net.arcs)}" in lines
    big = net.big_m
    assert f"a 3 1 {-big} {big} 1" in lines  # c0 -> ground, free
    assert "n 2 -1" in lines  # K


def test_isolated_e_nodes_carry_no_flow():
    g = make_graph(1, [])
    sol = solve_mcnf(build_network(build_model(g)))
    assert optimality_violations(sol) == []
    assert extract_assignment(sol)[e(0)] in (1, 2)


def _weak_duality_holds(model, sol, rng):
    # any feasible assignment costs at least -(flow cost)
    a = extract_assignment(sol)
    for _ in range(5):
        bump = rng.randint(0, 3)
        b = dict(a)
        b[K] += bump
        for t in model.graph.sinks:
            b[d(t)] += bump
        if not check_feasible(model, b):
            assert objective_value(model, b) >= sol.objective


@settings(max_examples=200, deadline=None)
@given(dags())
def test_duality_and_optimality(g):
    r = run(g, wk=2)
    sol = r.solution
    assert optimality_violations(sol) == []
    assert objective_value(r.model, r.assignment) == sol.objective == -sol.cost
    assert all(isinstance(f, int) for f in sol.flows)
    assert all(isinstance(p, int) for p in sol.potentials.values())
    _weak_duality_holds(r.model, sol, random.Random(g.n))


@settings(max_examples=60, deadline=None)
@given(dags())
def test_solver_is_deterministic(g):
    net = build_network(build_model(g))
    s1, s2 = solve_mcnf(net), solve_mcnf(net)
    assert s1.flows == s2.flows and s1.potentials == s2.potentials


def test_lp_relaxation_matches(heat1d):
    """Independent route: the LP relaxation solved by a general LP code has the
    same optimum as the integer solution (the constraint matrix is totally
    unimodular)."""
    scipy_opt = pytest.importorskip("scipy.optimize")
    import numpy as np

    for g in (heat1d, make_graph([1, 4, 1, 2], [(0, 1, True), (1, 2), (2, 3, True), (0, 3)])):
        m = build_model(g)
        col = {v: k for k, v in enumerate(m.vars)}
        rows, rhs = [], []
        for x in m.expanded():
            row = np.zeros(len(col))
            row[col[x.u]] += 1
            row[col[x.v]] -= 1
            rows.append(row)
            rhs.append(x.bound)
        cost = np.array([m.objective[v] for v in m.vars], dtype=float)
        bounds = [(0, 0) if v == GROUND else (None, None) for v in m.vars]
        res = scipy_opt.linprog(cost, A_ub=np.array(rows), b_ub=np.array(rhs), bounds=bounds,
                                method="highs")
        assert res.status == 0
        assert res.fun == pytest.approx(run(g).objective, abs=1e-9)
