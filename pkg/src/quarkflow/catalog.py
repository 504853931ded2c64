"""Named example graphs: the traced stencils and six hand-built chain cases."""

from __future__ import annotations

from typing import Callable

from .errors import UnknownExample
from .frontend import (HEAT1D_SOURCE, HEAT3D_SOURCE, StencilProgram, euler3d_program,
                       gen_euler3d_rk4, gen_heat1d_midpoint, gen_heat3d_midpoint, parse)
from .graph import ComputationalGraph, make_graph

# Chain 0 -> 1 -> ... -> 7; the cheap vertices 2 and 4 sit between swept edges.
MANU_WEIGHTS = (1, 4, 1, 2, 1, 2, 4, 1)
_CHAIN = [(i, i + 1, i in (0, 3, 6)) for i in range(7)]
_EXTRA = {
    "b": [(0, 2, False), (2, 4, False)],
    "c": [(1, 3, False)],
    "d": [(2, 5, False)],
    "e": [(2, 6, False)],
}


def manufactured(case: str) -> ComputationalGraph:
    """Cases ``a`` to ``f``: each adds edges to the previous one, and ``f``
    turns 4 -> 5 into a swept edge."""
    if case not in "abcdef" or len(case) != 1:
        raise UnknownExample(f"manu-{case}")
    edges = list(_CHAIN)
    for step in "bcde":
        if step <= case:
            edges += _EXTRA[step]
    if case == "f":
        edges = [(i, j, True) if (i, j) == (4, 5) else (i, j, s) for i, j, s in edges]
    return make_graph(list(MANU_WEIGHTS), edges)


EXAMPLES: dict[str, Callable[[], ComputationalGraph]] = {
    "heat1d": gen_heat1d_midpoint,
    "heat3d": gen_heat3d_midpoint,
    "euler3d": gen_euler3d_rk4,
}
for _case in "abcdef":
    EXAMPLES[f"manu-{_case}"] = (lambda c=_case: manufactured(c))


def load_example(name: str) -> ComputationalGraph:
    try:
        factory = EXAMPLES[name]
    except KeyError:
        raise UnknownExample(name) from None
    return factory()


def example_program(name: str) -> StencilProgram | None:
    """The source program behind a traced example, or None for hand-built graphs."""
    if name == "heat1d":
        return parse(HEAT1D_SOURCE)
    if name == "heat3d":
        return parse(HEAT3D_SOURCE)
    if name == "euler3d":
        return euler3d_program()
    if name not in EXAMPLES:
        raise UnknownExample(name)
    return None
