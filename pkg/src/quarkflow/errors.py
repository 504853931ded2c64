"""Exception types raised across the package."""

from __future__ import annotations


class QuarkflowError(ValueError):
    """Base class for every error raised by quarkflow."""


class EmptyGraph(QuarkflowError):
    def __init__(self) -> None:
        super().__init__("graph has no vertices")


class CycleFound(QuarkflowError):
    def __init__(self, cycle: list[int]) -> None:
        self.cycle = list(cycle)
        super().__init__(f"cycle found: {self.cycle}")


class DuplicateEdge(QuarkflowError):
    def __init__(self, src: int, dst: int) -> None:
        self.src, self.dst = src, dst
        super().__init__(f"duplicate edge ({src}, {dst})")


class GraphError(QuarkflowError):
    """Structural problem that is neither a cycle nor a duplicate edge."""


class ParseError(QuarkflowError):
    def __init__(self, line: int, message: str) -> None:
        self.line, self.message = line, message
        super().__init__(f"line {line}: {message}")


class SchemaError(QuarkflowError):
    def __init__(self, field: str, message: str | None = None) -> None:
        self.field = field
        super().__init__(message or f"invalid field {field!r}")


class UnknownName(ParseError):
    def __init__(self, line: int, name: str) -> None:
        self.name = name
        super().__init__(line, f"unknown name {name!r}")


class DivisionByZeroConstant(ParseError):
    def __init__(self, line: int = 0) -> None:
        super().__init__(line, "division by the constant zero")


class MissingVar(QuarkflowError):
    def __init__(self, var: object) -> None:
        self.var = var
        super().__init__(f"assignment is missing variable {var}")


class Unbalanced(QuarkflowError):
    def __init__(self, total: int) -> None:
        self.total = total
        super().__init__(f"node supplies sum to {total}, expected 0")


class NegativeCostCycleWithFreeArcs(QuarkflowError):
    """The flow problem is unbounded; the integer program is infeasible."""


class NonConvergence(QuarkflowError):
    def __init__(self, iterations: int) -> None:
        self.iterations = iterations
        super().__init__(f"network simplex exceeded {iterations} pivots")


class InconsistentPinning(QuarkflowError):
    pass


class InfeasibleAssignment(QuarkflowError):
    def __init__(self, violations: list) -> None:
        self.violations = list(violations)
        shown = ", ".join(str(v) for v in self.violations[:5])
        super().__init__(f"{len(self.violations)} violated constraints: {shown}")


class MissingExprMetadata(QuarkflowError):
    def __init__(self) -> None:
        super().__init__("graph carries no expression metadata; "
                         "kernels need a graph traced from a stencil program")


class TooLarge(QuarkflowError):
    pass


class Infeasible(QuarkflowError):
    pass


class UnknownExample(QuarkflowError):
    def __init__(self, name: str) -> None:
        self.name = name
        super().__init__(f"unknown example {name!r}")
