"""Exception types raised across the package."""


class NetIdentError(Exception):
    """Base class for all package errors."""


class GraphError(NetIdentError, ValueError):
    """Invalid graph description."""


class CycleDetected(GraphError):
    def __init__(self, cycle):
        self.cycle = tuple(cycle)
        super().__init__("graph contains a cycle: " + " -> ".join(map(str, self.cycle)))


class SelfLoop(GraphError):
    def __init__(self, vertex):
        self.vertex = vertex
        super().__init__(f"self-loop at vertex {vertex}")


class DuplicateEdge(GraphError):
    def __init__(self, edge):
        self.edge = tuple(edge)
        super().__init__(f"duplicate edge {self.edge[0]} -> {self.edge[1]}")


class PathBudgetExceeded(NetIdentError):
    def __init__(self, source, target, cap):
        self.source, self.target, self.cap = source, target, cap
        super().__init__(f"more than {cap} paths from {source} to {target}")


class BudgetExhausted(NetIdentError):
    """A bounded witness search ran out of evaluations."""


class SingularAtSample(NetIdentError):
    """A module denominator vanishes at a frequency sample."""


class IllConditioned(NetIdentError):
    """Numerical rank decision is ambiguous."""


class RankDeficientSolve(NetIdentError):
    """A reconstruction system lost full column rank."""


class ParseError(NetIdentError):
    def __init__(self, message, line=None, column=None):
        self.line, self.column = line, column
        where = ""
        if line is not None:
            where = f"line {line}" + (f", column {column}" if column is not None else "") + ": "
        super().__init__(where + message)
