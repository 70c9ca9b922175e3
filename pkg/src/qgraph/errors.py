"""Exception types shared across the package."""


class QGraphError(Exception):
    """Base class for all qgraph errors."""


class GraphStructureError(QGraphError):
    """Malformed or disconnected graph input."""


class DegenerateGraphError(QGraphError):
    """Contraction would leave no metric graph (e.g. all lengths zero)."""


class UnsupportedTopologyError(QGraphError):
    """Operation defined only for a restricted topology (e.g. trees)."""


class InvalidInputError(QGraphError):
    """Value outside the documented domain of an operation."""


class InvalidGroupError(QGraphError):
    """Symmetrization group is not all-dangling or all-loops at one vertex."""


class MultiplicityError(QGraphError):
    """Spectral gap is not simple, so the requested quantity is undefined."""


class NoEigenspaceError(QGraphError):
    """Requested eigenfunction at a k that is not an eigenvalue."""


class PreconditionError(QGraphError):
    """Operation precondition violated (e.g. decomposition of a non-critical point)."""


class NotApplicableError(QGraphError):
    """Closed-form bound or value excluded for these parameters."""


class ResourceBudgetError(QGraphError):
    """Requested computation exceeds the supported budget."""
