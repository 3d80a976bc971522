"""Exception hierarchy shared by all modules."""


class GraphMcsError(Exception):
    """Base class for every error raised by this package."""


class GraphError(GraphMcsError, ValueError):
    """Invalid graph data or graph-construction failure."""


class ConnectivityError(GraphError):
    """A generator could not produce a connected graph within its retry budget."""


class DegenerateDegreeError(GraphError):
    """An isolated vertex makes the normalized Laplacian undefined."""


class EdgeListError(GraphError):
    """Malformed edge-list file."""


class DimensionError(GraphMcsError, ValueError):
    """Shapes of the operands do not match the operation."""


class NumericalError(GraphMcsError, ArithmeticError):
    """A numerical precondition (invertibility, interval bound, pairing) failed."""


class PairingError(NumericalError):
    """Bipartite eigenvector pairing could not be established."""


class ConfigError(GraphMcsError, ValueError):
    """Invalid experiment configuration."""
