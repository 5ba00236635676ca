"""Exception types shared across the package."""


class CausalbnError(Exception):
    """Base class for all package-specific errors."""


class CycleError(CausalbnError):
    """Raised when a directed cycle prevents a topological order."""


class UnknownNode(CausalbnError):
    """A node identifier does not exist in the graph."""


class UnknownVariable(UnknownNode):
    """A variable name does not exist in the network."""


class ValidationError(CausalbnError):
    """A network or parameter set violates a structural invariant."""


class SizeCapExceeded(CausalbnError):
    """An exact computation would exceed the configured size limit."""


class ZeroProbabilityEvidence(CausalbnError):
    """Conditioning event has probability zero."""


class EmptyDataset(CausalbnError):
    """A dataset operation received no rows."""


class PositivityViolation(CausalbnError):
    """An adjustment stratum lacks support for some treatment level."""


class ParseError(CausalbnError):
    """A model file is malformed; message carries the location."""


class InfeasibleEndpoints(CausalbnError):
    """Decomposition endpoints do not bracket the conditional probabilities."""


class DegenerateEndpoints(CausalbnError):
    """Decomposition endpoints coincide, leaving the weights undefined."""


class DomainError(CausalbnError):
    """A numeric argument is outside its mathematical domain."""


class StructureError(CausalbnError):
    """The graph does not have the structure an operation requires."""
