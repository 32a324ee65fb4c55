"""Exception types. Each one maps to a CLI exit code."""


class FluxlabError(Exception):
    exit_code = 1
    kind = "error"


class ArgumentError(FluxlabError, ValueError):
    """Malformed input: wrong shapes, empty grids, unparsable files."""

    exit_code = 2
    kind = "argument"


class DomainError(FluxlabError):
    """A requested point, ball or box leaves the field's domain."""

    exit_code = 3
    kind = "domain"


class CapabilityError(FluxlabError):
    """The input lacks something the operation needs (derivatives, constant coefficients, ...)."""

    exit_code = 3
    kind = "capability"


class PreconditionError(FluxlabError):
    exit_code = 3
    kind = "precondition"


class ConvergenceError(FluxlabError):
    exit_code = 4
    kind = "convergence"
