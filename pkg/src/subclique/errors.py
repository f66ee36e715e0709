"""Exception types shared across the package."""


class SubcliqueError(Exception):
    """Base class for all package errors."""


class ParseError(SubcliqueError):
    """A text document could not be parsed.

    Carries the 1-based line number and the offending field when known.
    """

    def __init__(self, message, line=None, field=None):
        self.line = line
        self.field = field
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class UnknownNodeError(SubcliqueError):
    """A node id or label does not exist in the graph/state."""


class UnknownCliqueNodeError(SubcliqueError):
    """A clique-node id does not exist (or was retired)."""


class InvalidPeoError(SubcliqueError):
    """The supplied ordering is not a perfect elimination ordering."""


class NotDecomposableError(SubcliqueError):
    """The graph is not decomposable (chordal); carries the failure report."""

    def __init__(self, failure):
        self.failure = failure
        super().__init__(f"graph is not decomposable: {failure}")


class ImpermissibleMoveError(SubcliqueError):
    """The requested connect/disconnect is not in the node's move sets."""


class InvalidPromotionError(SubcliqueError):
    """The requested promotion is not among the promotion candidates."""


class PoolExhaustedError(SubcliqueError):
    """The clique-node pool cap would be exceeded."""


class SizeLimitError(SubcliqueError):
    """A brute-force oracle was asked to run beyond its size limit."""
