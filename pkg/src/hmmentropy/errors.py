"""Exception hierarchy shared by the library and the command-line tool."""


class HmmError(Exception):
    """Base class for all errors raised by this package."""


class ValidationError(HmmError):
    """A model or data object violates one of its invariants."""


class DataFormatError(HmmError):
    """A model/sequence/tree text document could not be parsed."""


class ImpossibleObservationError(HmmError):
    """The observed data has probability zero under the model.

    Raised when a normalizing factor vanishes during a recursion, or when
    every state configuration is impossible in a Viterbi pass.
    """


class BudgetExceededError(HmmError):
    """An enumeration would exceed the configured operation budget."""
