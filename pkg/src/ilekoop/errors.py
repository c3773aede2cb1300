"""Exception types shared across the package."""


class DomainError(Exception):
    """A point or parameter lies outside the domain of definition."""


class NumericalError(RuntimeError):
    """A computation produced a non-finite state or failed an internal check."""


class NoCrossingError(NumericalError):
    """An orbit never reached the data surface within the time budget."""


class UsageError(Exception):
    """Invalid command-line invocation."""
