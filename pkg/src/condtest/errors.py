class CondError(ValueError):
    """Base class for invalid arguments and oracle misuse."""


class UnsupportedQuerySet(CondError):
    """The operation is not defined for this query-set representation."""


class EmptyQuerySet(CondError):
    pass


class ConsumedQuerySet(CondError):
    """A single-use implicit query set was queried a second time."""
