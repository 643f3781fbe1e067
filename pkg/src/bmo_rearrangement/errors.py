"""Exception hierarchy.

Every error raised for bad mathematical input derives from
:class:`InvariantError`, a ``ValueError``; the CLI maps these to exit code 2
and prints the message, which names the violated invariant.
"""


class InvariantError(ValueError):
    pass


class NotRearrangeable(InvariantError):
    pass


class InfiniteMeasure(InvariantError):
    pass


class OutOfDomain(InvariantError):
    pass


class EmptySet(InvariantError):
    pass


class NotMonotone(InvariantError):
    pass


class LevelTooLow(InvariantError):
    pass


class NegativeValues(InvariantError):
    pass


class NonpositiveLevel(InvariantError):
    pass


class InvalidSpace(InvariantError):
    pass


class DocumentError(InvariantError):
    """Malformed interchange document (unknown field, bad version, ...)."""
