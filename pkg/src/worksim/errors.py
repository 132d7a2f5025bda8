"""Exception types shared across the package.

Tool-level failures are *not* exceptions: they come back as error results so
that no agent call can crash a session. Exceptions here signal misuse of the
library itself (bad seeds, malformed files, broken compositions).
"""


class WorksimError(Exception):
    """Base class for all library errors."""


class GenerationError(WorksimError):
    """Randomized generation could not satisfy its constraints."""


class InstantiationError(WorksimError):
    """A task template could not be fully concretized."""


class CompositionError(WorksimError):
    """A scenario could not be assembled (name exhaustion, trigger overlap, ...)."""


class DecodeError(WorksimError):
    """A serialized document failed to parse or validate."""


class ProtocolError(WorksimError):
    """A session was driven outside its allowed lifecycle."""


class NoFeasiblePlan(WorksimError):
    """An optimization instance has no valid solution at all."""
