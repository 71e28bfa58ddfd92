"""Exception hierarchy shared across the package.

Two top-level families matter to callers: configuration problems
(bad manifests, unknown ids, malformed space configs) and runtime data
problems (unreadable results, impossible calibrations).  The CLI maps
them to exit codes 2 and 3 respectively.
"""


class ConfigError(Exception):
    """Invalid configuration, manifest, or usage."""


class DataError(Exception):
    """Results or inputs exist but cannot be used."""


class DomainError(ValueError):
    """A value lies outside the domain an operation is defined on."""


class ShapeError(ValueError):
    """An array or sequence has the wrong length or dimensionality."""


class SuggestionError(ValueError):
    """A suggestion does not satisfy its search space.

    Carries the list of offending parameter names.
    """

    def __init__(self, message, offenders=()):
        super().__init__(message)
        self.offenders = list(offenders)


class EvaluationCrash(Exception):
    """Raised by an objective to signal a crashed evaluation.

    The harness records a crash as an infinite loss; it is distinct from
    a :class:`SuggestionError`, which means the caller sent an invalid
    point in the first place.
    """


class CalibrationError(DataError):
    """A problem could not be calibrated (e.g. every probe crashed)."""


class SurrogateFitError(RuntimeError):
    """Internal: a surrogate model could not be fit (singular kernel)."""
