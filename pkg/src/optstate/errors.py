"""Exception types shared across the package."""


class OptstateError(Exception):
    """Base class; the CLI maps these to exit code 1."""


class DomainViolationError(OptstateError):
    """A point fails membership in its state space (caller bug, not dynamics)."""


class NonfiniteStateError(OptstateError):
    """Integration or iteration produced NaN/inf."""


class ResourceLimitError(OptstateError):
    """Requested orbit length exceeds the configured cap."""


class SpaceMismatchError(OptstateError):
    """Two objects living on different state spaces were combined."""


class MeasureSpecError(OptstateError):
    """Measure spec string failed to parse; carries the offending position."""

    def __init__(self, message, position=None):
        if position is not None:
            message = f"{message} (at position {position})"
        super().__init__(message)
        self.position = position


class PotentialSpecError(OptstateError):
    """Potential spec string failed to parse or names an unusable combinator."""


class NonPeriodicOrbitError(OptstateError):
    """A point declared periodic does not close its orbit within tolerance."""


class NeighborhoodOverlapError(OptstateError):
    """Bump neighborhoods of two orbits intersect."""


class ParameterRegimeError(OptstateError):
    """Scenario parameters fall outside the required regime."""


class ConfigError(OptstateError):
    """Configuration document or flag grammar violation."""


class UnknownNameError(OptstateError):
    """A name failed to resolve against a registry; lists what is available."""

    def __init__(self, name, available, what="name"):
        super().__init__(
            f"unknown {what} {name!r}; available: {', '.join(sorted(available))}"
        )
        self.name = name
        self.available = tuple(available)


class SingularCollapseWarning(UserWarning):
    """A cocycle product underflowed to the zero matrix despite renormalization."""
