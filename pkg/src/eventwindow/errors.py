"""Exception types shared across the package."""

from __future__ import annotations


class EventWindowError(Exception):
    """Base class for every data or computation error raised by this package."""


class MalformedRowError(EventWindowError):
    """A CSV row (or the header) could not be parsed."""

    def __init__(self, line_number: int, reason: str):
        super().__init__(f"line {line_number}: {reason}")
        self.line_number = line_number
        self.reason = reason


class DuplicateDateError(EventWindowError):
    def __init__(self, date) -> None:
        super().__init__(f"duplicate date {date.isoformat()}")
        self.date = date


class EventOutsideRangeError(EventWindowError):
    """Event date does not split the series into two non-empty segments."""


class InsufficientDataError(EventWindowError):
    """Fewer observations than the operation requires."""


class EmptySampleError(EventWindowError):
    pass


class ZeroMADError(EventWindowError):
    """MAD is zero (constant-ish sample); robust standardization undefined."""


class ZeroVarianceError(EventWindowError):
    pass


class ZeroL2Error(EventWindowError):
    """Second L-moment is zero; tau ratios undefined."""


class ZeroBandwidthError(EventWindowError):
    pass


class SampleSizeOutOfRangeError(EventWindowError):
    pass


class DegenerateDeviationsError(EventWindowError):
    """All absolute deviations from the group medians coincide."""


class ZeroPreVarianceError(EventWindowError):
    pass


class SolverNotConvergedError(EventWindowError):
    def __init__(self, max_iterations: int):
        super().__init__(
            f"dual solver failed to reach KKT tolerance within {max_iterations} iterations"
        )
        self.max_iterations = max_iterations


class MethodOutputMismatchError(EventWindowError):
    """Detector outputs do not cover the same date set."""


class PipelineError(EventWindowError):
    """Wraps the first fatal module error raised inside the full pipeline."""

    def __init__(self, stage: str, cause: Exception):
        super().__init__(f"[{stage}] {cause}")
        self.stage = stage
        self.cause = cause
