"""Exception types shared across the toolkit."""


class ScheduleError(ValueError):
    """Base class for schedule-name parsing and validation failures."""


class UnknownToken(ScheduleError):
    """A character run in a schedule name is not part of the grammar."""


class MultipleGenerate(ScheduleError):
    """A schedule name contains more than one generate entry."""


class MisplacedTail(ScheduleError):
    """A tail marker is duplicated or not at an end of the schedule."""


class EmptySchedule(ScheduleError):
    """The schedule name contains no segments at all."""


class InvalidSchedule(ScheduleError):
    """A structurally broken schedule (missing generate, bad counts, ...)."""


class NonDyadicBudget(ValueError):
    """A rate budget has no terminating binary expansion."""


class IndivisibleDims(ValueError):
    """Frame count or latent dims are not divisible by the kernel steps."""


class UnsupportedKernel(ValueError):
    """No physical kernel and downsample factor can realize the request."""


class ShortHistory(ValueError):
    """History has fewer frames than the schedule needs and padding is off."""


class ExcessHistory(ValueError):
    """Leftover history frames with no tail marker to absorb them."""


class NonMonotonicIndices(ValueError):
    """Time indices for phase generation must be strictly increasing."""


class ZeroVectorPixel(ValueError):
    """A pixel vector with zero norm has no cosine similarity."""


class InsufficientData(ValueError):
    """Fewer distinct pixels than requested codebook entries."""


class ChannelMismatch(ValueError):
    """Channel counts of the video and the codebook disagree."""


class IndexOutOfRange(ValueError):
    """An index map refers to a codebook row that does not exist."""


class PlanError(ValueError):
    """Base class for generation-planning failures."""


class ModeMismatch(PlanError):
    """The schedule's implied sampling order does not fit the planner."""


class TooShort(PlanError):
    """Not enough total frames for the requested plan shape."""


class OverlappingEndpoints(PlanError):
    """Anchor sections overlap or fall outside the planned range."""


class TooFewFrames(ValueError):
    """A video is too short to split into start and end segments."""


class UnknownOutcome(ValueError):
    """A match record carries an outcome other than A, B, or D."""


class FpltFormatError(ValueError):
    """A tensor container is truncated, mislabeled, or inconsistent."""
