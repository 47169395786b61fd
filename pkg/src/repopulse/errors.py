"""Exception hierarchy shared across repopulse modules."""


class RepoPulseError(Exception):
    """Base class for all repopulse errors."""


# --- metrics kernel ---

class InvalidWindowError(RepoPulseError, ValueError):
    """Empty, inverted, or non-contiguous time window(s)."""


class CorruptHistoryError(RepoPulseError, ValueError):
    """A file history is unsorted or implies a negative file size."""


class IncompleteSeriesError(RepoPulseError, ValueError):
    """A daily series is missing dates inside the requested range."""


class NoMeasurableCodeError(RepoPulseError):
    """Density is undefined: no measurable code in the window."""


class NoRecordedEffortError(RepoPulseError):
    """Productivity is undefined: zero person-hours recorded."""


# --- ingestion ---

class IngestError(RepoPulseError):
    """Base for ingestion failures.

    `retryable` tells the batch worker whether another attempt can help.
    """

    retryable = False


class RepoNotFoundError(IngestError):
    """The repository path or remote does not exist."""


class BranchNotFoundError(IngestError):
    """The named branch is absent from the repository."""


class GitCommandError(IngestError):
    """A git invocation failed (unreadable objects, corrupt clone)."""

    retryable = True


class CloneError(IngestError):
    """Cloning or fetching the remote failed."""

    retryable = True


class AuthenticationError(IngestError):
    """The issue API rejected our credentials."""


class RateLimitError(IngestError):
    """Rate limit exhausted and no reset time advertised."""

    retryable = True


class MalformedPayloadError(IngestError):
    """The issue API returned a payload we cannot interpret."""


# --- store ---

class StoreError(RepoPulseError):
    """Base for persistence failures."""


class ValidationError(StoreError, ValueError):
    """Malformed project identifiers."""


class UnknownProjectError(StoreError, KeyError):
    """No project record under the given id."""


class UnknownSeriesError(StoreError, KeyError):
    """No stored series under the given key."""


class IllegalTransitionError(StoreError):
    """Requested lifecycle edge is not permitted."""
