"""Exception hierarchy for the pyroclass library.

Two broad categories matter to callers: problems with how the library was
invoked (bad flags, invalid configuration values) and problems with the data
it was pointed at (missing files, corrupt payloads, degenerate datasets).
The command-line layer maps them to exit codes 1 and 2 respectively.
"""


class PyroclassError(Exception):
    """Base class for all errors raised by this package."""


class UsageError(PyroclassError):
    """Invalid invocation: bad CLI arguments or config values."""


class DataError(PyroclassError):
    """Unreadable, malformed, or inconsistent input data."""


class TrainingError(DataError):
    """A model could not be trained on the given data (e.g. one class only)."""
