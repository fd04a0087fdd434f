"""Exception types shared across the toolkit."""


class PacctError(Exception):
    """Base class for all toolkit errors."""


class MalformedRecord(PacctError):
    """A record's command field looks like binary garbage, not a command name."""


class UnknownFormat(PacctError):
    """No known (layout, byte order) combination plausibly matches the file."""


class TruncatedFile(PacctError):
    """File length is not a whole number of records."""


class FieldRangeError(PacctError):
    """A record field does not fit the on-disk layout. Carries the field name."""

    def __init__(self, field: str, message: str):
        super().__init__(f"{field}: {message}")
        self.field = field


class DuplicateName(PacctError):
    """A report name was registered twice in one run."""


class NoReportsRegistered(PacctError):
    """run_single_pass called with an empty registration set."""


class IncompatibleRender(PacctError):
    """The requested render format cannot represent this output shape."""


class ConfigError(PacctError):
    """Analysis config file is invalid."""
