"""Exception types shared across ecmkit."""


class EcmError(Exception):
    """Base class for all ecmkit errors."""


class ConfigError(EcmError, ValueError):
    """A machine, kernel or measurement file failed to parse or validate.

    ``source`` is the offending file (if any) and ``field`` the key, stream or
    row that triggered the error, so callers can point the user at it.
    """

    def __init__(self, message, source=None, field=None):
        self.source = source
        self.field = field
        prefix = f"{source}: " if source else ""
        super().__init__(prefix + message)


class UnsupportedError(EcmError):
    """A requested combination (machine, SIMD level, residence) is not available."""


class UnmatchedRecordError(EcmError, KeyError):
    """A measurement record has no prediction to compare against."""

    def __str__(self):
        return self.args[0] if self.args else "unmatched record"
