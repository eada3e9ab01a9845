"""Exception types shared across the toolkit."""


class KextractError(Exception):
    """Base class for all toolkit errors."""


class ParseError(KextractError):
    """A data file could not be parsed. Carries the 1-based line number."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class ValidationError(KextractError):
    """Parsed data violates a record invariant. Carries the record location."""

    def __init__(self, message: str, line: int | None = None, row: int | None = None):
        self.line = line
        self.row = row
        where = []
        if row is not None:
            where.append(f"row {row}")
        if line is not None:
            where.append(f"line {line}")
        if where:
            message = f"{', '.join(where)}: {message}"
        super().__init__(message)


class ConfigError(KextractError):
    """Bad configuration: unknown keys, merge conflicts, unsupported options."""


class AlignmentError(KextractError):
    """A character offset does not land on a token boundary (strict mode)."""


class ArtifactVersionError(KextractError):
    """Stored artifact has an unsupported format version."""


class ArtifactChecksumError(KextractError):
    """Stored artifact payload fails its checksum."""
