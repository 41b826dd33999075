class UrcError(Exception):
    """Base class for every error the toolkit raises on bad data or arguments."""


class DataError(UrcError):
    pass


class DumpParseError(DataError):
    def __init__(self, path, line, message):
        self.path = str(path)
        self.line = line
        super().__init__(f"{self.path}:{line}: {message}")


class ValidationError(DataError):
    """Raised with every offending row listed, not just the first."""

    def __init__(self, message, rows=()):
        self.rows = list(rows)
        if self.rows:
            detail = "; ".join(str(r) for r in self.rows[:20])
            more = f" (+{len(self.rows) - 20} more)" if len(self.rows) > 20 else ""
            message = f"{message}: {detail}{more}"
        super().__init__(message)


class SchemaError(DataError):
    pass


class TrainingError(UrcError):
    pass


class UndefinedMetricError(UrcError):
    pass
