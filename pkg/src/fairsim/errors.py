class FairSimError(Exception):
    """Base class for all simulator errors."""


class ConfigError(FairSimError):
    pass


class CoverageOutrun(FairSimError):
    """Camera coverage term 2l - theta*V*tau is not positive."""


class ZeroSpeed(FairSimError):
    pass


class ParseError(FairSimError):
    def __init__(self, row, column, message=""):
        self.row = row
        self.column = column
        super().__init__(f"row {row}, column {column!r}: {message}")


class SchemaError(FairSimError):
    pass


class EmptyScenario(FairSimError):
    pass


class OutOfRange(FairSimError):
    pass


class InvalidPattern(FairSimError):
    pass


class NonPositiveDistance(FairSimError):
    pass


class LinkDown(FairSimError):
    """Operation needs a positive data rate."""


class ZeroGrant(FairSimError):
    pass


class MismatchedScenario(FairSimError):
    pass
