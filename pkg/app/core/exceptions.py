"""
Error hierarchy for the toolkit.

Input errors (bad files, bad parameters, degenerate data handed in by the
caller) exit the CLI with code 2; method errors (a test that cannot be
computed on otherwise valid data) exit with code 3.
"""

from typing import Optional

EXIT_INPUT_ERROR = 2
EXIT_METHOD_ERROR = 3


class PairedTestError(Exception):
    exit_code: int = EXIT_METHOD_ERROR
    status_code: int = 422

    def __init__(self, message: str):
        super().__init__(message)
        self.message = message


# ---------------------------------------------------------------------------
# Input errors
# ---------------------------------------------------------------------------
class InputError(PairedTestError):
    exit_code = EXIT_INPUT_ERROR
    status_code = 400


class DomainError(InputError):
    """Argument outside the domain of an operation (empty vector, df < 1, ...)."""


class SchemaError(InputError):
    def __init__(self, message: str, column: Optional[str] = None, position: Optional[int] = None):
        super().__init__(message)
        self.column = column
        self.position = position


class PairingError(InputError):
    def __init__(self, message: str, rows_a: int, rows_b: int):
        super().__init__(message)
        self.rows_a = rows_a
        self.rows_b = rows_b


class ParseError(InputError):
    def __init__(self, message: str, row: int, column: int):
        super().__init__(message)
        self.row = row
        self.column = column


class DataValidationError(InputError):
    pass


class DegenerateFeatureError(InputError):
    def __init__(self, message: str, feature: int):
        super().__init__(message)
        self.feature = feature


class ConfigError(InputError):
    def __init__(self, message: str, key: Optional[str] = None):
        super().__init__(message)
        self.key = key


# ---------------------------------------------------------------------------
# Method errors
# ---------------------------------------------------------------------------
class MethodError(PairedTestError):
    exit_code = EXIT_METHOD_ERROR
    status_code = 422


class SingularMatrixError(MethodError):
    pass


class DegenerateError(MethodError):
    """A statistic is undefined on the given data (e.g. all differences zero)."""


class DegeneratePairError(MethodError):
    def __init__(self, message: str, row: Optional[int] = None):
        super().__init__(message)
        self.row = row


class DegenerateRuleError(MethodError):
    pass


class InsufficientDataError(MethodError):
    pass


class ModeError(MethodError):
    pass


class OutputError(InputError):
    def __init__(self, message: str, path: Optional[str] = None):
        super().__init__(message)
        self.path = path
