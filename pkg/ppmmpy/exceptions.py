import typing


class BaseError(Exception):
    """Base class for all exceptions in this module."""

    def __str__(self) -> str:
        return self.message


class PPMMError(BaseError):
    """Exception raised for errors in the estimator or its inputs.
    Attributes:
        message -- explanation of the error
    """

    def __init__(self, message: str):
        self.message = message


class SampleError(PPMMError):
    """Exception raised for invalid sample contents.
    Attributes:
        message -- explanation of the error
    """


class SampleFileError(SampleError):
    """Exception raised for errors while reading a sample file.

    Parameters
    ----------
    message : str
        explanation of the error
    path : str
        the file that caused the error
    row : typing.Optional[int] (optional)
        the 1-based data row that caused the error, by default None
    column : typing.Optional[str] (optional)
        the column that caused the error, by default None
    """

    def __init__(
        self,
        message: str,
        path: str,
        *,
        row: typing.Optional[int] = None,
        column: typing.Optional[str] = None,
    ):
        self.message = message
        self.path = path
        self.row = row
        self.column = column

    def __str__(self) -> str:
        if self.row is not None and self.column is not None:
            return f"{self.message} at row {self.row}, column {self.column!r} of {self.path}"
        if self.row is not None:
            return f"{self.message} at row {self.row} of {self.path}"
        return f"{self.message} ({self.path})"


class DimensionMismatchError(PPMMError):
    """Exception raised when two operands disagree in shape.

    Parameters
    ----------
    message : str
        explanation of the error
    expected : typing.Any
        the expected dimension or shape
    actual : typing.Any
        the dimension or shape that was given
    """

    def __init__(self, message: str, expected: typing.Any, actual: typing.Any):
        self.message = message
        self.expected = expected
        self.actual = actual

    def __str__(self) -> str:
        return f"{self.message} (expected {self.expected}, got {self.actual})"


class DegenerateSampleError(PPMMError):
    """Exception raised when the pooled covariance is numerically zero.
    Attributes:
        message -- explanation of the error
    """


class NonFiniteError(PPMMError):
    """Exception raised when an iteration produces non-finite values.
    Attributes:
        message -- explanation of the error
        iteration -- the 1-based iteration that produced them
    """

    def __init__(self, message: str, iteration: int):
        self.message = message
        self.iteration = iteration

    def __str__(self) -> str:
        return f"{self.message} at iteration {self.iteration}"


class OracleGuardError(PPMMError):
    """Exception raised when an exact oracle is asked for an instance above its size guard.
    Attributes:
        message -- explanation of the error
    """


class ConfigError(PPMMError):
    """Exception raised for errors in a config file or flag value.

    Parameters
    ----------
    message : str
        explanation of the error
    key : typing.Optional[str] (optional)
        the offending key, by default None
    line : typing.Optional[int] (optional)
        the line of the config file, by default None
    """

    def __init__(
        self,
        message: str,
        *,
        key: typing.Optional[str] = None,
        line: typing.Optional[int] = None,
    ):
        self.message = message
        self.key = key
        self.line = line

    def __str__(self) -> str:
        where = []
        if self.key is not None:
            where.append(f"key {self.key!r}")
        if self.line is not None:
            where.append(f"line {self.line}")
        if where:
            return f"{self.message} ({', '.join(where)})"
        return self.message


class ExperimentError(PPMMError):
    """Exception raised for an invalid experiment description.
    Attributes:
        message -- explanation of the error
    """
