"""Exception hierarchy shared by the library and the CLI.

Each class carries the process exit code the CLI maps it to.
"""


class MigrantNetError(Exception):
    exit_code = 1


class MissingInputError(MigrantNetError, FileNotFoundError):
    exit_code = 3


class SchemaError(MigrantNetError, ValueError):
    exit_code = 4


class EmptyStoreError(SchemaError):
    """Raised when an input file holds no valid record."""


class ValidationError(MigrantNetError, ValueError):
    exit_code = 4


class NotFoundError(MigrantNetError, KeyError):
    exit_code = 4

    def __str__(self):
        return Exception.__str__(self)


class NumericError(MigrantNetError, ArithmeticError):
    exit_code = 5


class ConvergenceError(NumericError):
    pass


class DegenerateFitError(NumericError):
    pass
