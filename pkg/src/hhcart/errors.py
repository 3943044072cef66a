"""Exception types raised across the package."""


class HHCartError(Exception):
    """Base class for all package errors."""


# ingestion
class MissingColumn(HHCartError):
    pass


class ParseFailure(HHCartError):
    def __init__(self, row, column, value=None):
        self.row = row
        self.column = column
        self.value = value
        super().__init__(f"cannot parse {value!r} in row {row}, column {column!r}")


class EmptyDataset(HHCartError):
    pass


class SchemaError(HHCartError):
    pass


class SchemaMismatch(HHCartError):
    pass


# numerics
class DegenerateClass(HHCartError):
    pass


class ConvergenceFailure(HHCartError):
    pass


class ZeroDenominator(HHCartError):
    pass


class DimensionMismatch(HHCartError):
    pass


# splitting
class NoValidSplit(HHCartError):
    pass


# model files
class CorruptModel(HHCartError):
    pass


class FormatVersionMismatch(CorruptModel):
    pass
