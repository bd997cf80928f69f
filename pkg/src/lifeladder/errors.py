"""Exception hierarchy shared by all lifeladder modules.

Three branches mirror the CLI exit statuses: configuration problems
(:class:`ParameterError`, exit 1), data and schema problems
(:class:`DataError`, exit 2) and numerical failures
(:class:`NumericalError`, exit 3).
"""


class ParameterError(ValueError):
    """A caller-supplied parameter violates a precondition."""


class IncompleteAssignmentError(ParameterError):
    """A joint-probability lookup received a partial assignment."""


class DataError(Exception):
    """Input data cannot be interpreted under the expected schema."""


class SchemaError(DataError):
    """A required column or variable is missing or unknown."""


class DuplicateKeyError(DataError):
    """Two rows share the same (country, year) key."""


class InvalidValueError(DataError):
    """A cell or query value is outside the representable domain (e.g. NaN)."""


class ImputationError(DataError):
    """A variable has no observed value anywhere, so no fill rule applies."""


class SplitError(DataError):
    """A train/test split would leave one partition empty."""


class CycleError(DataError):
    """Edges that must form a DAG contain a directed cycle."""


class NumericalError(Exception):
    """A computation cannot proceed for numerical reasons."""


class DegenerateFeatureError(NumericalError):
    """A predictor is constant on the training data and cannot be scaled."""


class SingularSystemError(NumericalError):
    """The normal equations are rank deficient; a ridge penalty would fix it."""


class ZeroVarianceError(NumericalError):
    """The metric denominator (variance of the actuals) is zero."""


class ZeroEvidenceError(NumericalError):
    """The supplied evidence has probability zero under the network."""


class CapacityError(NumericalError):
    """The request exceeds the exhaustive-enumeration budget."""
