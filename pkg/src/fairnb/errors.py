"""Exception hierarchy shared across the package."""


class FairNBError(Exception):
    """Base class for all errors raised by this package."""


class InvalidQueryError(FairNBError):
    """Evidence refers to the decision variable or an unknown variable."""


class InvalidPatternError(FairNBError):
    """A pattern (x, y) violates its structural preconditions."""


class UndefinedQueryError(FairNBError):
    """A query is ill-defined (e.g. conditioning on a zero-probability event)."""


class InvalidIntervalError(FairNBError):
    """An interval [l, u] with l > u was supplied."""


class DegeneratePatternError(FairNBError):
    """P(xy) = P(y): the sensitive part is implied and the divergence score degenerates."""


class DimensionError(FairNBError):
    """Count tables do not match the model schema."""


class ProgramSchemaError(FairNBError):
    """An optimization expression references an undeclared or missing variable."""


class InvalidInitError(FairNBError):
    """Solver initial point is not strictly positive or grossly infeasible."""


class MustSmoothError(FairNBError):
    """Zero counts reached a consumer that requires strictly positive counts."""


class UnsupportedThresholdError(FairNBError):
    """delta = 0 cannot be compiled into the signomial fairness constraints."""


class SolverError(FairNBError):
    """The signomial solver failed in a way the caller cannot recover from."""


class SearchSpaceCapError(FairNBError):
    """Brute-force enumeration refused: pattern space exceeds the cap."""


class IngestionError(FairNBError):
    """CSV / schema-config ingestion failed."""


class InvalidFoldsError(FairNBError):
    """Cross-validation fold count is unusable for the dataset."""
