"""Exception hierarchy shared across the package."""


class AtRiskError(Exception):
    """Base class for all errors raised by this package."""


class ParseError(AtRiskError):
    """A CSV cell or date could not be parsed."""


class SchemaError(AtRiskError):
    """The input file does not follow the expected column/row layout."""


class DomainError(AtRiskError):
    """A transform was applied outside its mathematical domain."""


class AlignmentError(AtRiskError):
    """No common window exists across the retained series."""


class StateError(AtRiskError):
    """An object is used before a required value has been resolved."""


class SingleClassError(AtRiskError):
    """A classifier was asked to fit a label vector with only one class."""


class SingularityError(AtRiskError):
    """A design matrix is (numerically) rank deficient."""


class UndefinedMetricError(AtRiskError):
    """A metric is undefined on the supplied labels (e.g. no positives)."""


class BacktestError(AtRiskError):
    """A refit failed at some forecast origin."""


class ConfigError(AtRiskError):
    """A run configuration failed validation."""
