"""Exception hierarchy.

Two families are kept apart so the command line can map them to exit codes:
``FloodRiskError`` covers model and numerical failures (exit 1) and
``InputError`` covers unreadable files, bad schemas and invalid configuration
(exit 2).
"""


class FloodRiskError(Exception):
    """Base class for model-level failures."""


class DomainError(FloodRiskError, ValueError):
    """An argument lies outside the domain where a formula is defined."""


class DegenerateSampleError(FloodRiskError, ValueError):
    """A sample carries too little variation for the requested statistic."""


class NormalizationError(DomainError):
    """A decision-matrix column cannot be normalized."""

    def __init__(self, message, criterion=None):
        super().__init__(message)
        self.criterion = criterion


class ConvergenceError(FloodRiskError):
    """An optimizer stopped without meeting its tolerance.

    The best point found is kept on ``best`` so callers can inspect it.
    """

    def __init__(self, message, best=None, iterations=None):
        super().__init__(message)
        self.best = best
        self.iterations = iterations


class ConsistencyError(FloodRiskError):
    """Two results that must agree by construction do not."""


class LayeringError(FloodRiskError):
    """Compensation layer boundaries are not strictly increasing."""


class BracketError(FloodRiskError):
    """A root-finding bracket does not straddle the target."""


class InputError(Exception):
    """Base class for IO, schema and configuration problems."""


class SchemaError(InputError):
    """A CSV header does not contain the declared columns."""


class RowParseError(InputError):
    """One or more CSV rows could not be parsed.

    ``errors`` holds ``(line_number, message)`` pairs, with line numbers
    counted from 1 at the header row.
    """

    def __init__(self, path, errors):
        self.path = str(path)
        self.errors = list(errors)
        head = "; ".join(f"line {ln}: {msg}" for ln, msg in self.errors[:5])
        more = "" if len(self.errors) <= 5 else f" (+{len(self.errors) - 5} more)"
        super().__init__(f"{self.path}: {len(self.errors)} bad row(s): {head}{more}")


class ConfigError(InputError):
    """Configuration is missing, malformed or refers to missing files."""
