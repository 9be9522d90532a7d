"""Exception types shared across the package.

The CLI maps these onto stable exit codes (see ``tumourlab.cli``).
"""


class TumourLabError(Exception):
    """Base class for all errors raised by tumourlab."""


class ConfigError(TumourLabError):
    """Invalid configuration: parse errors, bad values, unknown keys.

    ``problems`` holds ``(line_number, message)`` pairs; line 0 means the
    problem is not tied to a specific line.
    """

    def __init__(self, problems):
        if isinstance(problems, str):
            problems = [(0, problems)]
        self.problems = list(problems)
        text = "; ".join(
            f"line {line}: {msg}" if line else msg for line, msg in self.problems
        )
        super().__init__(text)


class SupportError(ConfigError):
    """Density reached the boundary cells; the domain is too small."""


class InfeasibleModelError(TumourLabError):
    """Growth terms cannot satisfy the homeostatic-pressure condition."""


class GridError(TumourLabError, ValueError):
    """Operation requested on a grid that is too small."""


class DomainError(TumourLabError, ValueError):
    """Argument outside the mathematical domain of an operation."""


class NumericalFailure(TumourLabError):
    """NaN/Inf, excessive clamping or another breakdown of a time step."""


class NewtonDivergence(NumericalFailure):
    """Damped Newton iteration did not reach the residual tolerance."""


class InsufficientRowsError(TumourLabError, ValueError):
    """Too few successful sweep rows to form a verdict."""
