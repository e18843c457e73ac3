"""Exception classes shared by every simulator module."""


class CpiSimError(Exception):
    """Base class for all simulator errors."""


class InvalidGeometry(CpiSimError):
    """Geometry parameters are unphysical (non-positive lengths, no real image...)."""


class UnderResolved(CpiSimError):
    """A quadrature or kernel grid is too coarse to sample its phase safely.

    Raised whenever the phase of an oscillatory integrand would advance by
    more than pi/2 between adjacent samples, instead of silently aliasing.
    """


class EmptyOverlap(CpiSimError):
    """The refocusing remap leaves too little of the requested grid inside
    the acquired coordinate range."""


class OutOfRange(CpiSimError):
    """A requested coordinate lies outside the sampled axis."""


class MissingFeatureScale(CpiSimError):
    """A resolution formula needs a feature scale (object detail size or
    source diameter) that was never declared."""


class DegenerateStatistics(CpiSimError):
    """A Monte Carlo estimate collapsed (e.g. a mean detected intensity of
    exactly zero), so the covariance estimator is meaningless."""


class ParseError(CpiSimError):
    """Config text is syntactically malformed; carries a line number."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class ValidationError(CpiSimError):
    """Config parsed but is semantically invalid; aggregates field-addressed
    diagnostics."""

    def __init__(self, problems):
        if isinstance(problems, str):
            problems = [problems]
        self.problems = list(problems)
        super().__init__("; ".join(self.problems))
