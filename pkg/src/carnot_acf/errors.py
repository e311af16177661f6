"""Exception taxonomy shared by all modules.

Three base classes partition failures by kind; the CLI maps them onto
stable exit codes (input/syntax -> 1, mathematical domain -> 2,
unsupported feature -> 3).
"""

from __future__ import annotations


class ToolkitError(Exception):
    """Base class for every error raised by this package."""


class InputSyntaxError(ToolkitError):
    """Malformed textual input (polynomials, rationals, group files)."""


class PolySyntaxError(InputSyntaxError):
    """Polynomial grammar violation; carries the 0-based offset in the text."""

    def __init__(self, message: str, position: int):
        super().__init__(f"{message} (at position {position})")
        self.position = position


class UnknownVariable(InputSyntaxError):
    def __init__(self, name: str, position: int):
        super().__init__(f"unknown variable {name!r} (at position {position})")
        self.name = name
        self.position = position


class MathDomainError(ToolkitError):
    """Input is well-formed but outside the mathematical domain of the operation."""


class DimensionMismatch(MathDomainError):
    pass


class IndexOutOfRange(MathDomainError):
    pass


class ZeroPolynomial(MathDomainError):
    pass


class ZeroLambda(MathDomainError):
    pass


class BadDimension(MathDomainError):
    pass


class NotSkew(MathDomainError):
    pass


class DependentMatrices(MathDomainError):
    pass


class NoGroupLaw(MathDomainError):
    pass


class MalformedCoefficients(MathDomainError):
    pass


class NoNoncommutingPair(MathDomainError):
    pass


class ZeroB(MathDomainError):
    pass


class SingularSystem(MathDomainError):
    pass


class InvalidParams(MathDomainError):
    pass


class CertificateFailure(MathDomainError):
    """Constructed candidate failed exact re-verification; carries the residual."""

    def __init__(self, message: str, residual=None):
        super().__init__(message)
        self.residual = residual


class NotHomogeneous(MathDomainError):
    pass


class NegativeDegree(MathDomainError):
    pass


class BadDecomposition(MathDomainError):
    pass


class ZeroAcceptance(MathDomainError):
    pass


class RankDeficient(MathDomainError):
    pass


class UnsupportedFeatureError(ToolkitError):
    """Requested something the toolkit deliberately does not provide."""


class UnsupportedGroup(UnsupportedFeatureError):
    pass
