"""Exception hierarchy.

``ConfigError`` subclasses map to CLI exit code 2, ``AnalysisError``
subclasses to exit code 3.
"""

from __future__ import annotations


class SigflipError(Exception):
    """Base class for all package errors."""

    def payload(self) -> dict:
        return {"error": type(self).__name__, "message": str(self)}


class ConfigError(SigflipError):
    pass


class ExpressionError(ConfigError):
    pass


class ExpressionSyntaxError(ExpressionError):
    def __init__(self, message: str, offset: int) -> None:
        super().__init__(f"{message} at offset {offset}")
        self.offset = offset

    def payload(self) -> dict:
        return {**super().payload(), "offset": self.offset}


class UnknownIdentifier(ExpressionError):
    def __init__(self, name: str, offset: int = -1) -> None:
        super().__init__(f"unknown identifier {name!r}")
        self.name = name
        self.offset = offset

    def payload(self) -> dict:
        return {**super().payload(), "name": self.name}


class ArityError(ExpressionError):
    pass


class UnknownGalleryItem(ConfigError, KeyError):
    def __str__(self) -> str:
        return Exception.__str__(self)


class AnalysisError(SigflipError):
    """Numerical failure; optionally carries the offending point."""

    def __init__(self, message: str, point=None) -> None:
        super().__init__(message)
        self.point = None if point is None else [float(c) for c in point]

    def payload(self) -> dict:
        out = super().payload()
        if self.point is not None:
            out["point"] = self.point
        return out


class DomainError(AnalysisError):
    def __init__(self, message: str, node=None) -> None:
        super().__init__(message)
        self.node = node


class EigenFailure(AnalysisError):
    pass


class DegenerateMetric(AnalysisError):
    pass


class NotLorentzian(AnalysisError):
    pass


class NotTimelike(AnalysisError):
    pass


class PivotFailure(AnalysisError):
    pass


class NormalizationError(AnalysisError):
    pass


class NearHypersurface(AnalysisError):
    pass


class NotTimelikeInLorentzSector(AnalysisError):
    pass


class ExtrapolationFailure(AnalysisError):
    pass


class ZeroScale(AnalysisError, ValueError):
    pass


class NotOnHypersurface(AnalysisError):
    pass


class KernelDimensionError(AnalysisError):
    pass


class NotTransverseTypeChanging(AnalysisError):
    pass


class ClassificationMismatch(AnalysisError):
    pass


class DegenerateRegion(AnalysisError):
    pass


class NotComoving(AnalysisError):
    pass
