"""Exception types shared across the package."""

from __future__ import annotations


class XRForgeError(Exception):
    """Base class for every error raised by this package."""


class DocumentSyntaxError(XRForgeError):
    """A document is not syntactically well formed.

    Carries ``line`` and ``column`` (1-based) when the underlying parser
    reports a position.
    """

    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        if line is not None:
            message = f"{message} (line {line}, column {column})"
        super().__init__(message)
        self.line = line
        self.column = column


class StructureError(XRForgeError):
    """A parsed document violates a structural invariant.

    ``feature_id`` names the offending feature when one can be identified.
    """

    def __init__(self, message: str, feature_id: str | None = None):
        super().__init__(message)
        self.feature_id = feature_id


class ModelMismatch(XRForgeError):
    """A configuration references a model other than the one supplied."""


class ModelTooLarge(XRForgeError):
    """The model exceeds the exhaustive-search guard."""


class InvalidConfiguration(XRForgeError):
    """A configuration fails the complete-mode checks required for generation."""

    def __init__(self, message: str, diagnostics=()):
        super().__init__(message)
        self.diagnostics = list(diagnostics)


class UnknownModel(XRForgeError):
    """The model lacks feature ids the generation rules depend on."""
