"""Exception types shared across the package."""

from __future__ import annotations


class EmbmteError(Exception):
    """Base class for every error raised by this package."""


class ValidationError(EmbmteError):
    """Input data or arguments violate a documented invariant."""


class CorpusParseError(EmbmteError):
    """A corpus file could not be parsed; carries the offending line number."""

    def __init__(self, line_no: int, message: str):
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no


class EmbeddingFormatError(EmbmteError):
    """An embedding file does not conform to the EMB1 binary format."""


class MissingKeysError(EmbmteError):
    """Keys required by the pipeline are absent from an embedding store."""

    def __init__(self, missing, context: str = ""):
        self.missing = sorted(missing)
        shown = ", ".join(self.missing[:10])
        suffix = "" if len(self.missing) <= 10 else f" (and {len(self.missing) - 10} more)"
        prefix = f"{context}: " if context else ""
        super().__init__(f"{prefix}{len(self.missing)} missing key(s): {shown}{suffix}")


class ConvergenceError(EmbmteError):
    """The SMO solver exhausted its iteration budget before meeting tolerance."""

    def __init__(self, violation: float, iterations: int):
        super().__init__(
            f"solver did not converge within {iterations} pair updates "
            f"(max KKT violation {violation:.3e}); retry with a looser tol"
        )
        self.violation = violation
        self.iterations = iterations
