"""Exception types shared across the package."""

__all__ = [
    "SingularSystemError",
    "NumericGuardError",
    "NearZeroFrequencyError",
]


class SingularSystemError(RuntimeError):
    """A linear system was too ill-conditioned or rank-deficient to solve.

    Carries the condition-number estimate that triggered the failure (may be
    ``inf`` when the matrix is exactly singular).
    """

    def __init__(self, condition: float, message: str | None = None):
        self.condition = float(condition)
        super().__init__(message or f"singular or near-singular system (cond ~ {condition:.3e})")


class NumericGuardError(ArithmeticError):
    """A computation hit a protected near-zero denominator and cannot proceed."""


class NearZeroFrequencyError(ValueError):
    """Amplitude/phase are undefined for an (almost) zero-frequency component.

    Callers should report such a component as a straight trend line instead.
    """
