"""Exception types shared across the package."""


class EigsurgError(Exception):
    """Base class for every error raised by this package.

    A ``stage`` attribute, when set, names the pipeline step that failed.
    """

    stage: str | None = None


class KernelError(EigsurgError):
    """A dense linear-algebra primitive failed (e.g. an iteration did not converge)."""


class RankDeficient(KernelError):
    """A matrix required to have full column rank does not, at the working cutoff."""


class Singular(KernelError):
    """A matrix required to be invertible is singular at the working cutoff."""


class DimensionMismatch(EigsurgError):
    """Operand shapes do not conform."""


class SchemaError(EigsurgError):
    """A problem or gain document does not match the documented schema."""


class PairingMismatch(EigsurgError):
    """A claimed conjugate column pair fails conjugacy."""


class NotReal(EigsurgError):
    """An unpaired column carries a non-negligible imaginary part."""


class Inadmissible(EigsurgError):
    """No input direction exists for a specified target: the defect it
    requires lies outside the range of the input matrix."""

    def __init__(self, index: int, message: str = ""):
        self.index = index
        super().__init__(message or f"target {index}: required direction is outside range(B)")


class NotControllable(EigsurgError):
    """A state/input pair fails the reachability rank test."""


class InvarianceViolated(EigsurgError):
    """The specified span is not invariant where the construction requires it;
    signals inconsistent upstream data rather than bad user input."""


class SelectionFailed(EigsurgError):
    """Eigenvector selection exhausted its retry budget on dependent choices."""


class ProblemInvalid(EigsurgError):
    """Structural validation found violations; carries the full list."""

    def __init__(self, violations):
        self.violations = list(violations)
        detail = "; ".join(str(v) for v in self.violations)
        super().__init__(detail or "problem is structurally invalid")
