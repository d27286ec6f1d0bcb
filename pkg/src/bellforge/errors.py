"""Exception types shared across the package."""


class BellforgeError(Exception):
    """Base class for all package-specific errors."""


class ScenarioMismatchError(BellforgeError):
    """Two objects refer to incompatible (n_inputs, n_outputs) scenarios."""


class DimensionCapError(BellforgeError):
    """A dense operation would exceed the configured dimension cap."""

    def __init__(self, required: int, cap: int):
        self.required = required
        self.cap = cap
        super().__init__(
            f"requested dense dimension {required} exceeds the configured cap {cap}"
        )


class BudgetExceededError(BellforgeError):
    """An exact enumeration would exceed its evaluation budget."""

    def __init__(self, required: int, budget: int, what: str = "enumeration"):
        self.required = required
        self.budget = budget
        super().__init__(
            f"exact {what} needs {required} inner evaluations, over the budget of {budget}"
        )


class EigenConvergenceError(BellforgeError):
    """The symmetric eigensolver failed to converge."""


class PovmValidationError(BellforgeError):
    """A POVM family violates positivity or completeness."""

    def __init__(self, message: str, witness: float | None = None):
        self.witness = witness
        super().__init__(message)


class UndefinedRatioError(BellforgeError):
    """A violation ratio has a (near-)zero denominator; 0/0 is not silently 0 here."""


class ProvenanceError(BellforgeError):
    """Objects passed together were built from different sign tensors."""


class PositivityError(BellforgeError):
    """A positivity premise fails (negative operator or nonpositive pairing)."""

    def __init__(self, message: str, witness: float | None = None):
        self.witness = witness
        super().__init__(message)
