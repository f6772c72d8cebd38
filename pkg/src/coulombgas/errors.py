"""Exception hierarchy shared across the package.

Two families matter to callers: :class:`ValidationError` for bad inputs
(rejected before any work happens) and :class:`NumericalError` for runs that
started but could not finish to tolerance.  The CLI maps them to exit codes
2 and 3 respectively.
"""


class ValidationError(ValueError):
    """Input violates a documented precondition."""


class NumericalError(RuntimeError):
    """A numerical procedure failed to meet its tolerance contract."""


class NonConvergenceError(NumericalError):
    """Iteration exhausted its budget; carries the final residual."""

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class CoincidentPointsError(ValidationError):
    """Two points coincide, making the pairwise energy infinite."""


class UnderResolvedError(ValidationError):
    """Grid spacing too coarse for the requested truncation radius."""


class IncompatibleFluxError(NumericalError):
    """Neumann data violates the compatibility condition beyond repair."""

    def __init__(self, message, defect=None):
        super().__init__(message)
        self.defect = defect


class ScreeningInequalityError(NumericalError):
    """Boundary-flux energy too large for the screening construction."""

    def __init__(self, flux_energy, bound):
        super().__init__(
            "screening precondition failed: boundary flux energy "
            f"M={flux_energy:.6g} exceeds the admissible bound {bound:.6g}"
        )
        self.flux_energy = flux_energy
        self.bound = bound
