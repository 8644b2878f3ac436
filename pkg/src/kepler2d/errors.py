"""Exception and warning types shared across the package."""


class DomainError(ValueError):
    """An argument lies outside the domain of the function."""


class QuadratureError(RuntimeError):
    """A numerical integral failed to reach the requested tolerance.

    The partial result is kept on ``result`` so callers can still report it.
    """

    def __init__(self, message, result=None):
        super().__init__(message)
        self.result = result


class GridTooCoarseError(RuntimeError):
    """Eigenvalues drifted between grid refinements by more than allowed."""


class SingularNodeError(RuntimeError):
    """Two quadrature nodes coincide, so a singular kernel cannot be assembled."""


class BoundaryContaminationWarning(UserWarning):
    """A sampled field is not negligible at the edge of its grid."""
