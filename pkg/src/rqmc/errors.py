"""Exception types shared across the package."""


class CapacityError(ValueError):
    """A requested size exceeds what the implementation supports."""


class ContractError(ValueError):
    """A caller violated a precondition (distinct from a checked failure)."""


class NotPositiveDefiniteError(ValueError):
    """Cholesky factorization hit a non-positive pivot."""

    def __init__(self, pivot_index: int, pivot_value: float):
        self.pivot_index = pivot_index
        self.pivot_value = pivot_value
        super().__init__(
            f"matrix is not positive definite: pivot {pivot_index} "
            f"has value {pivot_value:.6g}"
        )


class QuadratureToleranceError(RuntimeError):
    """Adaptive quadrature did not reach the requested tolerance."""

    def __init__(self, achieved: float, requested: float, estimate: float):
        self.achieved = achieved
        self.requested = requested
        self.estimate = estimate
        super().__init__(
            f"quadrature reached abs error {achieved:.3g} > requested "
            f"{requested:.3g} (estimate {estimate!r})"
        )


class InfeasibleRegimeError(ValueError):
    """Growth exponents outside the regime where the rate theory applies."""


class InsufficientDataError(ValueError):
    """Not enough usable records to fit a rate."""
