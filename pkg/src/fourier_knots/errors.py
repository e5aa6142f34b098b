"""Exception types shared across the package."""


class FourierKnotsError(Exception):
    """Base class for all package-specific errors."""


class NonGenericError(FourierKnotsError):
    """A geometric configuration is non-generic (tangential intersection,
    near-equal projection heights, degenerate projection direction).

    Callers are expected to resample or perturb and retry.
    """


class DegenerateSegmentsError(FourierKnotsError):
    """Collinear overlapping (or endpoint-touching) segment pairs were found.

    The offending index pairs are reported in ``pairs``, distinct from any
    proper transversal intersections.
    """

    def __init__(self, pairs, message=None):
        self.pairs = list(pairs)
        super().__init__(message or f"degenerate segment pairs: {self.pairs}")


class DiagonalSingularityError(FourierKnotsError):
    """Correlation log-Hessian requested too close to the diagonal t1 = t2."""


class NonConvergentError(FourierKnotsError):
    """A numerical result did not stabilise under refinement at the
    requested tolerance."""

    def __init__(self, message, value=None, refined_value=None):
        self.value = value
        self.refined_value = refined_value
        super().__init__(message)


class NegativeDeterminantError(FourierKnotsError):
    """The Kac-Rice Hessian determinant was negative beyond roundoff at a
    quadrature node; indicates a truncation or implementation bug."""


class InvalidDiagramError(FourierKnotsError):
    """A crossing diagram's combinatorics are inconsistent (bad Gauss code,
    multi-component traversal, or an Alexander value impossible for a knot).
    """


class NoConvergenceError(FourierKnotsError):
    """Root finding hit the iteration cap.  Partial results are attached."""

    def __init__(self, message, roots=None, converged=None):
        self.roots = roots
        self.converged = converged
        super().__init__(message)


class InsufficientPrimesError(FourierKnotsError):
    """Modular determinant reconstruction exceeded the configured prime cap."""
