"""Random Fourier curves and knots.

Sampling of random trigonometric curves, self-intersection geometry,
Kac-Rice expected-crossing integrals, Alexander polynomials of random
knots, and the experiment harness reproducing the censuses and root
statistics.
"""

__version__ = "0.1.0"

from .errors import (DegenerateSegmentsError, DiagonalSingularityError,
                     FourierKnotsError, InsufficientPrimesError,
                     InvalidDiagramError, NegativeDeterminantError,
                     NoConvergenceError, NonConvergentError, NonGenericError)
from .series import (CoefficientLaw, PlaneCurve, SpaceCurve, TrigSeries,
                     sample_grid, sample_plane_curve, sample_series,
                     sample_space_curve)

__all__ = [
    "CoefficientLaw", "TrigSeries", "PlaneCurve", "SpaceCurve",
    "sample_series", "sample_plane_curve", "sample_space_curve", "sample_grid",
    "FourierKnotsError", "NonGenericError", "DegenerateSegmentsError",
    "DiagonalSingularityError", "NonConvergentError",
    "NegativeDeterminantError", "InvalidDiagramError", "NoConvergenceError",
    "InsufficientPrimesError",
]
