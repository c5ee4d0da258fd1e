"""
Exception hierarchy shared by all dynzeta apps
"""


class DynZetaError(Exception):
    """Base class for every error raised by the numerical services"""


class DomainError(DynZetaError):
    """Input lies outside the domain of the requested operation"""


class BoundaryError(DynZetaError):
    """Point falls on a marker a_l (level boundary)"""

    def __init__(self, message, point=None, marker_index=None):
        super().__init__(message)
        self.point = point
        self.marker_index = marker_index


class UnsupportedOrderError(DynZetaError):
    """Requested jet order or feature exceeds what the inputs support"""


class ConvergenceError(DynZetaError):
    """Iterative method ran out of budget"""

    def __init__(self, message, bracket=None, last_iterate=None):
        super().__init__(message)
        self.bracket = bracket
        self.last_iterate = last_iterate


class PrecisionError(DynZetaError):
    """Error estimate exceeds the requested tolerance"""

    def __init__(self, message, estimate=None, tolerance=None):
        super().__init__(message)
        self.estimate = estimate
        self.tolerance = tolerance


class PoleError(DynZetaError):
    """Evaluation point too close to a known pole"""
