import logging
from typing import Callable, Iterable, List

import numpy as np
from django.conf import settings

from induced_map.constants import POTENTIAL_CONST, POTENTIAL_MQL
from interval_maps.exceptions import DomainError, UnsupportedOrderError

from .lindelof import (
    ContinuationProblem, ContinuedValue, ExponentialInterpolant, fit_rate, interpolant_terms, lindelof_continue,
)

logger = logging.getLogger(__name__)

RATE_WARNING_FRACTION = 0.05


class ContinuationService:
    """Continuation of z -> (Q_w(z) f)(x) past the unit disc"""

    def __init__(self, induced, eps=None, line_real_part=0.5, t_max=None, points_per_unit=None):
        self.induced = induced
        self.map = induced.map
        self.potential = induced.potential
        self.eps = eps or settings.DYNZETA_LINDELOF_EPS
        self.line_real_part = line_real_part
        self.t_max = t_max or settings.DYNZETA_CONTOUR_T_MAX
        self.points_per_unit = points_per_unit or settings.DYNZETA_CONTOUR_POINTS_PER_UNIT

    @property
    def v0(self):
        return self.potential.v0_at_zero

    def _require_negative_v0(self):
        if self.v0 >= 0.0:
            logger.error(f'Continuation requested with v(0) = {self.v0}')
            raise UnsupportedOrderError(f'The Lindelof continuation needs v(0) < 0, got {self.v0}')

    def coefficients_from_operator(self, f: Callable, x, N=None):
        """
        a_n = e^{w(phi_n(x))} f(phi_n(x)) for n = 1..N

        Args:
            f: vectorized callable on [0, 1]
            x: point in [0, 1]
            N: number of coefficients (default from the interpolant tail rule)

        Returns:
            complex array a_1..a_N
        """
        self._require_negative_v0()
        if not 0.0 <= x <= 1.0:
            raise DomainError(f'x must lie in [0, 1], got {x}')
        N = N or interpolant_terms(self.v0, self.eps)
        ell = np.arange(1, N + 1)
        points = np.full(N, float(x))
        images = np.asarray(self.induced.phi(ell, points, order=1).value, dtype=float)
        log_w = np.asarray(self.induced.log_weight(ell, points), dtype=float)
        coeffs = np.exp(log_w) * np.asarray(f(images), dtype=complex)

        rate = fit_rate(coeffs) if N >= 4 else self.v0
        if abs(rate - self.v0) > RATE_WARNING_FRACTION * abs(self.v0):
            logger.warning(f'Coefficient rate {rate:.4g} differs from v(0) = {self.v0:.4g}')
        return coeffs

    def operator_interpolant(self, f: Callable, x):
        """
        Analytic h(s) = e^{v(0) s} g(s) with h(n) = e^{w(phi_n(x))} f(phi_n(x))

        Available for the Farey family, where phi_s(x) = 1/(s + x), and f analytic
        on a neighbourhood of [0, 1] accepting complex arrays.

        Other families raise UnsupportedOrderError. Their only interpolant is the
        truncated sinc-type interpolant_h, which grows like e^{pi |Im s|} along the
        contour, so the vertical-line integral against 1/(e^{2 pi i s} - 1) does not
        converge with it.
        """
        pot = self.potential
        if not self.map.is_mobius_gauss or pot.kind not in (POTENTIAL_MQL, POTENTIAL_CONST):
            raise UnsupportedOrderError(
                f'No closed-form interpolant for family {self.map.family} with a {pot.kind} potential'
            )
        power = 2.0 * pot.q if pot.kind == POTENTIAL_MQL else 0.0

        def envelope(s):
            shifted = s + x
            return shifted ** (-power) * f(1.0 / shifted)

        return ExponentialInterpolant(rate=pot.v0, envelope=envelope)

    def problem(self, f: Callable, x, N=None, eps=None):
        eps = eps or self.eps
        return ContinuationProblem(
            coeffs=self.coefficients_from_operator(f, x, N), v0=self.v0, eps=eps,
            line_real_part=self.line_real_part, t_max=self.t_max, points_per_unit=self.points_per_unit,
            interpolant=self.operator_interpolant(f, x),
        )

    def continue_Qw(self, f: Callable, x, z, eps=None) -> ContinuedValue:
        """
        Continued value of (Q_w(z) f)(x)

        Args:
            f: analytic test function, vectorized over complex arrays
            x: point in [0, 1]
            z: complex outside the excluded sector
            eps: interpolant parameter (default DYNZETA_LINDELOF_EPS)

        Returns:
            ContinuedValue
        """
        result = lindelof_continue(self.problem(f, x, eps=eps), z)
        logger.info(f'(Q_w({z}) f)({x}) continued to {result.value:.12g} (tail {result.tail_estimate:.1e})')
        return result

    def continue_path(self, f: Callable, x, z_path: Iterable[complex], eps=None) -> List[ContinuedValue]:
        """Continued values along a path, one contour integral per point"""
        problem = self.problem(f, x, eps=eps)
        return [lindelof_continue(problem, z) for z in z_path]
