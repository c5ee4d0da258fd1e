"""
Continuation of power series q(z) = sum_{n>=1} a_n z^n by a Lindelof contour integral.

For an analytic interpolant h with h(n) = a_n,

    q(z) = -int_{c - i inf}^{c + i inf} h(s) z^s / (e^{2 pi i s} - 1) ds,   0 < c < 1,

the residues of the kernel at s = 1, 2, ... being 1/(2 pi i). The line is cut at
|Im s| <= t_max and integrated panel by panel with Gauss-Legendre nodes.
"""
import cmath
import logging
import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from django.conf import settings
from numpy.polynomial.legendre import leggauss

from interval_maps.exceptions import DomainError, PrecisionError, UnsupportedOrderError

logger = logging.getLogger(__name__)

TWO_PI = 2.0 * math.pi
REMOVABLE_DISTANCE = 1e-8
INTERPOLANT_REL_TAIL = 1e-12
GEOMETRIC_REL_TOL = 1e-12
DEFAULT_TAIL_TOL = 1e-6


@dataclass(frozen=True)
class ExponentialInterpolant:
    """h(s) = e^{rate s} envelope(s) with an envelope of zero exponential type"""
    rate: float
    envelope: Callable

    def __call__(self, s):
        s = np.asarray(s, dtype=complex)
        return np.exp(self.rate * s) * self.envelope(s)


@dataclass(frozen=True)
class ContinuationProblem:
    """
    Coefficients a_1..a_N with exponential rate v0 < 0 and the contour parameters

    interpolant, when given, is an analytic h(s) = e^{v0 s} g(s) matching the
    coefficients; otherwise geometric coefficient sequences are recognised.
    """
    coeffs: np.ndarray
    v0: float
    eps: float = 0.1
    line_real_part: float = 0.5
    t_max: float = 40.0
    points_per_unit: int = 32
    interpolant: Optional[ExponentialInterpolant] = None

    def __post_init__(self):
        object.__setattr__(self, 'coeffs', np.asarray(self.coeffs, dtype=complex))
        if self.v0 >= 0.0:
            raise UnsupportedOrderError(f'Continuation needs v(0) < 0, got {self.v0}')
        if not 0.0 < self.eps < 1.0:
            raise DomainError(f'eps must lie in (0, 1), got {self.eps}')
        if not 0.0 < self.line_real_part < 1.0:
            raise DomainError(f'line_real_part must lie in (0, 1), got {self.line_real_part}')
        if self.t_max <= 0.0 or self.points_per_unit < 1:
            raise DomainError('Contour needs t_max > 0 and at least one node per unit')
        if self.coeffs.size == 0:
            raise DomainError('Continuation needs at least one coefficient')

    @property
    def N(self):
        return self.coeffs.size

    @property
    def exponential_type(self):
        return max(0.0, math.pi + (1.0 - self.eps) * self.v0)

    @property
    def panels(self):
        return int(math.ceil(2.0 * self.t_max))


@dataclass
class ContinuedValue:
    z: complex
    value: complex
    tail_estimate: float
    line_real_part: float
    evaluations: int


def interpolant_terms(v0, eps, cap=None):
    """Number of coefficients for which |a_n| e^{-(1-eps) v0 n} has decayed below the relative tail"""
    cap = cap or settings.DYNZETA_INTERP_CAP
    needed = int(math.ceil(math.log(INTERPOLANT_REL_TAIL) / (eps * v0)))
    if needed > cap:
        logger.warning(f'Interpolant needs {needed} coefficients for v0={v0}, eps={eps}; capped at {cap}')
    return max(1, min(needed, cap))


def interpolant_h(problem, s):
    """
    Truncated sinc-type interpolant

        h(s) = sin(pi s)/pi sum_i (-1)^i a_i e^{(1-eps)(s-i) v0} / (s - i)

    Each term equals a_i e^{(1-eps)(s-i) v0} sinc(s - i); within 1e-8 of an
    integer the removable singularity is replaced by its series.

    Args:
        problem: ContinuationProblem
        s: complex point or array

    Returns:
        complex value(s) of h
    """
    s = np.asarray(s, dtype=complex)
    index = np.arange(1, problem.N + 1)
    distance = s[..., None] - index
    near = np.abs(distance) < REMOVABLE_DISTANCE
    safe = np.where(near, 1.0, distance)
    sinc = np.where(near, 1.0 - (math.pi * distance) ** 2 / 6.0, np.sin(math.pi * safe) / (math.pi * safe))
    with np.errstate(divide='ignore', invalid='ignore'):
        log_a = np.log(problem.coeffs)
        terms = np.exp(log_a + (1.0 - problem.eps) * distance * problem.v0) * sinc
    return terms.sum(axis=-1)


def geometric_interpolant(coeffs):
    """e^{rate s} c when a_n = c r^n with r > 0, else None"""
    coeffs = np.asarray(coeffs, dtype=complex)
    if coeffs.size < 2 or coeffs[0] == 0:
        return None
    ratio = coeffs[1] / coeffs[0]
    if abs(ratio.imag) > GEOMETRIC_REL_TOL * abs(ratio) or ratio.real <= 0.0:
        return None
    expected = coeffs[0] * ratio.real ** np.arange(coeffs.size)
    if np.max(np.abs(coeffs - expected)) > GEOMETRIC_REL_TOL * np.max(np.abs(coeffs)):
        return None
    rate = math.log(ratio.real)
    scale = complex(coeffs[0]) / ratio.real
    return ExponentialInterpolant(rate=rate, envelope=lambda s: scale * np.ones_like(s))


def fit_rate(coeffs, start=None):
    """Least-squares slope of log|a_n| over n >= start (default: second half)"""
    coeffs = np.asarray(coeffs)
    n = np.arange(1, coeffs.size + 1)
    start = start or max(1, coeffs.size // 2)
    keep = (n >= start) & (np.abs(coeffs) > 0)
    if keep.sum() < 2:
        raise DomainError('Rate fit needs two nonzero coefficients')
    slope, _ = np.polyfit(n[keep], np.log(np.abs(coeffs[keep])), 1)
    return float(slope)


def check_domain(problem, z):
    """Raise DomainError when z lies in the excluded sector or on the positive real axis"""
    if z == 0:
        raise DomainError('z = 0 is the expansion point; use the series')
    theta = cmath.phase(z)
    if theta == 0.0:
        raise DomainError(f'z = {z} lies on the positive real axis')
    if abs(z) >= 1.0 and abs(theta) <= problem.exponential_type:
        raise DomainError(
            f'z = {z} lies in the sector |arg z| <= {problem.exponential_type:.6g} excluded for v0={problem.v0}'
        )


def _integrand(interpolant, log_z, c, t):
    """h(s) z^s / (e^{2 pi i s} - 1) on s = c + i t, rearranged so no factor overflows"""
    s = c + 1j * t
    upper = t >= 0.0
    # e^{2 pi i s} decays for t > 0 and grows for t < 0
    with np.errstate(over='ignore', invalid='ignore'):
        exponent = np.where(upper, s * (log_z + interpolant.rate), s * (log_z + interpolant.rate - 2j * math.pi))
        denominator = np.where(upper, np.exp(2j * math.pi * s) - 1.0, 1.0 - np.exp(-2j * math.pi * s))
        return np.exp(exponent) * interpolant.envelope(s) / denominator


def lindelof_continue(problem, z, tail_tol=DEFAULT_TAIL_TOL):
    """
    Value of the continued series at z outside the excluded sector

    Args:
        problem: ContinuationProblem
        z: complex, z != 0, off the positive real axis and, for |z| >= 1, off the sector
        tail_tol: largest accepted truncation estimate relative to max(1, |value|)

    Returns:
        ContinuedValue
    """
    z = complex(z)
    check_domain(problem, z)
    interpolant = problem.interpolant or geometric_interpolant(problem.coeffs)
    if interpolant is None:
        raise UnsupportedOrderError('No analytic interpolant for these coefficients; pass one on the problem')

    theta = cmath.phase(z) % TWO_PI
    log_z = math.log(abs(z)) + 1j * theta
    c = problem.line_real_part
    nodes, weights = leggauss(problem.points_per_unit)

    panels = []
    start = -problem.panels / 2.0
    for k in range(problem.panels):
        t = start + k + 0.5 * (nodes + 1.0)
        panels.append(0.5 * np.dot(weights, _integrand(interpolant, log_z, c, t)))
    integral = complex(math.fsum(p.real for p in panels), math.fsum(p.imag for p in panels))
    value = -1j * integral

    ends = _integrand(interpolant, log_z, c, np.array([start, -start]))
    tail = float(abs(ends[0]) / (TWO_PI - theta) + abs(ends[1]) / theta)
    if tail > tail_tol * max(1.0, abs(value)):
        logger.error(f'Contour tail {tail:.2e} at z={z} exceeds {tail_tol:.1e}; increase t_max={problem.t_max}')
        raise PrecisionError(
            f'Lindelof contour truncated too early at z={z} (tail {tail:.2e}); increase t_max', estimate=tail,
            tolerance=tail_tol,
        )
    logger.debug(f'lindelof_continue z={z}: {value} (tail {tail:.1e})')
    return ContinuedValue(z=z, value=value, tail_estimate=tail, line_real_part=c,
                          evaluations=problem.panels * problem.points_per_unit)


def cauchy_riemann_residual(problem, z, delta=1e-3):
    """|dq/dx - dq/d(iy)| by central differences around z"""
    def value(point):
        return lindelof_continue(problem, point).value

    along_x = (value(z + delta) - value(z - delta)) / (2 * delta)
    along_y = (value(z + 1j * delta) - value(z - 1j * delta)) / (2j * delta)
    return float(abs(along_x - along_y))
