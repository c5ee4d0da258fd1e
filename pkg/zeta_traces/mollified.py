"""
Mollified flat traces: an independent quadrature check of the fixed-point formula.

The kernel of Q_beta is replaced by gamma_eps(phi_beta(x) - x) W_beta(x) with a
normalized C-infinity bump gamma supported in (0, eps); its integral over [0, 1]
tends to W_beta(x_beta) / |1 - phi_beta'(x_beta)| as eps -> 0.
"""
import logging
import math
from dataclasses import dataclass, field
from typing import Dict

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.integrate import quad

from interval_maps.exceptions import ConvergenceError, DomainError
from interval_maps.roots import newton_bisection
from periodic_orbits.words import iter_shell

from .constants import CHUNK_WORDS

logger = logging.getLogger(__name__)

# |z|^N below this fixes the default truncation
MOLLIFIED_TRUNCATION = 1e-10


def _bump(u):
    inside = (u > 0.0) & (u < 1.0)
    out = np.zeros_like(u)
    out[inside] = np.exp(-1.0 / (u[inside] * (1.0 - u[inside])))
    return out


_BUMP_MASS, _ = quad(lambda t: math.exp(-1.0 / (t * (1.0 - t))), 0.0, 1.0, epsabs=1e-15, epsrel=1e-13)


@dataclass
class MollifiedResult:
    value: complex
    estimates: Dict[float, complex] = field(default_factory=dict)
    richardson: bool = True
    cutoff_N: int = 0


class MollifiedTrace:
    """Quadrature of the mollified kernel diagonal for (Q_w(z))^m"""

    def __init__(self, zeta_service, quad_points=64):
        self.zeta = zeta_service
        self.induced = zeta_service.induced
        self.orbits = zeta_service.orbits
        self.nodes, self.weights = leggauss(quad_points)

    def default_cutoff(self, z, m):
        modulus = abs(z)
        if not 0.0 < modulus < 1.0:
            raise DomainError(f'Mollified traces are an oracle for 0 < |z| < 1, got z={z}')
        return max(m, math.ceil(math.log(MOLLIFIED_TRUNCATION) / math.log(modulus)))

    def evaluate(self, z, m, eps=1e-3, cutoff_N=None, richardson=True):
        """
        Mollified trace, optionally Richardson-extrapolated over eps, 2 eps, 4 eps

        Args:
            z: complex with 0 < |z| < 1
            m: power (small, oracle use)
            eps: finest mollifier width
            cutoff_N: largest |beta| (default: |z|^N < 1e-10)
            richardson: combine three widths to cancel the O(eps) and O(eps^2) terms

        Returns:
            MollifiedResult
        """
        if eps <= 0.0:
            raise DomainError(f'eps must be positive, got {eps}')
        cutoff_N = cutoff_N or self.default_cutoff(z, m)
        widths = [4 * eps, 2 * eps, eps] if richardson else [eps]
        estimates = {width: self.trace_at(z, m, width, cutoff_N) for width in widths}
        if richardson:
            value = (8 * estimates[eps] - 6 * estimates[2 * eps] + estimates[4 * eps]) / 3
        else:
            value = estimates[eps]
        logger.debug(f'mollified trace m={m}, z={z}: {value} from widths {widths}')
        return MollifiedResult(value=complex(value), estimates=estimates, richardson=richardson, cutoff_N=cutoff_N)

    def trace_at(self, z, m, eps, cutoff_N):
        """sum_beta z^{|beta|} int gamma_eps(phi_beta(x) - x) W_beta(x) dx over |beta| <= cutoff_N"""
        terms = []
        for t in range(m, cutoff_N + 1):
            shell = math.fsum(
                math.fsum(self._word_integrals(words, eps)) for words in iter_shell(t, m, chunk_size=CHUNK_WORDS)
            )
            terms.append(shell * complex(z) ** t)
        return complex(math.fsum(v.real for v in terms), math.fsum(v.imag for v in terms))

    def _word_integrals(self, words, eps):
        x_fix = self.orbits.fixed_points(words).x_fix

        def displacement(points):
            jet, _ = self.induced.word_batch(words, points)
            return jet.value - points, jet.coeffs[1] - 1.0

        at_zero, _ = displacement(np.zeros(words.shape[0]))
        target = np.minimum(eps, at_zero)
        try:
            x_lo = newton_bisection(displacement, target, 0.0, x_fix)
        except ConvergenceError:
            logger.error(f'Support of the mollified kernel not found for {words.shape[0]} words')
            raise

        half = 0.5 * (x_fix - x_lo)
        points = (0.5 * (x_fix + x_lo))[:, None] + half[:, None] * self.nodes[None, :]
        rows = np.repeat(words, self.nodes.size, axis=0)
        jet, log_w = self.induced.word_batch(rows, points.ravel())
        shift = (jet.value - points.ravel()).reshape(points.shape)
        kernel = _bump(shift / eps) / (_BUMP_MASS * eps)
        integrand = kernel * np.exp(log_w).reshape(points.shape)
        return half * (integrand @ self.weights)
