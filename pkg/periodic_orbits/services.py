import logging
from dataclasses import dataclass
from typing import List

import numpy as np
from django.conf import settings

from induced_map.constants import POTENTIAL_CONST, POTENTIAL_MQL
from induced_map.services import Word
from interval_maps.constants import BRANCH_EXPANDING, BRANCH_PARABOLIC
from interval_maps.exceptions import ConvergenceError
from interval_maps.jets import Jet

from .words import binary_words

logger = logging.getLogger(__name__)

# Fixed points must satisfy |phi_beta(x) - x| below this after the iteration
FIXED_POINT_RESIDUAL = 1e-12


@dataclass
class PeriodicRecord:
    """Fixed point x_beta of phi_beta, i.e. a periodic point of G^m"""
    word: Word
    x_fix: float
    deriv_phi: float
    logW: float
    z_exponent: int

    @property
    def m(self):
        return self.word.m


@dataclass
class TPeriodicPoint:
    """Periodic point of T^n coded by its binary itinerary"""
    word: str
    x: float
    log_weight: float


@dataclass
class PeriodicBatch:
    """Column arrays for a block of words of equal length"""
    words: np.ndarray
    x_fix: np.ndarray
    deriv_phi: np.ndarray
    logW: np.ndarray

    @property
    def z_exponent(self):
        return self.words.sum(axis=1)


class PeriodicOrbitService:
    """Periodic points of G^m (word fixed points) and of T^n (binary itineraries)"""

    def __init__(self, induced, tol=None, maxiter=None):
        self.induced = induced
        self.maps = induced.maps
        self.tol = tol if tol is not None else 1e-15
        self.maxiter = maxiter if maxiter is not None else settings.DYNZETA_ROOT_MAXITER

    def fixed_point(self, word, tol=None):
        """
        Fixed point of phi_beta by contraction from 1/2 plus a Newton polish

        Args:
            word: sequence (beta_1, ..., beta_m)
            tol: stopping threshold on successive iterates

        Returns:
            PeriodicRecord
        """
        word = Word(word)
        tol = self.tol if tol is None else tol
        x = 0.5
        for iteration in range(self.maxiter):
            jet, _ = self.induced.word_weight(word, x, order=1)
            x_next = float(jet.value)
            if abs(x_next - x) < tol:
                x = x_next
                break
            x = x_next
        else:
            logger.error(f'Contraction for word {word} stalled at x={x!r}')
            raise ConvergenceError(f'Fixed point of {word} not found in {self.maxiter} iterations', last_iterate=x)

        jet, _ = self.induced.word_weight(word, x, order=1)
        slope = float(jet.derivative(1))
        polished = x - (float(jet.value) - x) / (slope - 1.0)
        markers = self.maps.marker_sequence(word[0])
        if markers[word[0]] < polished < markers[word[0] - 1]:
            polished_jet, _ = self.induced.word_weight(word, polished, order=1)
            if abs(float(polished_jet.value) - polished) <= abs(float(jet.value) - x):
                x = polished

        return self._record(word, x)

    def _record(self, word, x):
        jet, log_w = self.induced.word_weight(word, x, order=1)
        residual = abs(float(jet.value) - x)
        if residual > FIXED_POINT_RESIDUAL:
            raise ConvergenceError(f'Fixed point residual {residual:.2e} for word {word}', last_iterate=x)
        return PeriodicRecord(
            word=word, x_fix=x, deriv_phi=float(jet.derivative(1)), logW=log_w, z_exponent=word.total,
        )

    def fixed_points(self, words):
        """
        Vectorized fixed points for an (n, m) block of words

        Args:
            words: integer array, one word per row

        Returns:
            PeriodicBatch
        """
        words = np.atleast_2d(np.asarray(words, dtype=np.int64))
        x = self._solve_fixed(lambda points: self.induced.word_batch(words, points)[0], words.shape[0])

        jet, log_w = self.induced.word_batch(words, x)
        worst = float(np.max(np.abs(jet.value - x)))
        if worst > FIXED_POINT_RESIDUAL:
            logger.error(f'fixed_points: worst residual {worst:.2e} above {FIXED_POINT_RESIDUAL}')
            raise ConvergenceError(f'Word fixed points did not converge (worst residual {worst:.2e})', last_iterate=x)
        return PeriodicBatch(words=words, x_fix=x, deriv_phi=np.array(jet.coeffs[1]), logW=log_w)

    # --- periodic points of T ---------------------------------------------

    def t_periodic_arrays(self, n):
        """
        Periodic points of T^n for all 2^n binary itineraries

        Args:
            n: period (>= 1)

        Returns:
            tuple (bits (2^n, n) uint8, x (2^n,), log weights (2^n,)) where the
            log weight is the sum of v along the orbit; the all-zeros itinerary
            is the fixed point 0 with log weight n v(0)
        """
        bits = binary_words(n)
        zero_row = ~bits.any(axis=1)
        active = ~zero_row
        x = np.zeros(bits.shape[0])
        log_w = np.full(bits.shape[0], n * self.induced.potential.v0_at_zero)

        if np.any(active):
            sub = bits[active]
            x_sub = self._solve_fixed(lambda points: self._compose_itinerary(sub, points), sub.shape[0])
            x[active] = x_sub
            log_w[active] = self._itinerary_weight(sub, x_sub)

        logger.debug(f't_periodic_arrays: {bits.shape[0]} itineraries of length {n}')
        return bits, x, log_w

    def t_periodic_points(self, n):
        """
        One periodic point of T^n per binary word

        Args:
            n: period (>= 1)

        Returns:
            list of TPeriodicPoint (2^n entries)
        """
        bits, x, log_w = self.t_periodic_arrays(n)
        return [
            TPeriodicPoint(word=''.join(str(b) for b in row), x=float(point), log_weight=float(weight))
            for row, point, weight in zip(bits, x, log_w)
        ]

    def _compose_itinerary(self, bits, x):
        """Jet of psi_{w_1} o ... o psi_{w_n} at x, one itinerary per row"""
        coeffs = np.array(Jet.variable(x, 1).coeffs)
        for column in range(bits.shape[1] - 1, -1, -1):
            for branch in (BRANCH_PARABOLIC, BRANCH_EXPANDING):
                mask = bits[:, column] == branch
                if np.any(mask):
                    coeffs[:, mask] = self.maps.psi(branch, Jet(coeffs[:, mask])).coeffs
        return Jet(coeffs)

    def _itinerary_weight(self, bits, x):
        """Sum of v along the orbit of each periodic point"""
        pot = self.induced.potential
        n = bits.shape[1]
        if pot.kind == POTENTIAL_CONST:
            return np.full(bits.shape[0], n * pot.v0)
        if pot.kind == POTENTIAL_MQL:
            slope = self._compose_itinerary(bits, x).coeffs[1]
            return pot.q * np.log(np.abs(slope)) + n * pot.v0
        # orbit points are generated backwards: psi_{w_j} maps T^j x to T^(j-1) x
        points = np.array(x, dtype=float)
        total = np.zeros_like(points)
        for column in range(n - 1, -1, -1):
            image = np.empty_like(points)
            for branch in (BRANCH_PARABOLIC, BRANCH_EXPANDING):
                mask = bits[:, column] == branch
                if np.any(mask):
                    image[mask] = self.maps.psi(branch, points[mask])
                    total[mask] += self.induced.potential_value(branch, image[mask])
            points = image
        return total

    def forward_residual(self, point):
        """Apply T branch-wise along the stored itinerary and return |T^n x - x|"""
        y = point.x
        for symbol in point.word:
            y = float(self.maps.map.branches[int(symbol)](y))
        return abs(y - point.x)

    def records(self, batch) -> List[PeriodicRecord]:
        return [
            PeriodicRecord(
                word=Word(row), x_fix=float(x), deriv_phi=float(d), logW=float(lw), z_exponent=int(row.sum()),
            )
            for row, x, d, lw in zip(batch.words, batch.x_fix, batch.deriv_phi, batch.logW)
        ]

    def _solve_fixed(self, compose, size):
        """
        Safeguarded Newton for x = c(x) with c a contraction given as a jet map

        Newton steps on c(x) - x are kept while they reduce the residual; entries
        whose residual grew fall back to the contraction step x <- c(x).
        """
        x = np.full(size, 0.5)
        last_residual = np.full(size, np.inf)
        use_newton = np.ones(size, dtype=bool)
        for iteration in range(self.maxiter):
            jet = compose(x)
            image, slope = jet.value, jet.coeffs[1]
            residual = np.abs(image - x)
            use_newton &= residual < last_residual
            last_residual = residual
            with np.errstate(divide='ignore', invalid='ignore'):
                newton = x - (image - x) / (slope - 1.0)
            valid = use_newton & np.isfinite(newton) & (newton >= 0.0) & (newton <= 1.0)
            step = np.where(valid, newton, image)
            moved = float(np.max(np.abs(step - x)))
            x = step
            if moved < self.tol:
                return x
        logger.warning(f'Fixed point iteration used its budget of {self.maxiter} steps on {size} entries')
        return x
