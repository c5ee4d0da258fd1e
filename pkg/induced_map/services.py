import logging
import math
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np
from django.conf import settings

from interval_maps.constants import BRANCH_EXPANDING, BRANCH_PARABOLIC
from interval_maps.exceptions import DomainError, UnsupportedOrderError
from interval_maps.jets import Jet, value_of
from interval_maps.services import IntervalMapService

from .constants import (
    H7_FIT_TERMS, H7_GEOMETRIC_RATIO, H7_GRID_POINTS, H7_MIN_EXPONENT,
    POTENTIAL_CONST, POTENTIAL_CUSTOM, POTENTIAL_MQL,
)
from .potentials import PotentialSpec

logger = logging.getLogger(__name__)


class Word(tuple):
    """Multi-index beta = (beta_1, ..., beta_m) addressing phi_beta"""

    def __new__(cls, entries):
        entries = tuple(int(e) for e in entries)
        if not entries or min(entries) < 1:
            raise DomainError(f'Words need at least one entry and entries >= 1, got {entries}')
        return super().__new__(cls, entries)

    @property
    def m(self):
        return len(self)

    @property
    def total(self):
        return sum(self)


@dataclass
class H7Estimate:
    """Empirical evidence that the branch weights are summable in C^k"""
    c_k_estimate: float
    tail_ratio: float
    tail_exponent: float
    terms: List[float] = field(default_factory=list)
    summable: bool = True
    warning: Optional[str] = None


def chebyshev_grid(points):
    """Chebyshev-Lobatto points mapped to [0, 1], ascending"""
    if points == 1:
        return np.array([0.5])
    return 0.5 * (1.0 - np.cos(np.pi * np.arange(points) / (points - 1)))


def _derivative_jet(jet):
    """Jet of f' from a jet of f (loses one order)"""
    scale = np.arange(1, jet.order + 1, dtype=float).reshape((-1,) + (1,) * len(jet.shape))
    return Jet(jet.coeffs[1:] * scale)


class InducedMapService:
    """Jump transformation G, inverse branches phi_l and induced weights"""

    def __init__(self, map_spec, potential=None, jet_order=None, map_service=None):
        self.map = map_spec
        self.potential = potential or PotentialSpec.minus_q_log_derivative(1.0)
        self.maps = map_service or IntervalMapService(map_spec)
        self.jet_order = jet_order if jet_order is not None else settings.DYNZETA_JET_ORDER

    def with_potential(self, potential):
        """Same map (and cached markers), different potential"""
        return InducedMapService(self.map, potential, jet_order=self.jet_order, map_service=self.maps)

    # --- inverse branches of G ------------------------------------------

    def phi_branch(self, ell, x, order=None):
        """
        Jet of phi_l = psi_0^(l-1) o psi_1 at x, by composing branch jets

        Args:
            ell: branch index l >= 1
            x: point (float, array or Jet) in [0, 1]
            order: jet order when x is not already a Jet

        Returns:
            Jet of phi_l at x; its value lies in A_l
        """
        if ell < 1:
            raise DomainError(f'Induced branches are indexed from 1, got {ell}')
        y = self._as_jet(x, order)
        y = self.maps.psi(BRANCH_EXPANDING, y)
        for _ in range(int(ell) - 1):
            y = self.maps.psi(BRANCH_PARABOLIC, y)
        return y

    def phi(self, ell, x, order=None):
        """
        Jet of phi_l at x for scalar or array l, using the family closed form when available

        Args:
            ell: int or integer array broadcast against x
            x: float, array or Jet
            order: jet order when x is not already a Jet

        Returns:
            Jet with the broadcast batch shape
        """
        ell = np.asarray(ell)
        if np.any(ell < 1):
            raise DomainError('Induced branches are indexed from 1')
        inner = self._as_jet(x, order)
        if self.map.induced_branch is not None:
            return self.map.induced_branch(ell.astype(float), inner)
        if ell.ndim == 0:
            return self.phi_branch(int(ell), inner)
        return self._phi_batch(ell, inner)

    def _phi_batch(self, ell, inner):
        shape = np.broadcast_shapes(ell.shape, inner.shape)
        size = inner.order + 1
        ell = np.broadcast_to(ell, shape).ravel()
        coeffs = np.broadcast_to(inner.coeffs, (size,) + shape).reshape(size, -1)
        coeffs = np.array(self.maps.psi(BRANCH_EXPANDING, Jet(coeffs)).coeffs)
        for step in range(1, int(ell.max(initial=1))):
            active = ell > step
            coeffs[:, active] = self.maps.psi(BRANCH_PARABOLIC, Jet(coeffs[:, active])).coeffs
        return Jet(coeffs.reshape((size,) + shape))

    def phi_orbit(self, x, n_max, order=None):
        """Yield (n, Jet of phi_n at x) for n = 1..n_max by successive psi_0 steps"""
        y = self.maps.psi(BRANCH_EXPANDING, self._as_jet(x, order))
        yield 1, y
        for n in range(2, n_max + 1):
            y = self.maps.psi(BRANCH_PARABOLIC, y)
            yield n, y

    def _as_jet(self, x, order):
        if isinstance(x, Jet):
            return x
        order = self.jet_order if order is None else order
        return Jet.variable(np.asarray(x, dtype=float), order)

    def G_eval(self, x):
        """
        Jump transformation G(x) = T^(1 + tau(x))(x)

        Args:
            x: point in (0, 1) that is not a marker

        Returns:
            float G(x)
        """
        ell = self.maps.level_index(x)
        value = x
        for _ in range(ell - 1):
            value = self.map.branches[BRANCH_PARABOLIC](value)
        return float(self.map.branches[BRANCH_EXPANDING](value))

    # --- potentials and weights -----------------------------------------

    def potential_value(self, branch, x):
        """v on the given branch (closed branch domains accepted)"""
        pot = self.potential
        if pot.kind == POTENTIAL_MQL:
            return -pot.q * np.log(np.abs(self.maps.derivative(branch, x))) + pot.v0
        if pot.kind == POTENTIAL_CONST:
            return pot.v0 + 0.0 * np.asarray(x, dtype=float)
        return pot.func(branch, x)

    def induced_weight(self, ell, x):
        """
        w(phi_l(x)) as the sum of v along the backward orbit psi_0^i(psi_1(x))

        Args:
            ell: branch index l >= 1
            x: float or array in [0, 1]

        Returns:
            float (or array) w(phi_l(x))
        """
        if ell < 1:
            raise DomainError(f'Induced branches are indexed from 1, got {ell}')
        point = self.maps.psi(BRANCH_EXPANDING, x)
        terms = [self.potential_value(BRANCH_EXPANDING, point)]
        for _ in range(int(ell) - 1):
            point = self.maps.psi(BRANCH_PARABOLIC, point)
            terms.append(self.potential_value(BRANCH_PARABOLIC, point))
        if np.ndim(x) == 0:
            return math.fsum(float(t) for t in terms)
        stacked = np.stack([np.asarray(t, dtype=float) for t in terms])
        return np.array([math.fsum(column) for column in stacked.reshape(len(terms), -1).T]).reshape(np.shape(x))

    def log_weight(self, ell, x):
        """w(phi_l(x)), through the cocycle identity when the potential allows it"""
        pot = self.potential
        if pot.kind == POTENTIAL_CONST:
            return ell * pot.v0 + 0.0 * np.asarray(x, dtype=float)
        if pot.kind == POTENTIAL_MQL:
            step = self.phi(ell, x, order=1)
            return self._step_weight(ell, step, x)
        return self.induced_weight(ell, x)

    def _step_weight(self, ell, step, point):
        """w(phi_l(point)) given the jet of phi_l at point"""
        pot = self.potential
        if pot.kind == POTENTIAL_MQL:
            return pot.q * np.log(np.abs(step.coeffs[1])) + np.asarray(ell) * pot.v0
        if pot.kind == POTENTIAL_CONST:
            return np.asarray(ell) * pot.v0 + 0.0 * np.asarray(point, dtype=float)
        ell_arr, points = np.broadcast_arrays(np.asarray(ell), np.asarray(point, dtype=float))
        if ell_arr.ndim == 0:
            return self.induced_weight(int(ell_arr), float(points))
        flat = [self.induced_weight(int(l), float(p)) for l, p in zip(ell_arr.ravel(), points.ravel())]
        return np.array(flat).reshape(ell_arr.shape)

    def word_weight(self, word, x, order=None):
        """
        Composed branch phi_beta and its weight W_beta at x

        Args:
            word: sequence (beta_1, ..., beta_m)
            x: point in [0, 1]
            order: jet order (at least 1)

        Returns:
            tuple (Jet of phi_beta at x, log W_beta(x))
        """
        word = Word(word)
        order = max(1, self.jet_order if order is None else order)
        y = Jet.variable(np.asarray(x, dtype=float), order)
        terms = []
        for ell in reversed(word):
            point = value_of(y)
            step = self.phi(ell, point, order)
            terms.append(float(self._step_weight(ell, step, point)))
            y = step.compose(y)
        return y, math.fsum(terms)

    def word_batch(self, words, x, order=1):
        """
        Vectorized word_weight over rows of an (n, m) integer array

        Args:
            words: integer array, one word per row
            x: points, one per row
            order: jet order

        Returns:
            tuple (Jet of phi_beta at x batched over rows, array of log W_beta(x))
        """
        words = np.atleast_2d(np.asarray(words))
        y = Jet.variable(np.asarray(x, dtype=float), max(1, order))
        log_w = np.zeros(words.shape[0])
        for column in range(words.shape[1] - 1, -1, -1):
            ell = words[:, column]
            point = y.value
            step = self.phi(ell, point, y.order)
            log_w = log_w + self._step_weight(ell, step, point)
            y = step.compose(y)
        return y, log_w

    def geometric_potential(self):
        """
        The potential v - log|T'|, whose induced potential is w - log|G'|

        Returns:
            PotentialSpec
        """
        pot = self.potential
        if pot.kind == POTENTIAL_MQL:
            return PotentialSpec.minus_q_log_derivative(pot.q + 1.0, shift=pot.v0, smoothness_k=pot.smoothness_k)
        if pot.kind == POTENTIAL_CONST:
            return PotentialSpec.minus_q_log_derivative(1.0, shift=pot.v0, smoothness_k=pot.smoothness_k)

        derivative = self.maps.derivative

        def shifted(branch, x):
            return pot.func(branch, x) - np.log(np.abs(derivative(branch, x)))

        return PotentialSpec(
            kind=POTENTIAL_CUSTOM, v0=pot.v0, smoothness_k=pot.smoothness_k,
            func=shifted, params=dict(pot.params, geometric=True),
        )

    # --- branch summability ---------------------------------------------

    def h7_estimate(self, k, N, grid_points=H7_GRID_POINTS):
        """
        Partial sums of sum_n ||e^{w o phi_n}||_h (1 + ||phi_n||_h^h), maximized over h <= k

        Args:
            k: smoothness order, below the map smoothness r
            N: number of branches summed (N >= 10)
            grid_points: Chebyshev grid used for the sup norms

        Returns:
            H7Estimate with the partial sum, the fitted ratio and power-law exponent of
            the last terms, and a warning when the tail does not look summable
        """
        if N < 10:
            raise DomainError(f'h7_estimate needs N >= 10, got {N}')
        if k >= self.map.smoothness_r:
            raise UnsupportedOrderError(f'k={k} must stay below the map smoothness r={self.map.smoothness_r}')
        if self.potential.kind == POTENTIAL_CUSTOM and k > 0:
            raise UnsupportedOrderError('Custom potentials support the k=0 estimate only')

        grid = chebyshev_grid(grid_points)
        terms = np.zeros((k + 1, N))
        for n, jet in self.phi_orbit(grid, N, order=k + 1):
            phi_sup = np.max(np.abs(jet.derivatives[:k + 1]), axis=1)
            weight_sup = np.max(np.abs(self._exp_weight_jet(n, jet, grid, k).derivatives), axis=1)
            for h in range(k + 1):
                terms[h, n - 1] = np.max(weight_sup[:h + 1]) * (1.0 + np.max(phi_sup[:h + 1]) ** h)

        sums = terms.sum(axis=1)
        dominant = int(np.argmax(sums))
        tail = terms[dominant, -H7_FIT_TERMS:]
        n_tail = np.arange(N - len(tail) + 1, N + 1, dtype=float)
        log_tail = np.log(tail)
        ratio = float(np.exp(np.polyfit(n_tail, log_tail, 1)[0]))
        exponent = float(-np.polyfit(np.log(n_tail), log_tail, 1)[0])

        summable = ratio <= H7_GEOMETRIC_RATIO or exponent >= H7_MIN_EXPONENT
        warning = None
        if not summable:
            warning = f'Branch weight tail not summable: ratio {ratio:.4f}, power-law exponent {exponent:.3f}'
            logger.warning(warning)
        logger.debug(f'h7_estimate k={k} N={N}: c_k={sums[dominant]:.6g}, ratio={ratio:.4f}, exponent={exponent:.3f}')
        return H7Estimate(
            c_k_estimate=float(sums[dominant]),
            tail_ratio=ratio,
            tail_exponent=exponent,
            terms=terms[dominant].tolist(),
            summable=summable,
            warning=warning,
        )

    def _exp_weight_jet(self, n, phi_jet, grid, k):
        """Jet of order k of e^{w o phi_n} from a jet of phi_n of order k+1"""
        pot = self.potential
        scale = math.exp(n * pot.v0)
        if pot.kind == POTENTIAL_MQL:
            slope = _derivative_jet(phi_jet)
            slope = slope * np.sign(slope.value)
            return slope.power(pot.q) * scale
        if pot.kind == POTENTIAL_CONST:
            return Jet.constant(np.full(grid.shape, scale), k)
        return Jet.constant(np.exp(self.induced_weight(n, grid)), k)
