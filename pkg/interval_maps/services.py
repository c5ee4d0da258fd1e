import logging

import numpy as np
from django.conf import settings

from .constants import BRANCH_IDS, BRANCH_PARABOLIC, EXPANSION_GRID_POINTS, FAMILY_CUSTOM
from .exceptions import BoundaryError, DomainError, UnsupportedOrderError
from .jets import Jet, value_of
from .roots import newton_bisection, solve_monotone

logger = logging.getLogger(__name__)


class IntervalMapService:
    """Evaluation, inverse branches and level structure of a parabolic map"""

    def __init__(self, map_spec, tol=None, maxiter=None, jet_order=None):
        self.map = map_spec
        self.tol = tol if tol is not None else settings.DYNZETA_ROOT_TOL
        self.maxiter = maxiter if maxiter is not None else settings.DYNZETA_ROOT_MAXITER
        self.jet_order = jet_order if jet_order is not None else settings.DYNZETA_JET_ORDER
        self._markers = np.array([1.0, map_spec.a])

    # --- forward map ----------------------------------------------------

    def branch_of(self, x):
        return 0 if x <= self.map.a else 1

    def eval_T(self, x, closure=False):
        """
        Evaluate T at x

        Args:
            x: point in (0, 1)
            closure: accept x = a and evaluate it on the closed parabolic branch

        Returns:
            tuple (value, branch)
        """
        if not 0.0 < x < 1.0:
            raise DomainError(f'eval_T needs x in (0,1), got {x}')
        if x == self.map.a and not closure:
            raise DomainError(f'x = {x} is the partition point; T is two-valued there')
        branch = self.branch_of(x)
        return float(self.map.branches[branch](x)), branch

    def branch_jet(self, branch, x, order=None):
        """
        Jet of the branch T_branch at x (closed branch domains accepted)

        Args:
            branch: 0 (parabolic) or 1 (expanding)
            x: point in the closed branch domain, scalar or array
            order: jet order K. The parabolic branch is only C^{1+alpha} at 0, so K <= r =
                floor(1 + alpha) there; the built-in branches are analytic elsewhere. A custom
                map declares smoothness_r for both branches, which bounds K on the whole domain.

        Returns:
            Jet with derivatives (T, T', ..., T^(K)) at x
        """
        self._check_branch(branch)
        order = self.jet_order if order is None else order
        lo, hi = self.map.branch_domain(branch)
        x_arr = np.asarray(x, dtype=float)
        if np.any(x_arr < lo) or np.any(x_arr > hi):
            raise DomainError(f'x outside the closed domain [{lo}, {hi}] of branch {branch}')
        at_parabolic_point = branch == BRANCH_PARABOLIC and np.any(x_arr == 0.0)
        if (at_parabolic_point or self.map.family == FAMILY_CUSTOM) and order > self.map.smoothness_r:
            where = 'at 0' if at_parabolic_point else f'on branch {branch}'
            raise UnsupportedOrderError(
                f'Order {order} exceeds the smoothness r={self.map.smoothness_r} of the {self.map.family} map {where}'
            )
        return self.map.branches[branch](Jet.variable(x_arr, order))

    def derivative(self, branch, x):
        """T_branch' at x as float/array (closed form when the family has one)"""
        closed = self.map.branch_derivatives[branch]
        if closed is not None:
            return closed(x)
        return self.map.branches[branch](Jet.variable(np.asarray(x, dtype=float), 1)).coeffs[1]

    # --- inverse branches ---------------------------------------------

    def inverse_branch(self, branch, y, tol=None):
        """
        psi_branch(y) for a scalar y in [0, 1]

        Args:
            branch: 0 or 1
            y: target value
            tol: residual tolerance |T_branch(x) - y|

        Returns:
            float x in the branch domain
        """
        self._check_branch(branch)
        if not 0.0 <= y <= 1.0:
            raise DomainError(f'inverse_branch needs y in [0,1], got {y}')
        closed = self.map.inverses[branch]
        if closed is not None:
            return float(closed(y))
        lo, hi = self.map.branch_domain(branch)
        return solve_monotone(
            self.map.branches[branch], y, lo, hi,
            tol=self.tol if tol is None else tol,
            maxiter=self.maxiter,
            derivative=lambda t: float(self.derivative(branch, t)),
        )

    def psi(self, branch, y):
        """
        Vectorized psi_branch on floats, arrays or Jets

        Args:
            branch: 0 or 1
            y: float, ndarray or Jet (composition through the jet)

        Returns:
            same kind as y
        """
        closed = self.map.inverses[branch]
        if closed is not None:
            return closed(y)
        values = np.asarray(value_of(y), dtype=float)
        x = self._solve_batch(branch, values)
        if not isinstance(y, Jet):
            return x if values.ndim else float(x)
        forward = self.map.branches[branch](Jet.variable(x, y.order))
        return forward.invert(x).compose(y)

    def _solve_batch(self, branch, values):
        lo, hi = self.map.branch_domain(branch)
        t = self.map.branches[branch]

        def func(points):
            return t(points), self.derivative(branch, points)

        return newton_bisection(func, values, lo, hi, tol=self.tol, maxiter=self.maxiter)

    # --- markers and levels ---------------------------------------------

    def marker_sequence(self, L):
        """
        Markers a_0 = 1, a_1 = a, a_l = psi_0(a_{l-1})

        Args:
            L: last index, L >= 1

        Returns:
            ndarray a_0..a_L (strictly decreasing)
        """
        if L < 1:
            raise DomainError(f'marker_sequence needs L >= 1, got {L}')
        known = len(self._markers) - 1
        if L > known:
            extra = np.empty(L - known)
            current = self._markers[-1]
            for i in range(L - known):
                current = self.inverse_branch(0, current)
                extra[i] = current
            self._markers = np.concatenate([self._markers, extra])
            if not np.all(np.diff(self._markers) < 0) or self._markers[-1] <= 0:
                logger.error(f'Marker sequence lost monotonicity before index {L}')
                raise DomainError('Markers are not strictly decreasing; check the map branches')
        return self._markers[:L + 1].copy()

    def level_index(self, x, markers=None, rel_tol=1e-12, max_depth=None):
        """
        Level l with x in A_l = (a_l, a_{l-1})

        Args:
            x: point in (0, 1)
            markers: optional precomputed a_0..a_L; extended on demand
            rel_tol: relative distance under which x counts as a marker
            max_depth: maximal marker index to compute before giving up

        Returns:
            int l >= 1 (first passage tau(x) = l - 1)
        """
        if not 0.0 < x < 1.0:
            raise DomainError(f'level_index needs x in (0,1), got {x}')
        max_depth = max_depth or settings.DYNZETA_MAX_CUTOFF * 10
        if markers is None:
            markers = self.marker_sequence(max(1, len(self._markers) - 1))
        while markers[-1] >= x:
            depth = 2 * (len(markers) - 1)
            if depth > max_depth:
                raise DomainError(f'x = {x} lies below a_{len(markers) - 1}; insufficient marker depth')
            markers = self.marker_sequence(depth)
        # markers are decreasing: count how many are >= x
        ell = int(np.searchsorted(-markers, -x, side='right'))
        for index in (ell - 1, ell):
            if 0 < index < len(markers) and abs(x - markers[index]) <= rel_tol * markers[index]:
                raise BoundaryError(f'x = {x} is the marker a_{index}', point=x, marker_index=index)
        return ell

    def first_passage(self, x, markers=None):
        return self.level_index(x, markers) - 1

    # --- diagnostics ------------------------------------------------------

    def assumption_report(self, grid_points=EXPANSION_GRID_POINTS):
        """
        Numeric spot checks of the map hypotheses

        Returns:
            dict of named checks with their measured values and a pass flag
        """
        spec = self.map
        t0_jet = self.branch_jet(0, 0.0, order=1)
        report = {
            'fixed_point': {'value': float(t0_jet.value), 'ok': abs(t0_jet.value) <= 1e-15},
            'indifferent': {'value': float(t0_jet.coeffs[1]), 'ok': abs(t0_jet.coeffs[1] - 1.0) <= 1e-12},
        }

        ends = [float(spec.branches[0](spec.a)), float(spec.branches[1](spec.a)), float(spec.branches[1](1.0))]
        full = abs(ends[0] - 1.0) <= 1e-9 and sorted([round(ends[1], 9), round(ends[2], 9)]) == [0.0, 1.0]
        report['full_branches'] = {'value': ends, 'ok': full}

        near = np.linspace(0.0, spec.epsilon, grid_points)[1:-1]
        slopes = self.derivative(0, near)
        report['monotone_derivative'] = {'value': float(np.min(np.diff(slopes))), 'ok': bool(np.all(np.diff(slopes) > 0))}

        left = np.linspace(spec.epsilon, spec.a, grid_points, endpoint=False)
        right = np.linspace(spec.a, spec.expansion_hi, grid_points + 1)[1:]
        minimum = float(min(np.min(np.abs(self.derivative(0, left))), np.min(np.abs(self.derivative(1, right)))))
        report['expansion'] = {'value': minimum, 'ok': minimum >= spec.rho - 1e-9}
        return report

    def describe(self, marker_count=6):
        """Summary used by the map-info subcommand"""
        spec = self.map
        return {
            'family': spec.family,
            'alpha': spec.alpha,
            'a': spec.a,
            'epsilon': spec.epsilon,
            'rho': spec.rho,
            'smoothness_r': spec.smoothness_r,
            'induced_rho': spec.induced_rho,
            'induced_constant': spec.induced_constant,
            'markers': self.marker_sequence(marker_count).tolist(),
        }

    @staticmethod
    def _check_branch(branch):
        if branch not in BRANCH_IDS:
            raise DomainError(f'Branch id must be 0 or 1, got {branch}')
