import logging
import math
from dataclasses import dataclass, field
from typing import Callable, List, Optional

import numpy as np
from django.conf import settings
from scipy import linalg
from scipy.special import roots_jacobi

from induced_map.constants import POTENTIAL_CONST, POTENTIAL_MQL
from interval_maps.constants import BRANCH_EXPANDING, BRANCH_PARABOLIC
from interval_maps.exceptions import BoundaryError, ConvergenceError, DomainError

from .chebyshev import cardinal_matrix, differentiation_matrix, lobatto_nodes

logger = logging.getLogger(__name__)

TAIL_NONE = 'none'
TAIL_GEOMETRIC = 'geometric'
TAIL_INTEGRAL = 'euler-maclaurin'

STABILITY_EXTRA_NODES = 6
EIGENFUNCTION_GRID = 201


@dataclass
class CollocationOperator:
    """Matrix of f -> Q_w(z) f on Chebyshev nodes through polynomial interpolation"""
    nodes: np.ndarray
    matrix: np.ndarray
    z: complex
    branch_cutoff: int
    tail_model: str = TAIL_NONE

    @property
    def size(self):
        return len(self.nodes)

    def apply(self, values):
        return self.matrix @ np.asarray(values)

    def power_trace(self, m):
        """Trace of the m-th matrix power, the sum of the m-th powers of the eigenvalues"""
        return complex(np.trace(np.linalg.matrix_power(self.matrix, m)))


@dataclass
class SpectrumResult:
    eigenvalues: np.ndarray
    stability: Optional[np.ndarray] = None
    nodes: int = 0
    vectors: Optional[np.ndarray] = field(default=None, repr=False)


@dataclass(frozen=True)
class BumpFunction:
    """h(x) = scale ((x - a)(1 - x))^3 / ((1 - a)/2)^6 on [a, 1], zero elsewhere"""
    a: float
    scale: float = 1.0

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        inside = (x > self.a) & (x < 1.0)
        peak = ((1.0 - self.a) / 2.0) ** 6
        values = np.where(inside, ((x - self.a) * (1.0 - x)) ** 3, 0.0)
        return self.scale * values / peak

    @property
    def support(self):
        return (self.a, 1.0)


class SpectralService:
    """Collocation spectra of Q_w(z), eigenfunctions of L_0 and the inducing identity"""

    def __init__(self, induced, zeta=None):
        self.induced = induced
        self.maps = induced.maps
        self.map = induced.map
        self.potential = induced.potential
        self._zeta = zeta

    @property
    def zeta(self):
        if self._zeta is None:
            from zeta_traces.services import ZetaService
            self._zeta = ZetaService(self.induced)
        return self._zeta

    # --- collocation ------------------------------------------------------

    def _branch_terms(self, z, x, branch_cutoff):
        """phi_n(x) and z^n e^{w(phi_n(x))} for n = 1..cutoff, shape (cutoff, len(x))"""
        count = len(x)
        ell = np.repeat(np.arange(1, branch_cutoff + 1), count)
        points = np.tile(x, branch_cutoff)
        images = np.asarray(self.induced.phi(ell, points, order=1).value, dtype=float)
        log_w = np.asarray(self.induced.log_weight(ell, points), dtype=float)
        with np.errstate(under='ignore', over='ignore'):
            factors = np.power(complex(z), ell) * np.exp(log_w)
        return images.reshape(branch_cutoff, count), factors.reshape(branch_cutoff, count)

    def integral_tail_applies(self, z):
        """True when the branches past the cutoff are summed by the Euler-Maclaurin integral"""
        pot = self.potential
        return (self.map.is_mobius_gauss and pot.kind == POTENTIAL_MQL
                and abs(z * math.exp(pot.v0) - 1.0) < 1e-14)

    def _integral_tail(self, nodes, branch_cutoff, quad_points):
        """
        Sum over n > cutoff of (n + x)^{-2q} f(1/(n + x)) for the Farey family on z e^{shift} = 1

        The shell sum is replaced by the integral from cutoff + 1/2 (a weighted
        integral of f on [0, Y]) plus the first Euler-Maclaurin midpoint correction.
        """
        q = self.potential.q
        beta = 2.0 * q - 2.0
        if beta <= -1.0:
            raise DomainError(f'Branch sums with q={q} are not summable at z e^(shift) = 1')
        t, weights = roots_jacobi(quad_points, 0.0, beta)
        D = differentiation_matrix(nodes) if len(nodes) > 1 else np.zeros((1, 1))
        rows = []
        for x in nodes:
            s = branch_cutoff + 0.5 + x
            Y = 1.0 / s
            y = 0.5 * Y * (1.0 + t)
            integral = (0.5 * Y) ** (beta + 1.0) * (weights @ cardinal_matrix(nodes, y))
            at_Y = cardinal_matrix(nodes, [Y])[0]
            slope = at_Y @ D
            derivative = -2.0 * q * s ** (-2.0 * q - 1.0) * at_Y - s ** (-2.0 * q - 2.0) * slope
            rows.append(integral + derivative / 24.0)
        return np.array(rows)

    def collocation_matrix(self, z, N_nodes=None, branch_cutoff=None, quad_points=None, branch_tail=True):
        """
        Collocation matrix of Q_w(z) on Chebyshev-Lobatto nodes

        Args:
            z: complex series variable
            N_nodes: number of nodes (default DYNZETA_CHEB_NODES)
            branch_cutoff: branches summed exactly (default DYNZETA_BRANCH_CUTOFF)
            quad_points: quadrature nodes of the tail integral
            branch_tail: False keeps only the branches 1..branch_cutoff

        Returns:
            CollocationOperator
        """
        N_nodes = N_nodes or settings.DYNZETA_CHEB_NODES
        branch_cutoff = branch_cutoff or settings.DYNZETA_BRANCH_CUTOFF
        if N_nodes < 1:
            raise DomainError(f'N_nodes must be positive, got {N_nodes}')
        nodes = lobatto_nodes(N_nodes)
        images, factors = self._branch_terms(z, nodes, branch_cutoff)
        cardinals = cardinal_matrix(nodes, images.ravel()).reshape(branch_cutoff, N_nodes, N_nodes)
        matrix = np.einsum('ni,nij->ij', factors, cardinals)

        tail_model = TAIL_NONE
        pot = self.potential
        ratio = z * math.exp(pot.v0)
        if branch_tail and self.integral_tail_applies(z):
            quad_points = max(quad_points or settings.DYNZETA_TAIL_QUAD_POINTS, N_nodes // 2 + 1)
            matrix = matrix + self._integral_tail(nodes, branch_cutoff, quad_points)
            tail_model = TAIL_INTEGRAL
        elif branch_tail and pot.kind == POTENTIAL_CONST and abs(ratio) < 1.0:
            # f(phi_n(x)) -> f(0) for n past the cutoff
            matrix[:, 0] += ratio ** (branch_cutoff + 1) / (1.0 - ratio)
            tail_model = TAIL_GEOMETRIC
        elif branch_tail and abs(ratio) >= 1.0:
            logger.warning(f'z={z}: branch sum truncated at {branch_cutoff} without a tail model')

        logger.debug(f'collocation_matrix: N={N_nodes}, cutoff={branch_cutoff}, tail={tail_model}')
        return CollocationOperator(nodes=nodes, matrix=matrix, z=z, branch_cutoff=branch_cutoff,
                                   tail_model=tail_model)

    def spectrum(self, opr, top_count=6, check_stability=True):
        """
        Eigenvalues of the collocation matrix by decreasing modulus

        Args:
            opr: CollocationOperator
            top_count: number of eigenvalues returned
            check_stability: compare with a run on N + 6 nodes

        Returns:
            SpectrumResult; stability[i] is the distance to the nearest eigenvalue of the larger run
        """
        if not np.all(np.isfinite(opr.matrix)):
            raise DomainError('Collocation matrix has non-finite entries')
        try:
            values, vectors = linalg.eig(opr.matrix)
        except linalg.LinAlgError as exc:
            logger.error(f'Dense eigensolver failed on a {opr.size}x{opr.size} matrix: {exc}')
            raise ConvergenceError(f'Eigen-decomposition failed: {exc}')
        order = np.argsort(-np.abs(values))[:top_count]
        values, vectors = values[order], vectors[:, order]

        stability = None
        if check_stability:
            larger = self.collocation_matrix(opr.z, opr.size + STABILITY_EXTRA_NODES, opr.branch_cutoff)
            reference = linalg.eigvals(larger.matrix)
            stability = np.array([float(np.min(np.abs(reference - value))) for value in values])
            logger.info(f'Spectrum at z={opr.z}: leading {values[0]:.12g}, stability {stability[0]:.1e}')
        return SpectrumResult(eigenvalues=values, stability=stability, nodes=opr.size, vectors=vectors)

    def eigenfunction(self, opr, index=0, grid=None):
        """
        Eigenfunction of the collocation operator sampled on a grid

        Returns:
            tuple (grid, complex values) normalized so the largest value is 1
        """
        result = self.spectrum(opr, top_count=index + 1, check_stability=False)
        grid = np.linspace(0.0, 1.0, EIGENFUNCTION_GRID) if grid is None else np.asarray(grid, dtype=float)
        values = cardinal_matrix(opr.nodes, grid) @ result.vectors[:, index]
        peak = values[np.argmax(np.abs(values))]
        return grid, values / peak

    def essential_radius_bound(self, z, k=None, m_max=3):
        """rho_G^-k Lambda(z), the bound on the essential spectral radius of Q_w(z) on C^k"""
        k = k or self.potential.smoothness_k
        lam = self.zeta.lambda_estimate(z, m_max=m_max).estimate
        return self.map.induced_rho ** (-k) * lam

    # --- the parabolic branch -------------------------------------------

    def l0_eigenfunction(self, lam, points, bump=None, L_terms=None):
        """
        F_lambda(x) = lambda^(l-1) h(T^(l-1) x) on the level A_l containing x

        Args:
            lam: complex with |lam| < 1
            points: sample points in [0, 1]
            bump: callable h supported in [a, 1] (default BumpFunction(a))
            L_terms: deepest level evaluated; deeper points get 0

        Returns:
            complex array of F_lambda(points)
        """
        if abs(lam) >= 1.0:
            raise DomainError(f'F_lambda needs |lambda| < 1, got {lam}')
        if self.map.alpha < 1.0:
            logger.warning(f'alpha={self.map.alpha} < 1: the L_0 eigenfunction check is exploratory')
        bump = bump or BumpFunction(self.map.a)
        L_terms = L_terms or settings.DYNZETA_MAX_CUTOFF
        parabolic = self.map.branches[BRANCH_PARABOLIC]

        values = np.zeros(np.size(points), dtype=complex)
        for i, x in enumerate(np.atleast_1d(np.asarray(points, dtype=float))):
            if not 0.0 < x < 1.0:
                continue
            try:
                level = self.maps.level_index(float(x))
            except BoundaryError:
                # markers are mapped onto a or 1, where h vanishes
                continue
            if level > L_terms:
                continue
            y = x
            for _ in range(level - 1):
                y = parabolic(y)
            values[i] = lam ** (level - 1) * complex(bump(y))
        return values

    def functional_equation_residual(self, lam, grid, bump=None):
        """sup over the grid of |F_lambda(psi_0(x)) - lambda F_lambda(x)|"""
        grid = np.asarray(grid, dtype=float)
        shifted = np.asarray(self.maps.psi(BRANCH_PARABOLIC, grid), dtype=float)
        left = self.l0_eigenfunction(lam, shifted, bump)
        right = lam * self.l0_eigenfunction(lam, grid, bump)
        return float(np.max(np.abs(left - right)))

    # --- operator identity ------------------------------------------------

    def _L0(self, f, z, y):
        point = np.asarray(self.maps.psi(BRANCH_PARABOLIC, y), dtype=float)
        return z * np.exp(self.induced.potential_value(BRANCH_PARABOLIC, point)) * f(point)

    def inducing_identity_residual(self, z, f, grid, cutoff_N=None):
        """
        max over the grid of |(1 - Q_w(z))(1 - z L_0)f - (1 - z L_v)f|

        Args:
            z: complex, |z| < 1
            f: vectorized callable on [0, 1]
            grid: evaluation points
            cutoff_N: branches summed in Q_w(z)

        Returns:
            float residual
        """
        grid = np.asarray(grid, dtype=float)
        if z == 0:
            return 0.0
        cutoff_N = cutoff_N or settings.DYNZETA_BRANCH_CUTOFF

        def g(y):
            return f(y) - self._L0(f, z, y)

        images, factors = self._branch_terms(z, grid, cutoff_N)
        Qg = np.sum(factors * g(images.ravel()).reshape(images.shape), axis=0)
        left = g(grid) - Qg

        expanding = np.asarray(self.maps.psi(BRANCH_EXPANDING, grid), dtype=float)
        Lv = self._L0(f, z, grid) + z * np.exp(self.induced.potential_value(BRANCH_EXPANDING, expanding)) * f(expanding)
        right = f(grid) - Lv
        residual = float(np.max(np.abs(left - right)))
        logger.debug(f'inducing identity residual at z={z}: {residual:.2e}')
        return residual

    def stationary_density_check(self, opr, density: Callable):
        """max |Q f - f| at the nodes for a candidate invariant density f"""
        values = density(opr.nodes)
        return float(np.max(np.abs(opr.apply(values) - values)))

    def top_eigenvalues(self, z, N_nodes=None, top_count=3) -> List[complex]:
        return list(self.spectrum(self.collocation_matrix(z, N_nodes), top_count, check_stability=False).eigenvalues)
