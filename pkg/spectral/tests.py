import math

import numpy as np
from django.test import SimpleTestCase

from induced_map.potentials import PotentialSpec
from induced_map.services import InducedMapService
from interval_maps.exceptions import DomainError
from interval_maps.families import farey_map
from zeta_traces.services import ZetaService

from .chebyshev import cardinal_matrix, differentiation_matrix, lobatto_nodes
from .services import TAIL_GEOMETRIC, TAIL_INTEGRAL, BumpFunction, SpectralService
from .ulam import ulam_operator, ulam_spectrum

GAUSS_KUZMIN_WIRSING = 0.3036630029


def _spectral(potential=None, **zeta_kwargs):
    induced = InducedMapService(farey_map(), potential)
    return SpectralService(induced, ZetaService(induced, **zeta_kwargs))


def _gauss_density(x):
    return 1.0 / ((1.0 + x) * math.log(2.0))


class ChebyshevTestCase(SimpleTestCase):

    def test_cardinal_functions_reproduce_polynomials(self):
        nodes = lobatto_nodes(9)
        points = np.linspace(0.0, 1.0, 17)
        values = cardinal_matrix(nodes, points) @ (nodes ** 5 - 2 * nodes)
        np.testing.assert_allclose(values, points ** 5 - 2 * points, atol=1e-13)

    def test_differentiation_matrix(self):
        nodes = lobatto_nodes(12)
        slope = differentiation_matrix(nodes) @ np.sin(nodes)
        np.testing.assert_allclose(slope, np.cos(nodes), atol=1e-10)


class CollocationTestCase(SimpleTestCase):

    def test_single_node_is_a_branch_sum(self):
        service = _spectral()
        opr = service.collocation_matrix(0.5, N_nodes=1)
        x = opr.nodes[0]
        expected = math.fsum(0.5 ** n / (n + x) ** 2 for n in range(1, opr.branch_cutoff + 1))
        self.assertEqual(opr.matrix.shape, (1, 1))
        self.assertAlmostEqual(opr.matrix[0, 0], expected, delta=1e-14)

    def test_constant_potential_closed_form(self):
        service = _spectral(PotentialSpec.constant(-1.0))
        opr = service.collocation_matrix(0.5, N_nodes=12)
        self.assertEqual(opr.tail_model, TAIL_GEOMETRIC)
        r = 0.5 / math.e
        np.testing.assert_allclose(opr.apply(np.ones(12)), r / (1 - r), rtol=0, atol=1e-10)

    def test_gauss_density_is_stationary(self):
        service = _spectral()
        opr = service.collocation_matrix(1.0, N_nodes=30)
        self.assertEqual(opr.tail_model, TAIL_INTEGRAL)
        self.assertLessEqual(service.stationary_density_check(opr, _gauss_density), 1e-8)

    def test_rejects_empty_grid(self):
        with self.assertRaises(DomainError):
            _spectral().collocation_matrix(0.5, N_nodes=0)


class SpectrumTestCase(SimpleTestCase):

    @classmethod
    def setUpClass(cls):
        super().setUpClass()
        cls.service = _spectral()
        cls.gauss = cls.service.spectrum(cls.service.collocation_matrix(1.0, N_nodes=30), top_count=3)

    def test_perron_frobenius_eigenvalue(self):
        self.assertAlmostEqual(self.gauss.eigenvalues[0], 1.0, delta=1e-8)
        self.assertLess(self.gauss.stability[0], 1e-8)

    def test_gauss_kuzmin_wirsing_eigenvalue(self):
        self.assertAlmostEqual(self.gauss.eigenvalues[1], -GAUSS_KUZMIN_WIRSING, delta=1e-6)

    def test_doubling_nodes(self):
        finer = self.service.spectrum(self.service.collocation_matrix(1.0, N_nodes=60), top_count=3,
                                      check_stability=False)
        np.testing.assert_allclose(finer.eigenvalues, self.gauss.eigenvalues, rtol=0, atol=1e-6)

    def test_leading_eigenvalue_matches_lambda(self):
        for z in (0.3, 0.7, 1.0):
            values = self.service.top_eigenvalues(z, N_nodes=30, top_count=2)
            leading = values[0]
            self.assertLess(abs(leading.imag), 1e-10)
            self.assertGreater(leading.real, 0.0)
            self.assertLess(abs(values[1]), abs(leading))
            grid = [0.0] if z == 1.0 else None
            estimate = self.service.zeta.lambda_estimate(z, m_max=4, grid=grid).estimate
            self.assertLess(abs(estimate - leading.real) / leading.real, 0.02)

    def test_determinant_zero_is_inverse_eigenvalue(self):
        service = _spectral(max_words=300_000, tail_rel_tol=1e-7)
        leading = service.top_eigenvalues(0.5, N_nodes=30, top_count=1)[0].real
        det = service.zeta.determinant(0.5, 5)
        zero = service.zeta.det_zero(det, 1.0 / leading)
        self.assertTrue(zero.found)
        self.assertLess(abs(zero.u - 1.0 / leading) * leading, 1e-5)

    def test_eigenfunction_of_gauss_operator(self):
        service = _spectral()
        grid, values = service.eigenfunction(service.collocation_matrix(1.0, N_nodes=30))
        expected = _gauss_density(grid) / _gauss_density(0.0)
        np.testing.assert_allclose(values.real, expected, atol=1e-8)
        self.assertLess(np.max(np.abs(values.imag)), 1e-10)

    def test_essential_radius_bound(self):
        service = _spectral()
        lam = service.zeta.lambda_estimate(0.5).estimate
        self.assertAlmostEqual(service.essential_radius_bound(0.5, k=3), lam / 8, delta=1e-12)


class ParabolicEigenfunctionTestCase(SimpleTestCase):

    def setUp(self):
        self.service = _spectral()
        self.grid = (np.arange(400) + 0.5) / 400

    def test_functional_equation(self):
        for lam in (0.5, 0.5j):
            self.assertLessEqual(self.service.functional_equation_residual(lam, self.grid), 1e-8)

    def test_functional_equation_on_disc(self):
        radii = np.repeat([0.3, 0.6, 0.75, 0.9], 4)
        angles = np.tile(np.arange(4) * np.pi / 2 + 0.4, 4)
        for lam in radii * np.exp(1j * angles):
            self.assertLessEqual(self.service.functional_equation_residual(lam, self.grid), 1e-6)

    def test_values_on_first_level_and_origin(self):
        bump = BumpFunction(0.5)
        top = self.grid[self.grid > 0.5]
        np.testing.assert_array_equal(self.service.l0_eigenfunction(0.7, top, bump), bump(top))
        self.assertEqual(self.service.l0_eigenfunction(0.7, [0.0])[0], 0)

    def test_linearity_in_the_bump(self):
        first, second = BumpFunction(0.5), BumpFunction(0.5, scale=-2.5)
        joined = self.service.l0_eigenfunction(0.4 + 0.3j, self.grid, lambda x: first(x) + second(x))
        split = (self.service.l0_eigenfunction(0.4 + 0.3j, self.grid, first)
                 + self.service.l0_eigenfunction(0.4 + 0.3j, self.grid, second))
        self.assertLessEqual(np.max(np.abs(joined - split)), 1e-12)

    def test_bump_is_flat_at_the_ends(self):
        bump = BumpFunction(0.5)
        self.assertAlmostEqual(float(bump(0.75)), 1.0, delta=1e-14)
        for point in (0.5 + 1e-5, 1.0 - 1e-5):
            self.assertLess(float(bump(point)), 1e-10)
        self.assertEqual(float(bump(0.25)), 0.0)

    def test_lambda_outside_the_disc(self):
        with self.assertRaises(DomainError):
            self.service.l0_eigenfunction(1.0, self.grid)


class InducingIdentityTestCase(SimpleTestCase):

    def setUp(self):
        self.service = _spectral(PotentialSpec.constant(-1.0))
        self.grid = np.linspace(0.0, 1.0, 101)

    def test_identity_residual(self):
        residual = self.service.inducing_identity_residual(0.5, lambda x: x * (1 - x), self.grid)
        self.assertLessEqual(residual, 1e-9)

    def test_trivial_cases(self):
        self.assertEqual(self.service.inducing_identity_residual(0.0, lambda x: x * (1 - x), self.grid), 0.0)
        zero = self.service.inducing_identity_residual(0.5, np.zeros_like, self.grid)
        self.assertEqual(zero, 0.0)

    def test_log_derivative_potential(self):
        service = _spectral()
        residual = service.inducing_identity_residual(0.4 + 0.2j, np.cos, self.grid)
        self.assertLessEqual(residual, 1e-9)


class UlamTestCase(SimpleTestCase):

    def test_gauss_invariant_density(self):
        induced = InducedMapService(farey_map())
        matrix = ulam_operator(induced, resolution_bits=10)
        np.testing.assert_allclose(np.asarray(matrix.sum(axis=1)).ravel(), 1.0, atol=1e-12)
        result = ulam_spectrum(matrix)
        self.assertAlmostEqual(result.eigenvalues[0], 1.0, delta=1e-8)
        l1_error = np.mean(np.abs(result.density - _gauss_density(result.cells)))
        self.assertLessEqual(l1_error, 2e-2)

    def test_resolution_limits(self):
        with self.assertRaises(DomainError):
            ulam_operator(InducedMapService(farey_map()), resolution_bits=1)
