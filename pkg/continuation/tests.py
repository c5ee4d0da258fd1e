import math

import numpy as np
from django.test import SimpleTestCase

from induced_map.potentials import PotentialSpec
from induced_map.services import InducedMapService
from interval_maps.exceptions import DomainError, UnsupportedOrderError
from interval_maps.families import farey_map, lsv_map

from .lindelof import (
    ContinuationProblem, cauchy_riemann_residual, fit_rate, interpolant_h, interpolant_terms, lindelof_continue,
)
from .services import ContinuationService

R = math.exp(-1.0)


def _geometric_problem(**kwargs):
    n = np.arange(1, interpolant_terms(-1.0, kwargs.get('eps', 0.1)) + 1)
    return ContinuationProblem(coeffs=np.exp(-n), v0=-1.0, **kwargs)


def _closed_form(z):
    return z * R / (1 - z * R)


def _service(potential):
    return ContinuationService(InducedMapService(farey_map(), potential))


class InterpolantTestCase(SimpleTestCase):

    def setUp(self):
        self.problem = _geometric_problem()

    def test_value_at_an_integer(self):
        self.assertAlmostEqual(interpolant_h(self.problem, 3.0), math.exp(-3), delta=1e-15)
        self.assertAlmostEqual(interpolant_h(self.problem, 3.0 + 1e-10), math.exp(-3), delta=1e-10)

    def test_interpolation_property(self):
        n = np.arange(1, self.problem.N + 1)
        values = interpolant_h(self.problem, n.astype(float))
        self.assertLessEqual(np.max(np.abs(values - self.problem.coeffs)), 1e-10)

    def test_real_on_the_real_axis(self):
        values = interpolant_h(self.problem, np.array([0.3, 2.7, 11.2]))
        np.testing.assert_array_equal(values.imag, 0.0)

    def test_growth_along_the_real_axis(self):
        bound = self.problem.exponential_type + 0.1
        for sigma in (20.5, 40.5):
            growth = math.log(abs(interpolant_h(self.problem, sigma))) / sigma
            self.assertLessEqual(growth, bound)


class LindelofTestCase(SimpleTestCase):

    def setUp(self):
        self.problem = _geometric_problem()

    def test_outside_the_disc(self):
        result = lindelof_continue(self.problem, -4.0)
        self.assertAlmostEqual(result.value, _closed_form(-4.0), delta=1e-6)
        self.assertAlmostEqual(result.value.real, -0.595393, delta=1e-6)

    def test_inside_the_disc(self):
        z = 0.5 + 0.3j
        direct = sum(self.problem.coeffs * z ** np.arange(1, self.problem.N + 1))
        self.assertLessEqual(abs(lindelof_continue(self.problem, z).value - direct), 1e-8)

    def test_excluded_sector(self):
        for z in (4.0, 1.0, 0.0, 3.0 + 1.0j):
            with self.assertRaises(DomainError):
                lindelof_continue(self.problem, z)

    def test_line_position_does_not_matter(self):
        z = -2.0 + 1.5j
        values = [lindelof_continue(_geometric_problem(line_real_part=c), z).value for c in (0.3, 0.5, 0.7)]
        for value in values:
            self.assertLessEqual(abs(value - values[1]), 1e-8)
        self.assertAlmostEqual(values[1], _closed_form(z), delta=1e-8)

    def test_eps_does_not_matter(self):
        values = [lindelof_continue(_geometric_problem(eps=eps), -4.0 - 0.5j).value for eps in (0.05, 0.1, 0.2)]
        self.assertLessEqual(max(abs(v - values[0]) for v in values), 1e-10)

    def test_continued_function_is_analytic(self):
        for z in (-3.0 + 1.0j, -2.5 - 2.0j):
            self.assertLessEqual(cauchy_riemann_residual(self.problem, z), 1e-6)

    def test_problem_validation(self):
        with self.assertRaises(UnsupportedOrderError):
            ContinuationProblem(coeffs=[1.0, 1.0], v0=0.0)
        with self.assertRaises(DomainError):
            ContinuationProblem(coeffs=[1.0], v0=-1.0, eps=1.5)

    def test_general_coefficients_need_an_interpolant(self):
        problem = ContinuationProblem(coeffs=np.exp(-np.arange(1, 50)) / np.arange(1, 50), v0=-1.0)
        with self.assertRaises(UnsupportedOrderError):
            lindelof_continue(problem, -4.0)


class OperatorContinuationTestCase(SimpleTestCase):

    def test_constant_potential_coefficients(self):
        coeffs = _service(PotentialSpec.constant(-1.0)).coefficients_from_operator(np.ones_like, 0.3, N=20)
        np.testing.assert_allclose(coeffs, np.exp(-np.arange(1, 21)), rtol=1e-14)

    def test_shifted_log_derivative_coefficients(self):
        service = _service(PotentialSpec.minus_q_log_derivative(1.0, shift=-1.0))
        coeffs = service.coefficients_from_operator(np.ones_like, 0.5, N=200)
        self.assertAlmostEqual(coeffs[1].real, math.exp(-2) / 2.5 ** 2, delta=1e-15)
        self.assertAlmostEqual(coeffs[1].real, 0.0216536, delta=1e-7)
        self.assertLess(abs(fit_rate(coeffs) + 1.0), 0.02)

    def test_nonnegative_v0_is_unsupported(self):
        with self.assertRaises(UnsupportedOrderError):
            _service(PotentialSpec.minus_q_log_derivative(1.0)).coefficients_from_operator(np.ones_like, 0.5)

    def test_constant_potential_closed_form(self):
        result = _service(PotentialSpec.constant(-1.0)).continue_Qw(np.ones_like, 0.4, -4.0)
        self.assertAlmostEqual(result.value.real, -0.595393, delta=1e-6)

    def test_agreement_on_the_overlap(self):
        service = _service(PotentialSpec.minus_q_log_derivative(1.0, shift=-1.0))
        z = 0.9 * np.exp(3j)
        coeffs = service.coefficients_from_operator(np.cos, 0.5, N=400)
        direct = np.sum(coeffs * z ** np.arange(1, 401))
        continued = service.continue_Qw(np.cos, 0.5, z)
        self.assertLessEqual(abs(continued.value - direct), 1e-7)

    def test_cut_is_excluded(self):
        service = _service(PotentialSpec.constant(-0.5))
        with self.assertRaises(DomainError):
            service.continue_Qw(np.ones_like, 0.5, 1.0)

    def test_path(self):
        service = _service(PotentialSpec.constant(-1.0))
        path = [-4.0, -3.0 + 1.0j, -2.0 - 2.0j]
        values = service.continue_path(np.ones_like, 0.5, path)
        for z, result in zip(path, values):
            self.assertAlmostEqual(result.value, _closed_form(z), delta=1e-8)
            self.assertLess(result.tail_estimate, 1e-10)

    def test_other_families_have_no_closed_form(self):
        service = ContinuationService(InducedMapService(lsv_map(1.0), PotentialSpec.constant(-1.0)))
        with self.assertRaises(UnsupportedOrderError):
            service.operator_interpolant(np.ones_like, 0.5)
