import math

import numpy as np
from django.test import SimpleTestCase

from .exceptions import BoundaryError, DomainError, UnsupportedOrderError
from .families import farey_map, lsv_map, map_from_config, pm_map
from .jets import Jet
from .services import IntervalMapService


def farey_like_factory():
    """Branch pair used to exercise custom map loading"""
    return {
        'branches': (lambda x: x / (1 - x), lambda x: (1 - x) / x),
        'inverses': (lambda y: y / (1 + y), lambda y: 1 / (1 + y)),
    }


def _all_maps():
    return [farey_map(), lsv_map(0.5), lsv_map(1.0), pm_map(0.5), pm_map(1.0)]


class JetArithmeticTestCase(SimpleTestCase):
    """Leibniz / Faa di Bruno rules on truncated Taylor data"""

    def test_product_and_reciprocal(self):
        x = Jet.variable(0.3, 3)
        np.testing.assert_allclose((x * x).derivatives, [0.09, 0.6, 2.0, 0.0], atol=1e-15)
        inv = (1 + x).reciprocal()
        expected = [1 / 1.3, -1 / 1.3 ** 2, 2 / 1.3 ** 3, -6 / 1.3 ** 4]
        np.testing.assert_allclose(inv.derivatives, expected, rtol=1e-14)

    def test_exp_log_round_trip(self):
        x = Jet.variable(0.7, 4)
        np.testing.assert_allclose(x.exp().log().coeffs, x.coeffs, atol=1e-14)
        np.testing.assert_allclose(x.exp().derivatives, [math.exp(0.7)] * 5, rtol=1e-14)

    def test_fractional_power(self):
        p = Jet.variable(0.3, 3) ** 1.5
        expected = [0.3 ** 1.5, 1.5 * 0.3 ** 0.5, 0.75 * 0.3 ** -0.5, -0.375 * 0.3 ** -1.5]
        np.testing.assert_allclose(p.derivatives, expected, rtol=1e-13)

    def test_power_at_zero_respects_smoothness(self):
        np.testing.assert_allclose((Jet.variable(0.0, 1) ** 1.5).coeffs, [0.0, 0.0])
        with self.assertRaises(UnsupportedOrderError):
            Jet.variable(0.0, 2) ** 1.5

    def test_composition_chain_rule(self):
        x = Jet.variable(0.3, 3)
        inner = x * x
        outer = Jet.variable(0.09, 3).exp()
        composed = outer.compose(inner)
        e = math.exp(0.09)
        np.testing.assert_allclose(
            composed.derivatives[:3], [e, 0.6 * e, (2 + 4 * 0.09) * e], rtol=1e-13
        )

    def test_series_reversion_gives_inverse_function(self):
        forward = Jet.variable(0.3, 3).exp()
        y = math.exp(0.3)
        inverse = forward.invert(0.3)
        np.testing.assert_allclose(inverse.derivatives, [0.3, 1 / y, -1 / y ** 2, 2 / y ** 3], rtol=1e-13)

    def test_batched_jets_broadcast(self):
        x = Jet.variable(np.array([0.1, 0.2, 0.4]), 2)
        ell = np.array([1.0, 2.0, 3.0])
        g = 1 / (ell + x)
        np.testing.assert_allclose(g.derivative(1), -1 / (ell + x.value) ** 2, rtol=1e-14)


class IntervalMapTestCase(SimpleTestCase):
    """Evaluation, inverse branches, markers and levels"""

    def setUp(self):
        self.farey = IntervalMapService(farey_map())

    def test_eval_farey_and_lsv(self):
        value, branch = self.farey.eval_T(0.25)
        self.assertAlmostEqual(value, 1 / 3, delta=1e-15)
        self.assertEqual(branch, 0)
        value, branch = IntervalMapService(lsv_map(1.0)).eval_T(0.25)
        self.assertAlmostEqual(value, 0.375, delta=1e-15)
        self.assertEqual(branch, 0)

    def test_eval_partition_point(self):
        with self.assertRaises(DomainError):
            self.farey.eval_T(0.5)
        self.assertEqual(self.farey.eval_T(0.5, closure=True), (1.0, 0))
        for bad in (0.0, 1.0, -0.2, 1.5):
            with self.assertRaises(DomainError):
                self.farey.eval_T(bad)

    def test_branch_jets_closed_form(self):
        jet = self.farey.branch_jet(0, 0.0, order=2)
        np.testing.assert_allclose(jet.derivatives, [0.0, 1.0, 2.0], atol=1e-15)
        jet = self.farey.branch_jet(1, 1.0, order=1)
        np.testing.assert_allclose(jet.derivatives, [0.0, -1.0], atol=1e-15)

    def test_branch_jet_order_limited_at_parabolic_point(self):
        service = IntervalMapService(lsv_map(0.5))
        self.assertAlmostEqual(float(service.branch_jet(0, 0.0, order=1).coeffs[1]), 1.0, delta=1e-15)
        with self.assertRaises(UnsupportedOrderError):
            service.branch_jet(0, 0.0, order=3)

    def test_jets_match_finite_differences(self):
        for spec in _all_maps():
            service = IntervalMapService(spec)
            for branch in (0, 1):
                lo, hi = spec.branch_domain(branch)
                grid = np.linspace(lo + 0.05, hi - 0.05, 50)
                jet = service.branch_jet(branch, grid, order=2)
                f = spec.branches[branch]
                h1, h2 = 1e-5, 1e-4
                d1 = (f(grid + h1) - f(grid - h1)) / (2 * h1)
                d2 = (f(grid + h2) - 2 * f(grid) + f(grid - h2)) / h2 ** 2
                np.testing.assert_allclose(jet.derivative(1), d1, rtol=1e-6)
                np.testing.assert_allclose(jet.derivative(2), d2, rtol=1e-6, atol=1e-6)

    def test_closed_form_inverses(self):
        self.assertAlmostEqual(self.farey.inverse_branch(0, 0.5), 1 / 3, delta=1e-15)
        self.assertAlmostEqual(self.farey.inverse_branch(1, 0.5), 2 / 3, delta=1e-15)

    def test_root_found_inverse_residual(self):
        service = IntervalMapService(lsv_map(0.5))
        x = service.inverse_branch(0, 0.9, tol=1e-14)
        self.assertLessEqual(abs(lsv_map(0.5).branches[0](x) - 0.9), 1e-14)

    def test_round_trip_all_families(self):
        ys = np.linspace(0.01, 0.99, 25)
        for spec in _all_maps():
            service = IntervalMapService(spec)
            for branch in (0, 1):
                scalar = np.array([service.inverse_branch(branch, y) for y in ys])
                batch = service.psi(branch, ys)
                np.testing.assert_allclose(spec.branches[branch](scalar), ys, atol=1e-12)
                np.testing.assert_allclose(spec.branches[branch](batch), ys, atol=1e-12)

    def test_inverse_jets_from_reversion(self):
        spec = pm_map(1.0)
        service = IntervalMapService(spec)
        y = np.array([0.2, 0.5, 0.8])
        jet = service.psi(0, Jet.variable(y, 2))
        x = jet.value
        t1 = service.derivative(0, x)
        t2 = (1 + spec.alpha) * spec.alpha * x ** (spec.alpha - 1)
        np.testing.assert_allclose(jet.derivative(1), 1 / t1, rtol=1e-12)
        np.testing.assert_allclose(jet.derivative(2), -t2 / t1 ** 3, rtol=1e-10)

    def test_farey_markers(self):
        np.testing.assert_allclose(self.farey.marker_sequence(3), [1.0, 0.5, 1 / 3, 0.25], rtol=1e-15)

    def test_markers_strictly_decreasing(self):
        for spec in _all_maps():
            markers = IntervalMapService(spec).marker_sequence(60)
            self.assertTrue(np.all(np.diff(markers) < 0))
            self.assertGreater(markers[-1], 0.0)

    def test_marker_asymptotics_lsv(self):
        for alpha in (0.5, 1.0):
            markers = IntervalMapService(lsv_map(alpha)).marker_sequence(20000)
            scaled = [markers[n] * n ** (1 / alpha) for n in (10000, 20000)]
            self.assertGreater(scaled[0], 0.0)
            self.assertLess(abs(scaled[1] / scaled[0] - 1.0), 0.01)

    def test_level_index(self):
        self.assertEqual(self.farey.level_index(0.7), 1)
        self.assertEqual(self.farey.level_index(0.4), 2)
        self.assertEqual(self.farey.level_index(0.26), 3)
        self.assertEqual(self.farey.first_passage(0.26), 2)
        self.assertEqual(self.farey.level_index(0.0015), 666)

    def test_level_index_on_marker(self):
        with self.assertRaises(BoundaryError):
            self.farey.level_index(1 / 3)

    def test_indifference_and_expansion(self):
        for spec in _all_maps():
            report = IntervalMapService(spec).assumption_report()
            for name, check in report.items():
                self.assertTrue(check['ok'], f'{spec.family} alpha={spec.alpha}: {name} = {check["value"]}')

    def test_parabolic_constant(self):
        for spec in (lsv_map(0.5), pm_map(0.5), pm_map(1.0)):
            service = IntervalMapService(spec)
            ratios = [(service.derivative(0, x) - 1) / x ** spec.alpha for x in (1e-4, 1e-6)]
            self.assertGreater(ratios[1], 0.0)
            self.assertAlmostEqual(ratios[0] / ratios[1], 1.0, delta=1e-6)

    def test_map_from_config(self):
        spec = map_from_config({'family': 'pm', 'alpha': 0.5})
        self.assertLessEqual(abs(spec.a + spec.a ** 1.5 - 1.0), 1e-15)
        self.assertEqual(map_from_config({'family': 'Farey'}).family, 'farey')
        with self.assertRaises(DomainError):
            map_from_config({'family': 'tent'})

    def test_custom_map_from_dotted_path(self):
        spec = map_from_config({
            'family': 'custom',
            'alpha': 1.0,
            'params': {
                'factory': 'interval_maps.tests:farey_like_factory',
                'a': 0.5, 'rho': 1 / 0.81, 'epsilon': 0.1, 'expansion_hi': 0.9,
            },
        })
        service = IntervalMapService(spec)
        self.assertAlmostEqual(service.eval_T(0.25)[0], 1 / 3, delta=1e-15)
        np.testing.assert_allclose(service.marker_sequence(3), [1.0, 0.5, 1 / 3, 0.25], rtol=1e-15)
        self.assertTrue(all(check['ok'] for check in service.assumption_report().values()))

    def test_custom_smoothness_limits_jets_everywhere(self):
        spec = map_from_config({
            'family': 'custom',
            'alpha': 1.0,
            'params': {
                'factory': 'interval_maps.tests:farey_like_factory',
                'a': 0.5, 'rho': 1 / 0.81, 'epsilon': 0.1, 'smoothness_r': 2,
            },
        })
        service = IntervalMapService(spec)
        np.testing.assert_allclose(service.branch_jet(1, 0.75, order=2).derivatives[:2], [1 / 3, -16 / 9], rtol=1e-14)
        for branch, x in ((0, 0.25), (1, 0.75)):
            with self.assertRaises(UnsupportedOrderError):
                service.branch_jet(branch, x, order=3)
