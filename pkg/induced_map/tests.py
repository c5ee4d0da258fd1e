import math

import numpy as np
from django.test import SimpleTestCase

from interval_maps.exceptions import DomainError, UnsupportedOrderError
from interval_maps.families import farey_map, lsv_map, pm_map

from .potentials import PotentialSpec, potential_from_config
from .services import InducedMapService, Word


def half_potential(branch, x):
    """Custom potential used by the loader tests: v = -0.5 on both branches"""
    return -0.5 + 0.0 * np.asarray(x, dtype=float)


class PotentialConfigTestCase(SimpleTestCase):

    def test_kinds(self):
        pot = potential_from_config({'kind': 'mql', 'q': 1.0})
        self.assertEqual((pot.kind, pot.q, pot.v0_at_zero), ('mql', 1.0, 0.0))
        pot = potential_from_config({'kind': 'const', 'v0': -1.0})
        self.assertEqual((pot.kind, pot.v0_at_zero), ('const', -1.0))
        pot = potential_from_config({'kind': 'minus_q_log_dT', 'q': 2, 'shift': -0.5})
        self.assertEqual((pot.q, pot.v0_at_zero), (2.0, -0.5))

    def test_custom_callable(self):
        pot = potential_from_config({'kind': 'custom', 'callable': 'induced_map.tests:half_potential'})
        self.assertEqual(pot.v0_at_zero, -0.5)
        service = InducedMapService(farey_map(), pot)
        self.assertAlmostEqual(service.induced_weight(4, 0.3), -2.0, delta=1e-15)

    def test_rejected_inputs(self):
        with self.assertRaises(DomainError):
            potential_from_config({'kind': 'mql', 'q': 1 + 2j})
        with self.assertRaises(DomainError):
            potential_from_config({'kind': 'const'})
        with self.assertRaises(DomainError):
            potential_from_config({'kind': 'quadratic'})


class InducedBranchTestCase(SimpleTestCase):

    def setUp(self):
        self.farey = InducedMapService(farey_map())

    def test_phi_branch_examples(self):
        self.assertAlmostEqual(float(self.farey.phi_branch(3, 0.5).value), 1 / 3.5, delta=1e-15)
        self.assertAlmostEqual(float(self.farey.phi_branch(1, 0.0).value), 1.0, delta=1e-15)
        self.assertAlmostEqual(float(self.farey.phi_branch(2, 0.5).derivative(1)), -0.16, delta=1e-15)

    def test_farey_branches_are_gauss_branches(self):
        grid = np.linspace(0.0, 1.0, 20)
        worst = 0.0
        for ell in range(1, 41):
            values = self.farey.phi_branch(ell, grid, order=1).value
            worst = max(worst, float(np.max(np.abs(values - 1 / (ell + grid)))))
        self.assertLessEqual(worst, 1e-12)

    def test_batched_branches_match_composition(self):
        service = InducedMapService(lsv_map(0.5))
        x = np.array([0.1, 0.4, 0.9, 0.6])
        ell = np.array([1, 3, 5, 2])
        batch = service.phi(ell, x, order=2)
        for i in range(len(x)):
            single = service.phi_branch(int(ell[i]), float(x[i]), order=2)
            np.testing.assert_allclose(batch.coeffs[:, i], single.coeffs, rtol=1e-10, atol=1e-12)

    def test_G_eval(self):
        self.assertAlmostEqual(self.farey.G_eval(0.7), 0.3 / 0.7, delta=1e-14)
        self.assertAlmostEqual(self.farey.G_eval(0.4), 0.5, delta=1e-14)

    def test_G_inverts_every_branch(self):
        ys = np.linspace(0.05, 0.95, 12)
        for spec in (farey_map(), pm_map(1.0)):
            service = InducedMapService(spec)
            for ell in range(1, 31):
                points = service.phi(ell, ys, order=1).value
                for x, y in zip(points, ys):
                    self.assertLessEqual(abs(service.G_eval(float(x)) - y), 1e-10)

    def test_level_containment_and_contraction(self):
        for spec in (farey_map(), lsv_map(1.0)):
            service = InducedMapService(spec)
            for word in [(1,), (2,), (1, 1), (3, 1, 2), (5, 2), (2, 2, 2, 2)]:
                for x in (0.3, 0.7):
                    jet, _ = service.word_weight(word, x, order=1)
                    self.assertEqual(service.maps.level_index(float(jet.value)), word[0])
                for x in (0.0, 0.3, 1.0):
                    jet, _ = service.word_weight(word, x, order=1)
                    bound = spec.induced_constant * spec.induced_rho ** (-len(word))
                    self.assertLessEqual(abs(float(jet.derivative(1))), bound)


class InducedWeightTestCase(SimpleTestCase):

    def test_constant_potential_sums_exactly(self):
        service = InducedMapService(lsv_map(0.5), PotentialSpec.constant(-1.0))
        self.assertEqual(service.induced_weight(7, 0.3), -7.0)
        self.assertEqual(service.log_weight(7, 0.3), -7.0)

    def test_gauss_weight_is_branch_derivative(self):
        service = InducedMapService(farey_map())
        self.assertAlmostEqual(math.exp(service.induced_weight(1, 0.5)), 1 / 2.25, delta=1e-15)

    def test_cocycle_fast_path(self):
        pot = PotentialSpec.minus_q_log_derivative(0.7, shift=-0.2)
        for spec in (lsv_map(0.5), pm_map(1.0), farey_map()):
            service = InducedMapService(spec, pot)
            for ell in range(1, 9):
                for x in (0.0, 0.35, 0.8):
                    self.assertAlmostEqual(
                        float(service.log_weight(ell, x)), service.induced_weight(ell, x), delta=1e-11,
                    )

    def test_weight_grows_like_v0(self):
        service = InducedMapService(farey_map())
        rates = [service.induced_weight(n, 0.5) / n for n in (200, 400)]
        self.assertLess(abs(rates[1]), abs(rates[0]))
        self.assertLess(abs(rates[1]), 0.04)
        shifted = InducedMapService(farey_map(), PotentialSpec.constant(-0.3))
        self.assertAlmostEqual(shifted.induced_weight(400, 0.5) / 400, -0.3, delta=1e-13)

    def test_word_weight_examples(self):
        service = InducedMapService(farey_map())
        jet, log_w = service.word_weight((1, 1), 0.0)
        self.assertAlmostEqual(float(jet.value), 0.5, delta=1e-15)
        self.assertAlmostEqual(math.exp(log_w), 0.25, delta=1e-15)
        _, single = service.word_weight((4,), 0.2)
        self.assertAlmostEqual(single, service.induced_weight(4, 0.2), delta=1e-14)

    def test_suffix_recursion(self):
        service = InducedMapService(lsv_map(0.5), PotentialSpec.minus_q_log_derivative(1.3, shift=-0.1))
        word = (2, 1, 3)
        x = 0.45
        _, log_w = service.word_weight(word, x)
        suffix_jet, log_suffix = service.word_weight(word[1:], x)
        head = service.induced_weight(word[0], float(suffix_jet.value))
        self.assertAlmostEqual(log_w, head + log_suffix, delta=1e-12)

    def test_weights_stay_finite_for_long_blocks(self):
        service = InducedMapService(farey_map(), PotentialSpec.constant(-1.0))
        _, log_w = service.word_weight((5000, 5000), 0.5)
        self.assertEqual(log_w, -10000.0)

    def test_word_batch_matches_single_words(self):
        service = InducedMapService(pm_map(0.5), PotentialSpec.minus_q_log_derivative(1.0))
        words = np.array([[1, 2], [3, 1], [2, 2]])
        x = np.array([0.2, 0.5, 0.7])
        jet, log_w = service.word_batch(words, x)
        for i, word in enumerate(words):
            single_jet, single_log = service.word_weight(tuple(word), x[i], order=1)
            self.assertAlmostEqual(float(jet.value[i]), float(single_jet.value), delta=1e-13)
            self.assertAlmostEqual(float(log_w[i]), single_log, delta=1e-12)

    def test_word_validation(self):
        self.assertEqual(Word((2, 3)).total, 5)
        with self.assertRaises(DomainError):
            Word((1, 0))

    def test_geometric_potential(self):
        service = InducedMapService(farey_map(), PotentialSpec.minus_q_log_derivative(1.0, shift=-0.5))
        geometric = service.geometric_potential()
        self.assertEqual((geometric.kind, geometric.q, geometric.v0), ('mql', 2.0, -0.5))
        constant = InducedMapService(farey_map(), PotentialSpec.constant(-1.0)).geometric_potential()
        self.assertEqual((constant.q, constant.v0), (1.0, -1.0))


class H7EstimateTestCase(SimpleTestCase):

    def test_constant_potential_is_geometric(self):
        service = InducedMapService(farey_map(), PotentialSpec.constant(-1.0))
        estimate = service.h7_estimate(k=1, N=50)
        self.assertTrue(math.isfinite(estimate.c_k_estimate))
        self.assertAlmostEqual(estimate.tail_ratio, math.exp(-1.0), delta=2e-3)
        self.assertTrue(estimate.summable)

    def test_gauss_tail_is_polynomial(self):
        estimate = InducedMapService(farey_map()).h7_estimate(k=1, N=50)
        self.assertLess(estimate.tail_ratio, 1.0)
        self.assertAlmostEqual(estimate.tail_exponent, 2.0, delta=0.05)
        self.assertTrue(estimate.summable)
        self.assertIsNone(estimate.warning)

    def test_small_q_flags_summability(self):
        service = InducedMapService(farey_map(), PotentialSpec.minus_q_log_derivative(0.3))
        estimate = service.h7_estimate(k=1, N=50)
        self.assertFalse(estimate.summable)
        self.assertIsNotNone(estimate.warning)

    def test_limits(self):
        service = InducedMapService(lsv_map(0.5))
        with self.assertRaises(UnsupportedOrderError):
            service.h7_estimate(k=2, N=20)
        with self.assertRaises(DomainError):
            service.h7_estimate(k=0, N=5)
