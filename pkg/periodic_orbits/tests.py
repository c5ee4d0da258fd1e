import math

import numpy as np
from django.test import SimpleTestCase

from induced_map.potentials import PotentialSpec, potential_from_config
from induced_map.services import InducedMapService
from interval_maps.exceptions import DomainError
from interval_maps.families import farey_map, lsv_map

from .services import PeriodicOrbitService
from .words import binary_words, enumerate_words, iter_shell, shell_size

GOLDEN = (math.sqrt(5) - 1) / 2


def farey_log_derivative(branch, x):
    """-log|T'| for the Farey map, written out by branch"""
    x = np.asarray(x, dtype=float)
    return 2 * np.log(1 - x) if branch == 0 else 2 * np.log(x)


def _orbits(spec=None, potential=None):
    return PeriodicOrbitService(InducedMapService(spec or farey_map(), potential))


class WordStreamTestCase(SimpleTestCase):

    def test_small_enumerations(self):
        self.assertEqual(list(enumerate_words(2, 3)), [(1, 1), (1, 2), (2, 1)])
        self.assertEqual(list(enumerate_words(1, 5)), [(1,), (2,), (3,), (4,), (5,)])

    def test_count_and_order(self):
        words = list(enumerate_words(2, 20))
        self.assertEqual(len(words), 190)
        self.assertEqual(len(set(words)), 190)
        totals = [w.total for w in words]
        self.assertEqual(totals, sorted(totals))

    def test_chunked_shells(self):
        whole = next(iter_shell(12, 4))
        self.assertEqual(whole.shape, (shell_size(12, 4), 4))
        chunks = np.vstack(list(iter_shell(12, 4, chunk_size=7)))
        np.testing.assert_array_equal(whole, chunks)
        self.assertTrue(np.all(whole.sum(axis=1) == 12))
        self.assertTrue(np.all(whole >= 1))
        self.assertEqual(list(iter_shell(3, 4)), [])

    def test_invalid_requests(self):
        with self.assertRaises(DomainError):
            list(enumerate_words(3, 2))
        with self.assertRaises(DomainError):
            binary_words(0)

    def test_binary_words(self):
        np.testing.assert_array_equal(binary_words(2), [[0, 0], [0, 1], [1, 0], [1, 1]])


class WordFixedPointTestCase(SimpleTestCase):

    def setUp(self):
        self.orbits = _orbits()

    def test_quadratic_fixed_points(self):
        record = self.orbits.fixed_point((1,))
        self.assertAlmostEqual(record.x_fix, GOLDEN, delta=1e-10)
        self.assertAlmostEqual(record.deriv_phi, -GOLDEN ** 2, delta=1e-10)
        self.assertAlmostEqual(self.orbits.fixed_point((2,)).x_fix, math.sqrt(2) - 1, delta=1e-10)
        record = self.orbits.fixed_point((1, 2))
        self.assertAlmostEqual(record.x_fix, math.sqrt(3) - 1, delta=1e-10)
        self.assertEqual(record.z_exponent, 3)

    def test_record_invariants(self):
        for word in [(1,), (3, 1), (2, 5, 1), (7,)]:
            record = self.orbits.fixed_point(word)
            jet, _ = self.orbits.induced.word_weight(word, record.x_fix, order=1)
            self.assertLessEqual(abs(float(jet.value) - record.x_fix), 1e-12)
            self.assertLess(abs(record.deriv_phi), 1.0)

    def test_batch_matches_scalar(self):
        words = np.array([[1, 1], [1, 2], [2, 1], [4, 3]])
        batch = self.orbits.fixed_points(words)
        for i, word in enumerate(words):
            record = self.orbits.fixed_point(tuple(word))
            self.assertAlmostEqual(batch.x_fix[i], record.x_fix, delta=1e-13)
            self.assertAlmostEqual(batch.deriv_phi[i], record.deriv_phi, delta=1e-13)
        np.testing.assert_array_equal(batch.z_exponent, [2, 3, 3, 7])

    def test_fixed_points_are_distinct(self):
        words = np.vstack([block for t in range(2, 21) for block in iter_shell(t, 2)])
        batch = self.orbits.fixed_points(words)
        self.assertEqual(len(batch.x_fix), 190)
        self.assertGreater(np.min(np.diff(np.sort(batch.x_fix))), 1e-10)

    def test_weight_identity_for_geometric_potential(self):
        for spec in (farey_map(), lsv_map(1.0)):
            orbits = _orbits(spec)
            words = np.vstack([block for t in range(3, 9) for block in iter_shell(t, 3)])
            batch = orbits.fixed_points(words)
            np.testing.assert_allclose(np.exp(batch.logW), np.abs(batch.deriv_phi), rtol=1e-12)

    def test_exponents_add_under_concatenation(self):
        left, right = self.orbits.fixed_point((2, 1)), self.orbits.fixed_point((3,))
        joined = self.orbits.fixed_point((2, 1, 3))
        self.assertEqual(joined.z_exponent, left.z_exponent + right.z_exponent)


class TPeriodicPointTestCase(SimpleTestCase):

    def test_period_one(self):
        points = _orbits().t_periodic_points(1)
        self.assertEqual([p.word for p in points], ['0', '1'])
        self.assertEqual(points[0].x, 0.0)
        self.assertAlmostEqual(points[1].x, GOLDEN, delta=1e-12)
        self.assertAlmostEqual(points[1].log_weight, 2 * math.log(GOLDEN), delta=1e-12)

    def test_period_two(self):
        points = {p.word: p.x for p in _orbits().t_periodic_points(2)}
        self.assertEqual(len(points), 4)
        self.assertEqual(points['00'], 0.0)
        self.assertAlmostEqual(points['11'], GOLDEN, delta=1e-12)
        self.assertAlmostEqual(points['01'], math.sqrt(2) - 1, delta=1e-12)
        self.assertAlmostEqual(points['10'], 1 / math.sqrt(2), delta=1e-12)

    def test_forward_completeness(self):
        for spec in (farey_map(), lsv_map(0.5)):
            orbits = _orbits(spec)
            points = orbits.t_periodic_points(8)
            self.assertEqual(len(points), 256)
            self.assertLessEqual(max(orbits.forward_residual(p) for p in points), 1e-9)

    def test_constant_weights_and_zero_word(self):
        orbits = _orbits(potential=PotentialSpec.constant(-1.0))
        _, x, log_w = orbits.t_periodic_arrays(5)
        np.testing.assert_allclose(log_w, -5.0, rtol=0, atol=1e-15)
        self.assertEqual(x[0], 0.0)

    def test_custom_potential_orbit_sums(self):
        custom = potential_from_config({
            'kind': 'custom', 'callable': 'periodic_orbits.tests:farey_log_derivative', 'v0_at_zero': 0.0,
        })
        _, _, expected = _orbits().t_periodic_arrays(6)
        _, _, summed = _orbits(potential=custom).t_periodic_arrays(6)
        np.testing.assert_allclose(summed, expected, rtol=1e-12, atol=1e-12)
