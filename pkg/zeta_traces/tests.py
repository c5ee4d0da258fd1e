import math

import numpy as np
from django.test import SimpleTestCase

from induced_map.potentials import PotentialSpec
from induced_map.services import InducedMapService
from interval_maps.exceptions import DomainError, PoleError
from interval_maps.families import farey_map

from .constants import KIND_PERIODIC, SOURCE_GEOMETRIC
from .services import TraceResult, TraceSeries, ZetaService
from .tails import fit_tail

GOLDEN = (math.sqrt(5) - 1) / 2


def _service(potential=None, spec=None, **kwargs):
    return ZetaService(InducedMapService(spec or farey_map(), potential), **kwargs)


def _rank_one(lam, order):
    traces = np.array([lam ** m for m in range(1, order + 1)], dtype=complex)
    return TraceSeries(z=0.0, m_max=order, traces=traces, tails=np.zeros(order), cutoff_N=0)


class TailFitTestCase(SimpleTestCase):

    def test_geometric_shells(self):
        tail = fit_tail(np.ones(20), 1, 0.5, 0.0)
        self.assertEqual(tail.model, 'geometric')
        self.assertAlmostEqual(tail.ratio, 0.5, delta=1e-12)
        self.assertAlmostEqual(tail.correction.real, 0.5 ** 20, delta=1e-18)
        self.assertTrue(tail.applied)

    def test_power_law_shells(self):
        t = np.arange(1, 2001)
        tail = fit_tail(1.0 / t ** 2, 1, 1.0, 0.0)
        self.assertEqual((tail.model, tail.exponent), ('power', 2.0))
        expected = 1.0 / 2000.5
        self.assertLess(abs(tail.correction.real - expected) / expected, 1e-6)

    def test_harmonic_shells_are_not_summable(self):
        t = np.arange(1, 500)
        tail = fit_tail(1.0 / t, 1, 1.0, 0.0)
        self.assertFalse(tail.summable)
        self.assertTrue(math.isinf(tail.bound))

    def test_growing_shells_report_signed_exponent(self):
        with self.assertLogs('zeta_traces.tails', 'WARNING') as logs:
            tail = fit_tail(np.arange(1, 50) ** 0.3, 1, 1.0, 0.0)
        self.assertFalse(tail.summable)
        self.assertIn('t^+0.30', logs.output[0])
        self.assertNotIn('--', logs.output[0])

    def test_complex_boundary_reports_bound_only(self):
        t = np.arange(1, 500)
        tail = fit_tail(1.0 / t ** 2, 1, 1j, 0.0)
        self.assertFalse(tail.applied)
        self.assertEqual(tail.correction, 0.0)
        self.assertGreater(tail.bound, 0.0)


class FlatTraceTestCase(SimpleTestCase):

    def setUp(self):
        self.gauss = _service()

    def test_golden_word_contribution(self):
        result = self.gauss.flat_trace(1.0, 1, cutoff_N=1)
        self.assertAlmostEqual(result.partial.real, 0.2763932023, delta=1e-10)
        self.assertAlmostEqual(result.partial.real, GOLDEN ** 2 / (1 + GOLDEN ** 2), delta=1e-14)

    def test_zero_z(self):
        for m in (1, 2, 3):
            self.assertEqual(self.gauss.flat_trace(0.0, m).value, 0)

    def test_sources_differ_by_periodic_sums(self):
        for m in (1, 2):
            plain = self.gauss.flat_trace(0.5, m, cutoff_N=40)
            geometric = self.gauss.flat_trace(0.5, m, cutoff_N=40, source=SOURCE_GEOMETRIC)
            periodic = self.gauss.shell_series(m, 0.5, KIND_PERIODIC, cutoff_N=40)
            self.assertAlmostEqual(plain.partial - geometric.partial, periodic.partial, delta=1e-13)

    def test_sum_does_not_depend_on_thread_count(self):
        serial = self.gauss.flat_trace(0.6, 2, cutoff_N=400)
        threaded = _service(threads=4).flat_trace(0.6, 2, cutoff_N=400)
        self.assertLessEqual(abs(serial.value - threaded.value), 1e-13)

    def test_adaptive_cutoff_meets_tolerance(self):
        result = self.gauss.flat_trace(0.5, 1)
        self.assertLess(result.tail, 1e-8 * abs(result.value))
        self.assertFalse(result.precision_warning)
        self.assertFalse(result.outside_domain)

    def test_boundary_traces_use_letter_box(self):
        self.assertTrue(self.gauss.operator_tail_applies(1.0))
        self.assertFalse(self.gauss.operator_tail_applies(0.5))
        self.assertFalse(self.gauss.operator_tail_applies(1.0, SOURCE_GEOMETRIC))
        self.assertEqual([self.gauss.box_letter(m) for m in (1, 3, 6)], [200, 46, 6])

        box = self.gauss.flat_trace(1.0, 1)
        self.assertEqual(box.cutoff_N, 200)
        self.assertFalse(box.precision_warning)
        self.assertLess(box.tail, 1e-8)
        shells = self.gauss.flat_trace(1.0, 1, cutoff_N=4000)
        self.assertLess(abs(box.value - shells.value), 1e-7)

    def test_box_tail_is_small_for_long_words(self):
        result = self.gauss.box_series(6, 1.0)
        self.assertEqual((result.stop_reason, result.tail.model, result.words), ('box', 'operator', 6 ** 6))
        self.assertLess(result.tail.bound, 1e-7)
        self.assertGreater(abs(result.tail.correction), 1e-2)

    def test_outside_domain_is_flagged(self):
        result = self.gauss.flat_trace(1.2, 1, cutoff_N=30)
        self.assertTrue(result.outside_domain)
        self.assertTrue(result.precision_warning)

    def test_mollified_trace_agrees(self):
        mollified = self.gauss.flat_trace_mollified(0.5, 1)
        reference = self.gauss.flat_trace(0.5, 1, cutoff_N=mollified.cutoff_N).partial
        self.assertLessEqual(abs(mollified.value - reference), 1e-4 * abs(reference))

        widths = sorted(mollified.estimates)
        fine, mid, coarse = (mollified.estimates[w] for w in widths)
        ratio = abs(coarse - mid) / abs(mid - fine)
        self.assertGreaterEqual(ratio, 1.7)
        self.assertLessEqual(ratio, 2.3)

    def test_mollified_trace_second_power(self):
        mollified = self.gauss.flat_trace_mollified(0.8, 2)
        reference = self.gauss.flat_trace(0.8, 2, cutoff_N=mollified.cutoff_N).partial
        self.assertLessEqual(abs(mollified.value - reference), 1e-4 * abs(reference))

    def test_mollified_trace_rejects_unit_circle(self):
        with self.assertRaises(DomainError):
            self.gauss.flat_trace_mollified(1.0, 1)


class DeterminantTestCase(SimpleTestCase):

    def setUp(self):
        self.service = _service()

    def test_zero_traces(self):
        det = self.service.det_series(_rank_one(0.0, 4))
        np.testing.assert_array_equal(det.coeffs, [1, 0, 0, 0, 0])

    def test_low_order_coefficients(self):
        traces = TraceSeries(z=0.0, m_max=2, traces=np.array([0.3 + 0.1j, -0.2j]), tails=np.zeros(2), cutoff_N=0)
        det = self.service.det_series(traces)
        tr1, tr2 = traces.traces
        self.assertAlmostEqual(det.coeffs[1], -tr1, delta=1e-15)
        self.assertAlmostEqual(det.coeffs[2], (tr1 ** 2 - tr2) / 2, delta=1e-15)

    def test_rank_one_system(self):
        det = self.service.det_series(_rank_one(0.5, 5))
        np.testing.assert_allclose(det.coeffs, [1, -0.5, 0, 0, 0, 0], rtol=0, atol=1e-14)
        zero = self.service.det_zero(det, 1.5)
        self.assertTrue(zero.found)
        self.assertAlmostEqual(zero.u, 2.0, delta=1e-12)

    def test_zero_outside_reliable_disc(self):
        det = self.service.det_series(_rank_one(0.5, 3), reliable_radius=1.0)
        zero = self.service.det_zero(det, 0.9)
        self.assertFalse(zero.found)
        self.assertIn('outside', zero.reason)

    def test_gauss_determinant_at_one(self):
        det = self.service.determinant(1.0, 6)
        self.assertFalse(det.precision_warning)
        self.assertGreater(det.reliable_radius, 3.5)
        first = self.service.det_zero(det, 1.0)
        self.assertTrue(first.found)
        self.assertLess(abs(first.u - 1.0), 1e-6)
        second = self.service.det_zero(det, -3.3)
        self.assertTrue(second.found)
        self.assertLess(abs(second.u - (-1 / 0.3036630029)), 1e-3)

    def test_flagged_traces_withhold_zeros(self):
        results = [TraceResult(z=1.0, m=m, value=1.0, partial=1.0, tail=0.5, cutoff_N=20, precision_warning=m == 2)
                   for m in (1, 2)]
        traces = TraceSeries(z=1.0, m_max=2, traces=np.ones(2, dtype=complex), tails=np.full(2, 0.5), cutoff_N=20,
                             results=results)
        det = self.service.det_series(traces)
        self.assertEqual(det.flagged_orders, [2])
        zero = self.service.det_zero(det, 1.0)
        self.assertFalse(zero.found)
        self.assertEqual(zero.reason, 'trace precision')
        self.assertEqual(self.service.det_zeros(det), [])

    def test_shell_cutoff_at_one_is_flagged(self):
        det = self.service.determinant(1.0, 6, cutoff_N=24)
        self.assertIn(6, det.flagged_orders)
        self.assertFalse(self.service.det_zero(det, 1.0).found)


class ZetaFunctionTestCase(SimpleTestCase):

    def test_direct_coefficients_for_constant_potential(self):
        direct = _service(PotentialSpec.constant(-1.0)).zeta_T_direct(0.2, 3)
        self.assertAlmostEqual(direct.log_coeffs[1], 2 * math.exp(-1), delta=1e-14)
        self.assertAlmostEqual(direct.log_coeffs[2], 2 * math.exp(-2), delta=1e-14)
        self.assertEqual(_service().zeta_T_direct(0.0, 4).value, 1)

    def test_direct_limits(self):
        with self.assertRaises(DomainError):
            _service().zeta_T_direct(0.1, 21)

    def test_inducing_identity_coefficients(self):
        for potential in (PotentialSpec.constant(-1.0), PotentialSpec.minus_q_log_derivative(1.0)):
            service = _service(potential)
            direct = service.zeta_T_direct(0.1, 6).log_coeffs
            induced = service.log_zeta_coefficients_induced(6)
            np.testing.assert_allclose(induced[1:], direct[1:], rtol=1e-8)

    def test_relation_matches_direct_zeta(self):
        service = _service(PotentialSpec.constant(-1.0), tail_rel_tol=1e-7)
        via_relation = service.zeta_via_relation(0.3, 6)
        direct = service.zeta_T_direct(0.3, 14).value
        self.assertLessEqual(abs(via_relation - direct) / abs(direct), 1e-6)
        r = 0.3 / math.e
        self.assertLessEqual(abs(via_relation - 1 / (1 - 2 * r)), 1e-6)

    def test_relation_pole_and_origin(self):
        service = _service(PotentialSpec.constant(-1.0))
        with self.assertRaises(PoleError):
            service.zeta_via_relation(math.e, 3)
        self.assertEqual(service.zeta_via_relation(0.0, 3), 1)

    def test_two_variable_zeta_trivial_points(self):
        service = _service()
        self.assertEqual(service.Z_two_var(0.5, 0.0, 3), 1)
        self.assertEqual(service.zeta_G(0.3, 2, cutoff_N=50), service.Z_two_var(1.0, 0.3, 2, cutoff_N=50))

    def test_determinant_ratio_identity(self):
        service = _service(tail_rel_tol=1e-7, max_words=200_000)
        words = service.Z_two_var(0.5, 0.5, 6)
        ratio = service.Z_two_var(0.5, 0.5, 6, method='ratio')
        self.assertLessEqual(abs(words - ratio) / abs(words), 1e-6)


class LambdaTestCase(SimpleTestCase):

    def test_constant_potential_closed_form(self):
        service = _service(PotentialSpec.constant(-1.0))
        r = 0.5 / math.e
        for m in (1, 2, 3):
            value = service.lambda_m(0.5, m).value.real
            self.assertLess(abs(value - (r / (1 - r)) ** m) / value, 1e-6)

    def test_only_modulus_matters(self):
        service = _service()
        self.assertAlmostEqual(service.lambda_m(0.5, 2).value, service.lambda_m(0.5j, 2).value, delta=1e-13)

    def test_submultiplicativity(self):
        summary = _service().lambda_estimate(0.7, m_max=4)
        self.assertTrue(summary.submultiplicative['2+2'])
        self.assertTrue(all(summary.submultiplicative.values()))
        self.assertEqual(len(summary.ratios), 3)


class PressureTestCase(SimpleTestCase):

    def test_farey_geometric_pressure_vanishes(self):
        estimate = _service().pressure('T', 14)
        self.assertLess(abs(estimate.value), 0.05)
        self.assertEqual(len(estimate.sequence), 14)
        self.assertEqual(estimate.value, estimate.sequence[-1])

    def test_topological_entropy(self):
        estimate = _service(PotentialSpec.minus_q_log_derivative(0.0)).pressure('T', 14)
        self.assertLess(abs(estimate.value - math.log(2)), 0.02)

    def test_constant_shift(self):
        base = _service().pressure('T', 10)
        shifted = _service(PotentialSpec.minus_q_log_derivative(1.0, shift=-0.3)).pressure('T', 10)
        self.assertAlmostEqual(shifted.value, base.value - 0.3, delta=1e-10)

    def test_induced_pressure_sequence(self):
        estimate = _service().pressure('G', 2, cutoff_N=200)
        self.assertEqual(len(estimate.sequence), 2)
        self.assertTrue(math.isfinite(estimate.drift))

    def test_unknown_map(self):
        with self.assertRaises(DomainError):
            _service().pressure('H', 3)
