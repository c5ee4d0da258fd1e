"""
Subcommand runners: each turns a validated ExperimentConfig into result tables
"""
import logging
import math
from dataclasses import dataclass, field
from typing import List

import numpy as np

from continuation.services import ContinuationService
from induced_map.services import InducedMapService, chebyshev_grid
from interval_maps.constants import BRANCH_PARABOLIC
from interval_maps.exceptions import (
    BoundaryError, ConvergenceError, DomainError, DynZetaError, PoleError, PrecisionError, UnsupportedOrderError,
)
from interval_maps.services import IntervalMapService
from spectral.services import BumpFunction, SpectralService
from spectral.ulam import ulam_operator, ulam_spectrum
from zeta_traces.constants import PRECISION_WARNING_FRACTION, SOURCE_GEOMETRIC, SOURCE_W
from zeta_traces.services import ZetaService

from .config import ConfigError, parse_complex, parse_complex_list
from .output_utils import Table, write_outputs

logger = logging.getLogger(__name__)

SUBCOMMANDS = (
    'map-info', 'trace', 'det', 'zeta', 'zeta-compare', 'spectrum', 'eigenfun', 'continue', 'lambda',
    'pressure', 'check',
)

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_CONFIG = 2
EXIT_PRECISION = 3
EXIT_DOMAIN = 4

SOURCES = {'w': SOURCE_W, 'geometric': SOURCE_GEOMETRIC, SOURCE_GEOMETRIC: SOURCE_GEOMETRIC}

CHECK_SUITES = ('trace-vs-mollified', 'zeta-relation', 'inducing-identity', 'continuation-overlap')
TRACE_MOLLIFIED_TOL = 1e-4
ZETA_RELATION_TOL = 1e-8
INDUCING_IDENTITY_TOL = 1e-9
OVERLAP_TOL = 1e-7
OVERLAP_TERMS = 400


@dataclass
class RunOutcome:
    subcommand: str
    summary: str
    tables: List[Table] = field(default_factory=list)
    payload: dict = field(default_factory=dict)
    lines: List[str] = field(default_factory=list)
    passed: bool = True
    paths: List[str] = field(default_factory=list)
    precision_failures: List[str] = field(default_factory=list)

    @property
    def exit_code(self):
        if not self.passed:
            return EXIT_FAILED
        if self.precision_failures:
            return EXIT_PRECISION
        return EXIT_OK


def exit_code_for(exc):
    """Exit status for an exception raised during a run"""
    if isinstance(exc, ConfigError):
        return EXIT_CONFIG
    if isinstance(exc, (PrecisionError, ConvergenceError)):
        return EXIT_PRECISION
    if isinstance(exc, (DomainError, BoundaryError, PoleError, UnsupportedOrderError)):
        return EXIT_DOMAIN
    return EXIT_FAILED


def _fmt(value):
    value = complex(value)
    if value.imag == 0:
        return f'{value.real:.12g}'
    return f'{value.real:.12g}{value.imag:+.12g}i'


def _int(block, key, default, minimum=1):
    value = block.get(key, default)
    if value is None:
        return None
    if isinstance(value, bool) or not isinstance(value, int) or value < minimum:
        raise ConfigError(f'{key} must be an integer >= {minimum}, got {value!r}')
    return value


def _float(block, key, default):
    value = block.get(key, default)
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f'{key} must be a number, got {value!r}')
    return float(value)


def _imprecise(value, tail):
    return not math.isfinite(tail) or tail > PRECISION_WARNING_FRACTION * abs(value)


def _source(block):
    name = block.get('source', 'w')
    try:
        return SOURCES[name]
    except KeyError:
        raise ConfigError(f"source must be 'w' or 'geometric', got {name!r}")


def _z_values(block, default=None):
    if 'z_list' in block and 'z_path' in block:
        raise ConfigError('Give either z_list or z_path, not both')
    if 'z_list' in block:
        return parse_complex_list(block['z_list'], 'z_list')
    if 'z_path' in block:
        return parse_complex_list(block['z_path'], 'z_path')
    if default is None:
        raise ConfigError('A z_list or z_path is required')
    return list(default)


class ExperimentRunner:
    """Builds the services for one config and dispatches subcommands to them"""

    def __init__(self, config, threads=1):
        self.config = config
        self.threads = max(1, int(threads))
        self.induced = InducedMapService(config.map_spec, config.potential)
        self._zeta = None

    @property
    def zeta(self):
        if self._zeta is None:
            self._zeta = ZetaService(self.induced, threads=self.threads)
        return self._zeta

    @property
    def spectral(self):
        return SpectralService(self.induced, zeta=self.zeta)

    def run(self, subcommand) -> RunOutcome:
        if subcommand not in SUBCOMMANDS:
            raise ConfigError(f'Unknown subcommand {subcommand!r}; choose from {", ".join(SUBCOMMANDS)}')
        handler = getattr(self, f'run_{subcommand.replace("-", "_")}')
        logger.info(f'Running {subcommand} (config {self.config.hash}, threads {self.threads})')
        return handler()

    # --- maps ---------------------------------------------------------------

    def run_map_info(self):
        service = IntervalMapService(self.config.map_spec)
        info = service.describe(marker_count=10)
        table = Table('markers', ['level', 'marker'])
        for level, marker in enumerate(info['markers']):
            table.add(level, marker)
        head = ', '.join(f'{m:.6g}' for m in info['markers'][:4])
        summary = f"{info['family']}: a={info['a']:.12g}, alpha={info['alpha']:.6g}, markers {head}, ..."
        return RunOutcome('map-info', summary, [table], payload=info)

    # --- traces and determinants ---------------------------------------------

    def run_trace(self):
        block = self.config.block('trace')
        z = parse_complex(block.get('z', 0.5))
        m_max = _int(block, 'm_max', 3)
        cutoff = _int(block, 'cutoff', None)
        series = self.zeta.trace_series(z, m_max, cutoff, _source(block))

        header = ['m', 'trace_re', 'trace_im', 'tail', 'cutoff', 'precision_warning']
        mollified = bool(block.get('mollified', False))
        if mollified:
            header += ['mollified_re', 'mollified_im', 'relative_difference']
        table = Table('traces', header)
        lines = []
        for result in series.results:
            row = [result.m, result.value.real, result.value.imag, result.tail, result.cutoff_N,
                   result.precision_warning]
            if mollified:
                other = self.zeta.flat_trace_mollified(z, result.m, eps=_float(block, 'eps', 1e-3)).value
                row += [other.real, other.imag, abs(other - result.value) / max(abs(result.value), 1e-300)]
            table.add(*row)
            lines.append(f'tr(Q^{result.m}) = {_fmt(result.value)} (tail {result.tail:.1e})')
        summary = f'{m_max} flat traces at z={_fmt(z)}, cutoff {series.cutoff_N}'
        imprecise = [f'm={r.m}' for r in series.results if r.precision_warning]
        if imprecise:
            summary += f'; precision warning at {", ".join(imprecise)}'
        return RunOutcome('trace', summary, [table], lines=lines, precision_failures=imprecise)

    def run_det(self):
        block = self.config.block('det')
        z = parse_complex(block.get('z', 0.5))
        M = _int(block, 'M', 5)
        det = self.zeta.determinant(z, M, _int(block, 'cutoff', None), _source(block), k=_int(block, 'k', None))

        coeffs = Table('coefficients', ['n', 'coeff_re', 'coeff_im', 'reliable_radius'])
        for n, c in enumerate(det.coeffs):
            coeffs.add(n, c.real, c.imag, det.reliable_radius)

        zeros = self.zeta.det_zeros(det)
        if 'u0' in block:
            zeros = [self.zeta.det_zero(det, parse_complex(block['u0'], 'u0'))] + zeros
        zero_table = Table('zeros', ['u_re', 'u_im', 'residual', 'iterations', 'found', 'reason'])
        lines = []
        for zero in zeros:
            u = zero.u if zero.u is not None else complex('nan')
            zero_table.add(u.real, u.imag, zero.residual, zero.iterations, zero.found, zero.reason)
            lines.append(f'zero u={_fmt(u)}' if zero.found else f'zero not found: {zero.reason}')
        found = sum(zero.found for zero in zeros)
        summary = f'det of order {M} at z={_fmt(z)}: {found} zero(s) in |u| < {det.reliable_radius:.4g}'
        imprecise = [f'm={m}' for m in det.flagged_orders]
        if imprecise:
            summary += f'; zeros withheld, precision warning on the traces at {", ".join(imprecise)}'
        return RunOutcome('det', summary, [coeffs, zero_table], lines=lines, precision_failures=imprecise)

    # --- zeta functions --------------------------------------------------------

    def _zeta_rows(self, compare):
        block = self.config.block('zeta')
        points = _z_values(block, default=[0.3])
        n_max = _int(block, 'n_max', 10)
        m_max = _int(block, 'm_max', 4)
        cutoff = _int(block, 'cutoff', None)
        header = ['z_re', 'z_im', 'relation_re', 'relation_im', 'relation_tail']
        if compare:
            header += ['direct_re', 'direct_im', 'direct_n_max', 'relative_difference']
        table = Table('zeta', header)
        lines, worst, imprecise = [], 0.0, []
        for z in points:
            relation = self.zeta.zeta_relation(z, m_max, cutoff)
            if _imprecise(relation.value, relation.tail):
                imprecise.append(f'z={_fmt(z)}')
            row = [z.real, z.imag, relation.value.real, relation.value.imag, relation.tail]
            if compare:
                direct = self.zeta.zeta_T_direct(z, n_max).value
                difference = abs(direct - relation.value) / max(abs(direct), 1e-300)
                worst = max(worst, difference)
                row += [direct.real, direct.imag, n_max, difference]
                lines.append(f'zeta({_fmt(z)}): relation {_fmt(relation.value)}, direct {_fmt(direct)}, '
                             f'rel. diff {difference:.2e}')
            else:
                lines.append(f'zeta({_fmt(z)}) = {_fmt(relation.value)} (tail {relation.tail:.1e})')
            table.add(*row)
        return table, lines, worst, len(points), imprecise

    def run_zeta(self):
        table, lines, _, count, imprecise = self._zeta_rows(compare=False)
        summary = f'zeta_T,v at {count} point(s) via the inducing relation'
        if imprecise:
            summary += f'; tail above 10% at {", ".join(imprecise)}'
        return RunOutcome('zeta', summary, [table], lines=lines, precision_failures=imprecise)

    def run_zeta_compare(self):
        table, lines, worst, count, imprecise = self._zeta_rows(compare=True)
        summary = f'zeta_T,v direct vs relation at {count} point(s): max relative difference {worst:.2e}'
        if imprecise:
            summary += f'; tail above 10% at {", ".join(imprecise)}'
        return RunOutcome('zeta-compare', summary, [table], lines=lines, payload={'max_relative_difference': worst},
                          precision_failures=imprecise)

    # --- spectra ---------------------------------------------------------------

    def run_spectrum(self):
        block = self.config.block('spectrum')
        z = parse_complex(block.get('z', 1.0))
        top = _int(block, 'top', 6)
        service = self.spectral
        opr = service.collocation_matrix(z, _int(block, 'n_nodes', None), _int(block, 'branch_cutoff', None))
        result = service.spectrum(opr, top_count=top)

        table = Table('eigenvalues', ['index', 'eig_re', 'eig_im', 'modulus', 'stability'])
        for i, value in enumerate(result.eigenvalues):
            table.add(i, value.real, value.imag, abs(value), result.stability[i])
        tables = [table]
        lines = [f'lambda_{i} = {_fmt(v)}' for i, v in enumerate(result.eigenvalues[:3])]

        if 'ulam_bits' in block:
            ulam = ulam_spectrum(ulam_operator(self.induced, _int(block, 'ulam_bits', 10, minimum=2)), top_count=2)
            oracle = Table('ulam', ['index', 'eig_re', 'eig_im', 'modulus', 'cells'])
            for i, value in enumerate(ulam.eigenvalues):
                oracle.add(i, value.real, value.imag, abs(value), 2 ** ulam.resolution_bits)
            tables.append(oracle)
            lines.append(f'Ulam oracle: {", ".join(_fmt(v) for v in ulam.eigenvalues)}')
        summary = (f'{result.nodes}-node spectrum at z={_fmt(z)} ({opr.tail_model} tail): '
                   f'leading {_fmt(result.eigenvalues[0])}')
        return RunOutcome('spectrum', summary, tables, lines=lines)

    def run_eigenfun(self):
        block = self.config.block('eigenfun')
        grid = np.linspace(0.0, 1.0, _int(block, 'grid_points', 201, minimum=2))
        service = self.spectral
        table = Table('eigenfunction', ['x', 'value_re', 'value_im', 'residual'])

        if 'lambda' in block:
            lam = parse_complex(block['lambda'], 'lambda')
            bump = BumpFunction(_float(block, 'bump_a', self.config.map_spec.a))
            L_terms = _int(block, 'L_terms', None)
            values = service.l0_eigenfunction(lam, grid, bump, L_terms)
            shifted = np.asarray(service.maps.psi(BRANCH_PARABOLIC, grid), dtype=float)
            residuals = np.abs(service.l0_eigenfunction(lam, shifted, bump, L_terms) - lam * values)
            for x, v, r in zip(grid, values, residuals):
                table.add(x, v.real, v.imag, r)
            summary = f'F_lambda for lambda={_fmt(lam)}: functional equation residual {residuals.max():.2e}'
        else:
            z = parse_complex(block.get('z', 1.0))
            index = _int(block, 'index', 0, minimum=0)
            opr = service.collocation_matrix(z, _int(block, 'n_nodes', None))
            result = service.spectrum(opr, top_count=index + 1)
            grid, values = service.eigenfunction(opr, index, grid)
            for x, v in zip(grid, values):
                table.add(x, v.real, v.imag, result.stability[index])
            summary = (f'eigenfunction {index} of Q_w({_fmt(z)}) for eigenvalue {_fmt(result.eigenvalues[index])} '
                       f'(stability {result.stability[index]:.1e})')
        return RunOutcome('eigenfun', summary, [table])

    # --- continuation ----------------------------------------------------------

    def run_continue(self):
        block = self.config.block('continue')
        contour = block.get('contour', {})
        service = ContinuationService(
            self.induced, eps=block.get('eps'), line_real_part=_float(contour, 'line_real_part', 0.5),
            t_max=contour.get('t_max'), points_per_unit=contour.get('points_per_unit'),
        )
        x = _float(block, 'x', 0.5)
        f = self.config.test_function(block.get('f', 'one'))
        path = _z_values({'z_path': block['z_path']} if 'z_path' in block else {}, default=[-4.0])
        values = service.continue_path(f, x, path)

        table = Table('continuation', ['z_re', 'z_im', 'q_re', 'q_im', 'tail_estimate'])
        lines = []
        for result in values:
            z = complex(result.z)
            table.add(z.real, z.imag, result.value.real, result.value.imag, result.tail_estimate)
            lines.append(f'(Q_w({_fmt(z)}) f)({x}) = {_fmt(result.value)} (tail {result.tail_estimate:.1e})')
        summary = f'continued (Q_w(z) f)({x}) at {len(values)} point(s), max tail {max(v.tail_estimate for v in values):.1e}'
        return RunOutcome('continue', summary, [table], lines=lines)

    # --- growth rates ------------------------------------------------------------

    def run_lambda(self):
        block = self.config.block('lambda')
        z = parse_complex(block.get('z', 1.0))
        m_max = _int(block, 'm_max', 3)
        grid = chebyshev_grid(_int(block, 'grid', 5))
        estimate = self.zeta.lambda_estimate(z, m_max, _int(block, 'cutoff', None), grid)

        table = Table('lambda', ['m', 'Lambda_m', 'root', 'ratio', 'tail'])
        for i, (value, root, tail) in enumerate(zip(estimate.values, estimate.roots, estimate.tails)):
            ratio = estimate.ratios[i - 1] if 0 < i <= len(estimate.ratios) else None
            table.add(i + 1, value, root, ratio, tail)
        bound = self.config.map_spec.induced_rho ** (-self.config.potential.smoothness_k) * estimate.estimate
        subm = all(estimate.submultiplicative.values())
        summary = (f'Lambda({_fmt(z)}) ~ {estimate.estimate:.10g}, essential radius bound {bound:.4g}, '
                   f'submultiplicative {"yes" if subm else "NO"}')
        imprecise = [f'm={i + 1}' for i, (value, tail) in enumerate(zip(estimate.values, estimate.tails))
                     if _imprecise(value, tail)]
        if imprecise:
            summary += f'; tail above 10% at {", ".join(imprecise)}'
        payload = {'estimate': estimate.estimate, 'essential_radius_bound': bound,
                   'submultiplicative': estimate.submultiplicative}
        return RunOutcome('lambda', summary, [table], payload=payload, precision_failures=imprecise)

    def run_pressure(self):
        block = self.config.block('pressure')
        which = block.get('which', 'T')
        estimate = self.zeta.pressure(which, _int(block, 'n_max', 14), _int(block, 'cutoff', None))
        table = Table('pressure', ['n', 'estimate', 'drift'])
        previous = None
        for n, value in enumerate(estimate.sequence, start=1):
            table.add(n, value, abs(value - previous) if previous is not None else None)
            previous = value
        summary = f'P_{estimate.which} ~ {estimate.value:.10g} at n={estimate.n_used} (drift {estimate.drift:.1e})'
        return RunOutcome('pressure', summary, [table])

    # --- cross-validation ---------------------------------------------------------

    def run_check(self):
        block = self.config.block('check')
        requested = block.get('suite', 'all')
        suites = list(CHECK_SUITES) if requested == 'all' else (
            [requested] if isinstance(requested, str) else list(requested)
        )
        unknown = [s for s in suites if s not in CHECK_SUITES]
        if unknown:
            raise ConfigError(f'Unknown check suite(s): {", ".join(unknown)}')

        table = Table('checks', ['suite', 'case', 'value', 'reference', 'difference', 'tolerance', 'status'])
        for suite in suites:
            getattr(self, f'_check_{suite.replace("-", "_")}')(table)
        statuses = [row[-1] for row in table.rows]
        failed = statuses.count('fail')
        lines = [f'{row[0]} [{row[1]}]: {row[-1]} (difference {format(row[4], ".2e") if row[4] is not None else "-"})'
                 for row in table.rows]
        summary = (f'{len(statuses)} check(s): {statuses.count("pass")} passed, {failed} failed, '
                   f'{statuses.count("skip")} skipped')
        return RunOutcome('check', summary, [table], lines=lines, passed=failed == 0)

    @staticmethod
    def _record(table, suite, case, value, reference, difference, tol):
        status = 'pass' if difference <= tol else 'fail'
        if status == 'fail':
            logger.warning(f'Check {suite} [{case}] failed: difference {difference:.2e} > {tol:.0e}')
        table.add(suite, case, value, reference, difference, tol, status)

    def _check_trace_vs_mollified(self, table):
        for m in (1, 2):
            for z in (0.5, 0.8, 0.5 + 0.3j):
                flat = self.zeta.flat_trace(z, m).value
                mollified = self.zeta.flat_trace_mollified(z, m).value
                difference = abs(flat - mollified) / max(abs(flat), 1e-300)
                self._record(table, 'trace-vs-mollified', f'm={m} z={_fmt(z)}', _fmt(flat), _fmt(mollified),
                             difference, TRACE_MOLLIFIED_TOL)

    def _check_zeta_relation(self, table):
        n_max = 6
        direct = self.zeta.zeta_T_direct(0.0, n_max).log_coeffs
        induced = self.zeta.log_zeta_coefficients_induced(n_max)
        for n in range(1, n_max + 1):
            difference = abs(direct[n] - induced[n]) / max(abs(direct[n]), 1e-300)
            self._record(table, 'zeta-relation', f'n={n}', direct[n], induced[n], difference, ZETA_RELATION_TOL)

    def _check_inducing_identity(self, table):
        grid = np.linspace(0.0, 1.0, 101)
        f = self.config.test_function('x(1-x)')
        residual = self.spectral.inducing_identity_residual(0.5, f, grid)
        self._record(table, 'inducing-identity', 'z=0.5 f=x(1-x)', residual, 0.0, residual, INDUCING_IDENTITY_TOL)

    def _check_continuation_overlap(self, table):
        service = ContinuationService(self.induced)
        z, x = 0.9 * np.exp(3j), 0.5
        f = self.config.test_function('cos')
        try:
            coeffs = service.coefficients_from_operator(f, x, N=OVERLAP_TERMS)
            continued = service.continue_Qw(f, x, z).value
        except UnsupportedOrderError as exc:
            logger.info(f'continuation-overlap skipped: {exc}')
            table.add('continuation-overlap', f'z={_fmt(z)}', None, None, None, OVERLAP_TOL, 'skip')
            return
        direct = complex(np.sum(coeffs * z ** np.arange(1, OVERLAP_TERMS + 1)))
        self._record(table, 'continuation-overlap', f'z={_fmt(z)}', _fmt(continued), _fmt(direct),
                     abs(continued - direct), OVERLAP_TOL)


def execute(config, subcommand, threads=1, out=None, write=True) -> RunOutcome:
    """
    Run one subcommand and write its result files

    Args:
        config: ExperimentConfig
        subcommand: one of SUBCOMMANDS
        threads: worker threads for word sums (results do not depend on it)
        out: base path overriding output.path
        write: False skips the files

    Returns:
        RunOutcome with the written paths
    """
    outcome = ExperimentRunner(config, threads).run(subcommand)
    if write:
        outcome.paths = write_outputs(config, subcommand, outcome.tables, outcome.summary, outcome.payload, out)
    return outcome


def run_safely(config, subcommand, threads=1, out=None) -> tuple:
    """execute() returning (outcome or None, exit code, error message)"""
    try:
        outcome = execute(config, subcommand, threads, out)
    except DynZetaError as exc:
        logger.error(f'{subcommand} failed: {exc}')
        return None, exit_code_for(exc), str(exc)
    return outcome, outcome.exit_code, None if outcome.exit_code == EXIT_OK else outcome.summary
