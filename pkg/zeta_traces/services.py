import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, List, Optional

import numpy as np
from django.conf import settings
from numpy.polynomial import polynomial as P
from scipy.special import logsumexp

from induced_map.services import chebyshev_grid
from interval_maps.exceptions import DomainError, PoleError
from periodic_orbits.services import PeriodicOrbitService
from periodic_orbits.words import iter_shell, shell_size

from .constants import (
    BOX_MAX_WORDS, CHUNK_WORDS, DET_RELIABLE_MARGIN, KIND_GRID, KIND_PERIODIC, KIND_TRACE,
    KIND_TRACE_GEOMETRIC, POLE_DISTANCE, PRECISION_WARNING_FRACTION,
    PRESSURE_T_RECOMMENDED, SOURCE_GEOMETRIC, SOURCE_W, ZETA_T_MAX_PERIOD,
)
from .mollified import MollifiedTrace
from .tails import TailEstimate, fit_tail, operator_tail

logger = logging.getLogger(__name__)

LAMBDA_GRID_POINTS = 5
LAMBDA_MAX_ROWS = 500_000
OPERATOR_EXTRA_NODES = 6
TRACE_PRECISION = 'trace precision'


@dataclass
class ShellSum:
    """Partial sum over shells |beta| = m..cutoff_N with its fitted tail"""
    m: int
    z: complex
    partial: complex
    tail: TailEstimate
    cutoff_N: int
    words: int
    stop_reason: str
    amplitudes: list = field(default_factory=list, repr=False)
    argmax_x: Optional[float] = None

    @property
    def value(self):
        return self.partial + self.tail.correction


@dataclass
class TraceResult:
    z: complex
    m: int
    value: complex
    partial: complex
    tail: float
    cutoff_N: int
    source: str = SOURCE_W
    precision_warning: bool = False
    outside_domain: bool = False


@dataclass
class TraceSeries:
    """Flat traces tr((Q(z))^m) for m = 1..m_max"""
    z: complex
    m_max: int
    traces: np.ndarray
    tails: np.ndarray
    cutoff_N: int
    source: str = SOURCE_W
    results: List[TraceResult] = field(default_factory=list, repr=False)


@dataclass
class DetSeries:
    """u-coefficients d_0 = 1, d_1, ..., d_M of the flat determinant"""
    z: complex
    coeffs: np.ndarray
    source: str = SOURCE_W
    reliable_radius: Optional[float] = None
    flagged_orders: List[int] = field(default_factory=list)

    @property
    def precision_warning(self):
        return bool(self.flagged_orders)

    @property
    def order(self):
        return len(self.coeffs) - 1

    def evaluate(self, u):
        return complex(P.polyval(complex(u), self.coeffs))


@dataclass
class DetZero:
    found: bool
    u: Optional[complex] = None
    residual: Optional[float] = None
    iterations: int = 0
    reason: str = ''


@dataclass
class PressureEstimate:
    value: float
    n_used: int
    sequence: np.ndarray
    which: str = 'T'

    @property
    def drift(self):
        if len(self.sequence) < 2:
            return math.nan
        return float(abs(self.sequence[-1] - self.sequence[-2]))


@dataclass
class LambdaSummary:
    """Lambda_m(z) for m = 1..m_max and the growth-rate estimate Lambda(z)"""
    z: complex
    estimate: float
    values: List[float]
    tails: List[float]
    roots: List[float]
    ratios: List[float]
    submultiplicative: Dict[str, bool]


@dataclass
class DirectZeta:
    log_coeffs: np.ndarray
    value: complex


@dataclass
class ZetaValue:
    """Zeta value from word sums with the bound propagated from the shell tails"""
    z: complex
    value: complex
    tail: float
    m_max: int


def _weighted_partial(amplitudes, t_start, z):
    """Ordered compensated sum of A_t z^t, real and imaginary parts separately"""
    totals = t_start + np.arange(len(amplitudes))
    with np.errstate(under='ignore', over='ignore', invalid='ignore'):
        terms = np.asarray(amplitudes, dtype=float) * np.power(complex(z), totals)
    return complex(math.fsum(terms.real), math.fsum(terms.imag))


def _compensated(chunks):
    values = np.concatenate(chunks)
    if values.ndim == 1:
        return math.fsum(values)
    return np.array([math.fsum(column) for column in values.T])


class ZetaService:
    """
    Flat traces, flat determinants and zeta functions built from word shells

    All infinite sums over words beta are organized by the total |beta|: each
    shell is summed with math.fsum, shells are accumulated in order, and the
    discarded shells are estimated by zeta_traces.tails.fit_tail.
    """

    def __init__(self, induced, threads=1, max_cutoff=None, tail_rel_tol=None, tail_shells=None,
                 max_words=None, orbits=None):
        self.induced = induced
        self.orbits = orbits or PeriodicOrbitService(induced)
        self.threads = max(1, int(threads))
        self.max_cutoff = max_cutoff or settings.DYNZETA_MAX_CUTOFF
        self.tail_rel_tol = tail_rel_tol if tail_rel_tol is not None else settings.DYNZETA_TAIL_REL_TOL
        self.tail_shells = tail_shells or settings.DYNZETA_TAIL_SHELLS
        self.max_words = max_words or settings.DYNZETA_MAX_WORDS
        self._spectral = None
        self._operators = {}

    @property
    def v0(self):
        return self.induced.potential.v0_at_zero

    # --- shell machinery --------------------------------------------------

    def _word_values(self, words, kind, grid=None):
        if kind == KIND_GRID:
            count, points = words.shape[0], grid.size
            _, log_w = self.induced.word_batch(np.repeat(words, points, axis=0), np.tile(grid, count))
            return np.exp(log_w).reshape(count, points)

        batch = self.orbits.fixed_points(words)
        weight = np.exp(batch.logW)
        if kind == KIND_PERIODIC:
            return weight
        denominator = 1.0 - batch.deriv_phi
        if kind == KIND_TRACE_GEOMETRIC:
            # e^{w}/G' at the fixed point is W times the signed phi_beta'
            return weight * batch.deriv_phi / denominator
        return weight / denominator

    def _group_sums(self, m, totals, kind, grid):
        parts = {t: [] for t in totals}
        pending, owners = [], []

        def flush():
            values = self._word_values(np.vstack(pending), kind, grid)
            start = 0
            for t, count in owners:
                parts[t].append(values[start:start + count])
                start += count
            pending.clear()
            owners.clear()

        size = 0
        for t in totals:
            for block in iter_shell(t, m, chunk_size=CHUNK_WORDS):
                pending.append(block)
                owners.append((t, block.shape[0]))
                size += block.shape[0]
                if size >= CHUNK_WORDS:
                    flush()
                    size = 0
        if pending:
            flush()
        return [_compensated(parts[t]) for t in totals]

    def _shell_sums(self, m, totals, kind, grid=None):
        """Shell sums A_t for the given totals, in order"""
        groups, current, size = [], [], 0
        for t in totals:
            current.append(t)
            size += shell_size(t, m)
            if size >= CHUNK_WORDS:
                groups.append(current)
                current, size = [], 0
        if current:
            groups.append(current)

        if self.threads > 1 and len(groups) > 1:
            with ThreadPoolExecutor(max_workers=self.threads) as pool:
                results = list(pool.map(lambda group: self._group_sums(m, group, kind, grid), groups))
        else:
            results = [self._group_sums(m, group, kind, grid) for group in groups]
        return [amplitude for group in results for amplitude in group]

    def _close(self, m, z, amplitudes, grid):
        amplitudes = np.array(amplitudes)
        argmax_x = None
        if amplitudes.ndim == 2:
            partials = [_weighted_partial(amplitudes[:, j], m, z) for j in range(amplitudes.shape[1])]
            column = int(np.argmax([p.real for p in partials]))
            partial, series, argmax_x = partials[column], amplitudes[:, column], float(grid[column])
        else:
            partial, series = _weighted_partial(amplitudes, m, z), amplitudes
        tail = fit_tail(series, m, z, self.v0, shells=self.tail_shells)
        return partial, tail, argmax_x

    def shell_series(self, m, z, kind=KIND_TRACE, cutoff_N=None, grid=None):
        """
        Sum of z^{|beta|} f(beta) over words of length m, shell by shell

        Args:
            m: word length (>= 1)
            z: series variable
            kind: per-word quantity (trace, signed geometric trace, periodic weight, grid weights)
            cutoff_N: largest total summed; None chooses it adaptively
            grid: x points for grid weights

        Returns:
            ShellSum
        """
        if m < 1:
            raise DomainError(f'Word length must be >= 1, got {m}')
        fixed = cutoff_N is not None
        cap = int(cutoff_N) if fixed else self.max_cutoff
        if cap < m:
            raise DomainError(f'cutoff_N={cap} is below the word length m={m}')
        if z == 0:
            return ShellSum(m=m, z=z, partial=0j, tail=TailEstimate(model='none'), cutoff_N=m, words=0,
                            stop_reason='z=0')

        amplitudes, words, t_next = [], 0, m
        step, reason = self.tail_shells, 'cutoff'
        while t_next <= cap:
            t_hi = cap if fixed else min(cap, t_next + step - 1)
            count = sum(shell_size(t, m) for t in range(t_next, t_hi + 1))
            while not fixed and t_hi >= t_next and words + count > self.max_words:
                count -= shell_size(t_hi, m)
                t_hi -= 1
            if t_hi < t_next:
                reason = 'word budget'
                logger.info(f'm={m}: word budget of {self.max_words} reached at total {t_next - 1}')
                break
            amplitudes.extend(self._shell_sums(m, list(range(t_next, t_hi + 1)), kind, grid))
            words += count
            t_next = t_hi + 1
            if fixed:
                break
            if len(amplitudes) >= self.tail_shells:
                partial, tail, _ = self._close(m, z, amplitudes, grid)
                if tail.finite and tail.bound <= self.tail_rel_tol * abs(partial):
                    reason = 'converged'
                    break
            step = max(self.tail_shells, len(amplitudes) // 2)

        partial, tail, argmax_x = self._close(m, z, amplitudes, grid)
        if not tail.decreasing:
            logger.warning(f'm={m}, z={z}: trailing shells are not decreasing, tail is unreliable')
        logger.debug(f'm={m}, z={z}: {words} words up to total {t_next - 1} ({reason}), tail {tail.bound:.2e}')
        return ShellSum(
            m=m, z=z, partial=partial, tail=tail, cutoff_N=t_next - 1, words=words, stop_reason=reason,
            amplitudes=amplitudes, argmax_x=argmax_x,
        )

    # --- letter box with operator tail ------------------------------------

    @property
    def spectral(self):
        if self._spectral is None:
            from spectral.services import SpectralService
            self._spectral = SpectralService(self.induced, zeta=self)
        return self._spectral

    def operator_tail_applies(self, z, source=SOURCE_W):
        """True when flat traces at z take their tail from collocation traces"""
        return (source == SOURCE_W and self.induced.potential.q > 0.5
                and self.spectral.integral_tail_applies(z))

    def _power_trace(self, z, m, N_nodes, branch_cutoff, branch_tail):
        key = (complex(z), N_nodes, branch_cutoff, branch_tail)
        if key not in self._operators:
            self._operators[key] = self.spectral.collocation_matrix(
                z, N_nodes, branch_cutoff, branch_tail=branch_tail,
            )
        return self._operators[key].power_trace(m)

    def box_letter(self, m):
        """Largest letter L with L^m <= BOX_MAX_WORDS, capped by DYNZETA_BRANCH_CUTOFF"""
        letter = 1
        while letter < settings.DYNZETA_BRANCH_CUTOFF and (letter + 1) ** m <= BOX_MAX_WORDS:
            letter += 1
        return letter

    def box_series(self, m, z):
        """
        Flat trace sum over words with every letter <= L plus the operator tail

        The words are summed one by one. The words with some letter above L
        are the trace of the collocation matrix power of Q_w(z) minus that of
        the operator keeping the branches 1..L (zeta_traces.tails.operator_tail).

        Args:
            m: word length (>= 1)
            z: series variable with z e^{v(0)} = 1

        Returns:
            ShellSum whose cutoff_N is the largest letter L
        """
        if m < 1:
            raise DomainError(f'Word length must be >= 1, got {m}')
        letter = self.box_letter(m)
        count = letter ** m
        index = np.arange(count)
        chunks = []
        for start in range(0, count, CHUNK_WORDS):
            rows = index[start:start + CHUNK_WORDS]
            words = np.stack(np.unravel_index(rows, (letter,) * m), axis=1).astype(np.int64) + 1
            values = self._word_values(words, KIND_TRACE)
            with np.errstate(under='ignore', over='ignore'):
                chunks.append(values * np.power(complex(z), words.sum(axis=1)))
        terms = np.concatenate(chunks)
        box_sum = complex(math.fsum(terms.real), math.fsum(terms.imag))

        nodes = settings.DYNZETA_CHEB_NODES
        tail = operator_tail(
            box_sum,
            self._power_trace(z, m, nodes, letter, False),
            self._power_trace(z, m, nodes, None, True),
            self._power_trace(z, m, nodes + OPERATOR_EXTRA_NODES, None, True),
        )
        logger.debug(f'm={m}, z={z}: {count} words with letters <= {letter}, operator tail '
                     f'{tail.correction:.6g} (uncertainty {tail.bound:.1e})')
        return ShellSum(m=m, z=z, partial=box_sum, tail=tail, cutoff_N=letter, words=count, stop_reason='box')

    # --- flat traces and determinants -----------------------------------

    def outside_domain(self, z):
        modulus = abs(z)
        return modulus > 1.0 or modulus * math.exp(self.v0) > 1.0

    def flat_trace(self, z, m, cutoff_N=None, source=SOURCE_W):
        """
        Flat trace of (Q(z))^m from the fixed points of the word branches

        Args:
            z: complex series variable
            m: power (>= 1)
            cutoff_N: largest |beta|; None chooses it adaptively, switching to box_series
                where operator_tail_applies
            source: SOURCE_W for Q_w(z), SOURCE_GEOMETRIC for Q_{w - log G'}(z)

        Returns:
            TraceResult with the tail-corrected value and the tail bound
        """
        kind = KIND_TRACE_GEOMETRIC if source == SOURCE_GEOMETRIC else KIND_TRACE
        outside = self.outside_domain(z)
        if outside:
            logger.warning(f'z={z} lies outside the guaranteed domain; trace is reported but flagged')
        if cutoff_N is None and z != 0 and self.operator_tail_applies(z, source):
            result = self.box_series(m, z)
        else:
            result = self.shell_series(m, z, kind, cutoff_N)
        value = result.value
        warning = (not result.tail.finite) or result.tail.bound > PRECISION_WARNING_FRACTION * abs(value)
        if warning and z != 0:
            logger.warning(f'flat_trace(m={m}, z={z}): tail {result.tail.bound:.2e} exceeds 10% of |value|')
        return TraceResult(
            z=z, m=m, value=value, partial=result.partial, tail=result.tail.bound, cutoff_N=result.cutoff_N,
            source=source, precision_warning=bool(warning and z != 0), outside_domain=outside,
        )

    def trace_series(self, z, m_max, cutoff_N=None, source=SOURCE_W):
        results = [self.flat_trace(z, m, cutoff_N, source) for m in range(1, m_max + 1)]
        return TraceSeries(
            z=z, m_max=m_max, traces=np.array([r.value for r in results], dtype=complex),
            tails=np.array([r.tail for r in results]), cutoff_N=max(r.cutoff_N for r in results),
            source=source, results=results,
        )

    def det_series(self, traces, reliable_radius=None):
        """
        u-coefficients of exp(-sum_m u^m/m tr_m) by d_M = -(1/M) sum_m tr_m d_{M-m}

        Args:
            traces: TraceSeries
            reliable_radius: radius of the disc where zeros are trusted

        Returns:
            DetSeries
        """
        tr = np.asarray(traces.traces, dtype=complex)
        order = len(tr)
        coeffs = np.zeros(order + 1, dtype=complex)
        coeffs[0] = 1.0
        for n in range(1, order + 1):
            coeffs[n] = -np.sum(tr[:n] * coeffs[n - 1::-1][:n]) / n
        flagged = [r.m for r in traces.results if r.precision_warning]
        if flagged:
            logger.warning(f'det_series at z={traces.z}: traces of order {flagged} carry precision warnings')
        return DetSeries(z=traces.z, coeffs=coeffs, source=traces.source, reliable_radius=reliable_radius,
                         flagged_orders=flagged)

    def determinant(self, z, M, cutoff_N=None, source=SOURCE_W, k=None):
        """Flat determinant of Q(z) to order M with its reliable disc attached"""
        traces = self.trace_series(z, M, cutoff_N, source)
        return self.det_series(traces, reliable_radius=self.reliable_radius(z, k))

    def det_zero(self, det, u0, tol=1e-12, maxiter=100):
        """
        Newton iteration on the truncated determinant polynomial

        Args:
            det: DetSeries
            u0: starting point
            tol: step and residual tolerance
            maxiter: iteration budget

        Returns:
            DetZero, with found=False when a trace behind det carries a precision warning,
            when Newton diverges or when it leaves the reliable disc
        """
        if det.precision_warning:
            return DetZero(found=False, reason=TRACE_PRECISION)
        radius = det.reliable_radius
        if radius is not None and abs(u0) > radius:
            return DetZero(found=False, reason=f'start {u0} outside reliable disc {radius:.4g}')

        coeffs = np.asarray(det.coeffs, dtype=complex)
        derivative = P.polyder(coeffs)
        u = complex(u0)
        for iteration in range(1, maxiter + 1):
            slope = P.polyval(u, derivative)
            if slope == 0:
                return DetZero(found=False, u=u, iterations=iteration, reason='vanishing derivative')
            step = P.polyval(u, coeffs) / slope
            u -= step
            if not np.isfinite(u):
                return DetZero(found=False, iterations=iteration, reason='Newton diverged')
            if abs(step) <= tol * max(1.0, abs(u)):
                break
        else:
            return DetZero(found=False, u=u, iterations=maxiter, reason='Newton budget exhausted')

        scale = float(np.sum(np.abs(coeffs) * np.abs(u) ** np.arange(len(coeffs))))
        residual = abs(P.polyval(u, coeffs))
        if radius is not None and abs(u) > radius:
            return DetZero(found=False, u=u, residual=residual, iterations=iteration,
                           reason=f'zero outside reliable disc {radius:.4g}')
        if residual > tol * max(1.0, scale):
            return DetZero(found=False, u=u, residual=residual, iterations=iteration, reason='residual above tol')
        return DetZero(found=True, u=u, residual=residual, iterations=iteration)

    def det_zeros(self, det, tol=1e-12):
        """All zeros of the truncated determinant in its reliable disc, by increasing modulus"""
        zeros = []
        for start in sorted(P.polyroots(det.coeffs), key=abs):
            found = self.det_zero(det, start, tol=tol)
            if found.found and all(abs(found.u - other.u) > 1e-8 for other in zeros):
                zeros.append(found)
        return zeros

    def reliable_radius(self, z, k=None, m_max=2):
        """0.8 sigma(z)^(-1/2) with sigma(z) = rho_G^-(k-1) Lambda(z)"""
        k = k or settings.DYNZETA_DET_SMOOTHNESS
        lam = self.lambda_estimate(z, m_max=m_max).estimate
        if lam <= 0.0:
            return math.inf
        sigma = self.induced.map.induced_rho ** (-(k - 1)) * lam
        return DET_RELIABLE_MARGIN / math.sqrt(sigma)

    # --- zeta functions ---------------------------------------------------

    def zeta_T_direct(self, z, n_max):
        """
        Dynamical zeta function of T from its periodic points

        Args:
            z: complex variable
            n_max: largest period used (<= 20)

        Returns:
            DirectZeta with log_coeffs[n] = (1/n) sum_{T^n x = x} e^{S_n v(x)} (log_coeffs[0] = 0)
        """
        if n_max < 1 or n_max > ZETA_T_MAX_PERIOD:
            raise DomainError(f'n_max must lie in [1, {ZETA_T_MAX_PERIOD}], got {n_max}')
        log_coeffs = np.zeros(n_max + 1)
        for n in range(1, n_max + 1):
            _, _, log_w = self.orbits.t_periodic_arrays(n)
            log_coeffs[n] = math.fsum(np.exp(log_w)) / n
        series = _weighted_partial(log_coeffs[1:], 1, z) if z != 0 else 0j
        return DirectZeta(log_coeffs=log_coeffs, value=complex(np.exp(series)))

    def log_Z_terms(self, z, m_max, cutoff_N=None):
        """Periodic sums S_m(z) = sum_{beta in N^m} z^{|beta|} W_beta(x_beta) for m = 1..m_max"""
        return [self.shell_series(m, z, KIND_PERIODIC, cutoff_N) for m in range(1, m_max + 1)]

    def Z_two_var(self, z, u, m_max, cutoff_N=None, method='words'):
        """
        Two-variable zeta function Z_w(z, u)

        Args:
            z, u: complex variables
            m_max: number of u-orders (words) or determinant order (ratio)
            cutoff_N: largest |beta|
            method: 'words' sums exp(sum_m u^m/m S_m(z)); 'ratio' evaluates
                det(1 - u Q_{w - log G'}(z)) / det(1 - u Q_w(z))

        Returns:
            complex
        """
        if u == 0 or z == 0:
            return 1.0 + 0j
        if method == 'ratio':
            numerator = self.det_series(self.trace_series(z, m_max, cutoff_N, SOURCE_GEOMETRIC))
            denominator = self.det_series(self.trace_series(z, m_max, cutoff_N, SOURCE_W))
            return numerator.evaluate(u) / denominator.evaluate(u)
        exponent, _ = self._log_Z(z, u, m_max, cutoff_N)
        return complex(np.exp(exponent))

    def _log_Z(self, z, u, m_max, cutoff_N):
        """sum_m u^m/m S_m(z) and the sum of |u|^m/m times the shell tail bounds"""
        sums = self.log_Z_terms(z, m_max, cutoff_N)
        terms = [u ** s.m / s.m * s.value for s in sums]
        exponent = complex(math.fsum(t.real for t in terms), math.fsum(t.imag for t in terms))
        tail = math.fsum(abs(u) ** s.m / s.m * s.tail.bound for s in sums)
        return exponent, tail

    def zeta_G(self, u, m_max, cutoff_N=None):
        """zeta_{G,w}(u) = Z_w(1, u)"""
        return self.Z_two_var(1.0, u, m_max, cutoff_N)

    def zeta_via_relation(self, z, m_max, cutoff_N=None):
        """
        zeta_{T,v}(z) = (1 - z e^{v(0)})^{-1} Z_w(z, 1)

        Raises:
            PoleError: when |1 - z e^{v(0)}| < 1e-8
        """
        return self.zeta_relation(z, m_max, cutoff_N).value

    def zeta_relation(self, z, m_max, cutoff_N=None):
        """zeta_via_relation with the tail bound |zeta| sum_m tail_m / m of the word sums"""
        gap = 1.0 - z * math.exp(self.v0)
        if abs(gap) < POLE_DISTANCE:
            logger.error(f'zeta_via_relation: z={z} is within {POLE_DISTANCE} of the pole e^-v(0)')
            raise PoleError(f'z={z} is too close to the pole at {math.exp(-self.v0):.12g}')
        if z == 0:
            return ZetaValue(z=z, value=1.0 + 0j, tail=0.0, m_max=m_max)
        exponent, tail = self._log_Z(z, 1.0, m_max, cutoff_N)
        value = complex(np.exp(exponent)) / gap
        return ZetaValue(z=z, value=value, tail=abs(value) * tail, m_max=m_max)

    def log_zeta_coefficients_induced(self, n_max):
        """
        z-coefficients of log((1 - z e^{v(0)})^-1 Z_w(z, 1)) from the finite shells |beta| = n

        Returns:
            array with entry n = e^{n v(0)}/n + sum_{m <= n} (1/m) sum_{|beta| = n, beta in N^m} W_beta(x_beta)
        """
        coeffs = np.zeros(n_max + 1)
        for n in range(1, n_max + 1):
            terms = [math.exp(n * self.v0) / n]
            for m in range(1, n + 1):
                terms.append(self._shell_sums(m, [n], KIND_PERIODIC)[0] / m)
            coeffs[n] = math.fsum(terms)
        return coeffs

    # --- Lambda and pressure ----------------------------------------------

    def _lambda_cutoff(self, m, points):
        """Largest total up to DYNZETA_BRANCH_CUTOFF keeping the word-grid rows bounded"""
        cutoff = settings.DYNZETA_BRANCH_CUTOFF
        while cutoff > m and math.comb(cutoff, m) * points > LAMBDA_MAX_ROWS:
            cutoff -= 1
        return max(cutoff, m)

    def lambda_m(self, z, m, cutoff_N=None, grid=None):
        """
        Lambda_m(z) = sup_x sum_{beta in N^m} |z|^{|beta|} W_beta(x) on a grid

        Args:
            z: complex, only |z| enters
            m: word length (>= 1)
            cutoff_N: largest |beta|; the default keeps the word-grid evaluation bounded
            grid: x points (default: 5 Chebyshev points)

        Returns:
            ShellSum whose value is the grid supremum and whose argmax_x locates it
        """
        grid = chebyshev_grid(LAMBDA_GRID_POINTS) if grid is None else np.asarray(grid, dtype=float)
        modulus = abs(z)
        cutoff_N = cutoff_N or self._lambda_cutoff(m, grid.size)
        return self.shell_series(m, modulus, KIND_GRID, cutoff_N, grid)

    def lambda_estimate(self, z, m_max=3, cutoff_N=None, grid=None):
        """
        Growth rate Lambda(z) from the ratios Lambda_m / Lambda_{m-1}

        Aitken's delta-squared acceleration is applied when three ratios exist.
        Submultiplicativity Lambda_{a+b} <= Lambda_a Lambda_b is checked within tails.
        """
        sums = [self.lambda_m(z, m, cutoff_N, grid) for m in range(1, m_max + 1)]
        values = [float(s.value.real) for s in sums]
        tails = [float(s.tail.bound) for s in sums]
        roots = [v ** (1.0 / (i + 1)) if v > 0 else 0.0 for i, v in enumerate(values)]
        ratios = [values[i] / values[i - 1] for i in range(1, len(values)) if values[i - 1] > 0]

        estimate = ratios[-1] if ratios else values[0]
        if len(ratios) >= 3:
            r0, r1, r2 = ratios[-3:]
            denominator = r2 - 2 * r1 + r0
            if abs(denominator) > 1e-14:
                accelerated = r2 - (r2 - r1) ** 2 / denominator
                if abs(accelerated - r2) <= 10 * abs(r2 - r1):
                    estimate = accelerated

        checks = {}
        for a in range(1, m_max + 1):
            for b in range(a, m_max + 1 - a):
                joined = values[a + b - 1]
                allowance = tails[a + b - 1] + values[a - 1] * tails[b - 1] + values[b - 1] * tails[a - 1]
                checks[f'{a}+{b}'] = joined <= values[a - 1] * values[b - 1] + allowance + 1e-12 * joined
        if not all(checks.values()):
            logger.warning(f'Lambda_m({z}) violates submultiplicativity beyond tails: {checks}')
        return LambdaSummary(z=z, estimate=float(estimate), values=values, tails=tails, roots=roots,
                             ratios=ratios, submultiplicative=checks)

    def pressure(self, which='T', n_max=14, cutoff_N=None):
        """
        Pressure from periodic sums

        Args:
            which: 'T' for sum over T^n x = x, 'G' for words of length m at z = 1
            n_max: largest period (T) or word length (G)
            cutoff_N: largest |beta| for G

        Returns:
            PressureEstimate whose value is the last entry of the sequence
        """
        which = str(which).upper()
        sequence = []
        if which == 'T':
            if n_max > ZETA_T_MAX_PERIOD:
                raise DomainError(f'Pressure of T limited to n_max <= {ZETA_T_MAX_PERIOD}, got {n_max}')
            if n_max > PRESSURE_T_RECOMMENDED:
                logger.warning(f'n_max={n_max} enumerates 2^{n_max} itineraries per period')
            for n in range(1, n_max + 1):
                _, _, log_w = self.orbits.t_periodic_arrays(n)
                sequence.append(float(logsumexp(log_w)) / n)
        elif which == 'G':
            for s in self.log_Z_terms(1.0, n_max, cutoff_N):
                sequence.append(math.log(s.value.real) / s.m)
        else:
            raise DomainError(f"Pressure is defined for 'T' or 'G', got {which!r}")
        sequence = np.array(sequence)
        estimate = PressureEstimate(value=float(sequence[-1]), n_used=n_max, sequence=sequence, which=which)
        logger.info(f'P_{which} ~ {estimate.value:.6f} at n={n_max} (drift {estimate.drift:.2e})')
        return estimate

    def flat_trace_mollified(self, z, m, eps=1e-3, quad_points=64, cutoff_N=None, richardson=True):
        return MollifiedTrace(self, quad_points=quad_points).evaluate(z, m, eps, cutoff_N, richardson)
