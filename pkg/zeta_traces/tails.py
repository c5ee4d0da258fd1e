"""
Truncation-tail models for shell sums sum_t A_t z^t.

Shell moduli B_t = |A_t| |z|^t are fitted on the last shells: log-linearly when
|z| e^{v(0)} < 1 (geometric shells), and by a short power-law expansion
t^-p, t^-(p+1) log t, t^-(p+1) on the boundary |z| e^{v(0)} = 1. The
correction is only added to the value when the phase of the discarded terms
is known; otherwise the tail is reported as a bound.

On the boundary of analytic maps whose branch sums have a closed integral tail
the words are truncated by letter instead, and the discarded words come from
operator traces (operator_tail).
"""
import logging
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.special import zeta as hurwitz_zeta

from .constants import (
    EXPONENT_SNAP, GEOMETRIC_EDGE, MODEL_GEOMETRIC, MODEL_NONE, MODEL_OPERATOR, MODEL_POWER,
    POWER_FIT_MAX_SHELLS,
)

logger = logging.getLogger(__name__)


@dataclass
class TailEstimate:
    """Fitted estimate of sum_{t > N} A_t z^t"""
    model: str
    correction: complex = 0.0
    bound: float = 0.0
    ratio: Optional[float] = None
    exponent: Optional[float] = None
    decreasing: bool = True
    applied: bool = False
    summable: bool = True

    @property
    def finite(self):
        return math.isfinite(self.bound)


def _log_sum_tail(k, N):
    """sum_{t > N} t^-k log t by the midpoint integral from N + 1/2"""
    x = N + 0.5
    return x ** (1.0 - k) * (math.log(x) / (k - 1.0) + 1.0 / (k - 1.0) ** 2)


def fit_tail(amplitudes, t_start, z, v0, shells=10):
    """
    Estimate the discarded part of sum_{t >= t_start} A_t z^t

    Args:
        amplitudes: real shell sums A_t for consecutive t starting at t_start
        t_start: total |beta| of amplitudes[0]
        z: complex series variable
        v0: v(0), selects the regime through |z| e^{v0}
        shells: number of trailing shells used by the geometric fit

    Returns:
        TailEstimate
    """
    amplitudes = np.asarray(amplitudes, dtype=float)
    n = len(amplitudes)
    modulus = abs(z)
    if n == 0 or modulus == 0.0:
        return TailEstimate(model=MODEL_NONE)

    totals = t_start + np.arange(n)
    N = int(totals[-1])
    phase = z / modulus
    with np.errstate(divide='ignore', under='ignore'):
        moduli = np.abs(amplitudes) * np.exp(totals * math.log(modulus))

    if moduli[-1] == 0.0:
        return TailEstimate(model=MODEL_NONE)

    window = min(shells, n)
    last = moduli[-window:]
    signs = np.sign(amplitudes[-window:])
    decreasing = bool(np.all(np.diff(last) <= 0.0))
    same_sign = bool(np.all(signs == signs[-1]))

    if window < 3 or np.any(last <= 0.0):
        bound = float(moduli[-1]) * max(1.0, float(N))
        return TailEstimate(model=MODEL_NONE, bound=bound, decreasing=decreasing)

    if modulus * math.exp(v0) < GEOMETRIC_EDGE:
        return _geometric_tail(last, totals[-window:], moduli[-1] * np.sign(amplitudes[-1]), phase, N,
                               decreasing, same_sign)
    return _power_tail(moduli, amplitudes, totals, phase, N, window, decreasing, same_sign)


def _geometric_tail(last, totals, signed_last, phase, N, decreasing, same_sign):
    slope = np.polyfit(totals, np.log(last), 1)[0]
    ratio = float(math.exp(slope))
    if ratio >= 1.0:
        logger.warning(f'Shell moduli are not decaying (fitted ratio {ratio:.4f} at N={N})')
        return TailEstimate(model=MODEL_GEOMETRIC, bound=math.inf, ratio=ratio, decreasing=False, summable=False)

    q = ratio * phase
    correction = complex(signed_last * phase ** N * q / (1.0 - q))
    bound = abs(last[-1]) * ratio / (1.0 - ratio)
    return TailEstimate(
        model=MODEL_GEOMETRIC, correction=correction if same_sign else 0.0, bound=float(bound),
        ratio=ratio, decreasing=decreasing, applied=same_sign,
    )


def _power_tail(moduli, amplitudes, totals, phase, N, window, decreasing, same_sign):
    tail_t = totals[-window:].astype(float)
    slope = np.polyfit(np.log(tail_t), np.log(moduli[-window:]), 1)[0]
    p = -float(slope)
    if abs(p - round(p)) < EXPONENT_SNAP:
        p = float(round(p))
    if p <= 1.0:
        logger.warning(f'Shell moduli behave like t^{-p:+.2f}: the series is not summable')
        return TailEstimate(model=MODEL_POWER, bound=math.inf, exponent=p, decreasing=decreasing, summable=False)

    fit_len = min(POWER_FIT_MAX_SHELLS, max(window, len(totals) // 3))
    t = totals[-fit_len:].astype(float)
    basis = np.column_stack([t ** -p, t ** -(p + 1) * np.log(t), t ** -(p + 1)])
    if fit_len < basis.shape[1] + 2:
        basis = basis[:, :1]
    coeffs, *_ = np.linalg.lstsq(basis, moduli[-fit_len:], rcond=None)

    sums = [float(hurwitz_zeta(p, N + 1)), _log_sum_tail(p + 1, N), float(hurwitz_zeta(p + 1, N + 1))]
    magnitude = float(sum(c * s for c, s in zip(coeffs, sums)))
    if magnitude <= 0.0:
        magnitude = float(moduli[-1]) * N / (p - 1.0)

    applied = same_sign and phase == 1.0
    correction = magnitude * float(np.sign(amplitudes[-1])) if applied else 0.0
    return TailEstimate(
        model=MODEL_POWER, correction=complex(correction), bound=abs(magnitude), exponent=p,
        decreasing=decreasing, applied=applied,
    )


def operator_tail(box_sum, box_trace, full_trace, refined_trace):
    """
    Tail of a flat trace taken from traces of collocation matrix powers

    The words with a letter above the box are the difference between the
    trace of the full operator and the trace of the operator restricted to the
    box letters. The bound is the disagreement between the box word sum and the
    restricted trace plus the change of the full trace on a finer node set.

    Args:
        box_sum: sum over the words whose letters all lie in the box
        box_trace: trace of the restricted collocation matrix power
        full_trace: trace of the full collocation matrix power
        refined_trace: full_trace on more nodes

    Returns:
        TailEstimate with the correction applied
    """
    correction = complex(full_trace - box_trace)
    bound = abs(box_sum - box_trace) + abs(refined_trace - full_trace)
    return TailEstimate(model=MODEL_OPERATOR, correction=correction, bound=float(bound), applied=True)
