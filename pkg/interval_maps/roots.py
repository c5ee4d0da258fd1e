"""
Root finding for monotone branches.

Scalar solves go through scipy's brentq followed by one Newton polish; array
solves use a vectorized safeguarded Newton-bisection iteration that keeps a
bracket per entry and falls back to bisection whenever the Newton step leaves it.
"""
import logging

import numpy as np
from scipy.optimize import brentq

from .exceptions import ConvergenceError

logger = logging.getLogger(__name__)

_EPS = np.finfo(float).eps


def solve_monotone(func, target, lo, hi, tol=1e-14, maxiter=200, derivative=None):
    """
    Solve func(x) = target for x in [lo, hi] with func monotone

    Args:
        func: scalar callable, monotone on [lo, hi]
        target: value to hit
        lo, hi: bracketing interval
        tol: residual tolerance |func(x) - target|
        maxiter: brentq iteration budget
        derivative: optional callable for the Newton polish

    Returns:
        float root x
    """
    g_lo = func(lo) - target
    g_hi = func(hi) - target
    if g_lo == 0.0:
        return float(lo)
    if g_hi == 0.0:
        return float(hi)
    if np.sign(g_lo) == np.sign(g_hi):
        raise ConvergenceError(
            f'Target {target!r} is not bracketed by [{lo}, {hi}]',
            bracket=(lo, hi),
        )

    # Absolute step small relative to the root scale, so tiny targets keep full relative precision
    xtol = max(1e-300, 1e-3 * tol * min(1.0, abs(target)))
    x, info = brentq(
        lambda t: func(t) - target, lo, hi,
        xtol=xtol, rtol=4 * _EPS, maxiter=maxiter, full_output=True, disp=False,
    )
    if not info.converged:
        raise ConvergenceError(
            f'brentq did not converge for target {target!r} ({info.flag})',
            bracket=(lo, hi), last_iterate=x,
        )

    residual = func(x) - target
    if derivative is not None and residual != 0.0:
        slope = derivative(x)
        if slope != 0.0:
            polished = x - residual / slope
            if lo <= polished <= hi:
                polished_residual = func(polished) - target
                if abs(polished_residual) <= abs(residual):
                    x, residual = polished, polished_residual

    if abs(residual) > tol:
        raise ConvergenceError(
            f'Residual {abs(residual):.3e} above tolerance {tol:.1e} for target {target!r}',
            bracket=(lo, hi), last_iterate=x,
        )
    return float(x)


def newton_bisection(func, target, lo, hi, tol=1e-14, maxiter=200):
    """
    Vectorized safeguarded Newton-bisection for monotone functions

    Args:
        func: callable returning (values, derivatives) for an array argument
        target: array of values to hit (broadcast against lo/hi)
        lo, hi: bracket endpoints (scalars or arrays)
        tol: residual tolerance
        maxiter: iteration budget

    Returns:
        ndarray of roots with the broadcast shape of the inputs
    """
    target = np.asarray(target, dtype=float)
    shape = np.broadcast_shapes(target.shape, np.shape(lo), np.shape(hi))
    target = np.broadcast_to(target, shape)
    lo = np.array(np.broadcast_to(lo, shape), dtype=float)
    hi = np.array(np.broadcast_to(hi, shape), dtype=float)

    f_lo, _ = func(lo)
    f_hi, _ = func(hi)
    # Orient every entry so that g is increasing
    orientation = np.where(f_hi >= f_lo, 1.0, -1.0)

    x = 0.5 * (lo + hi)
    for iteration in range(maxiter):
        f, df = func(x)
        g = orientation * (f - target)
        dg = orientation * df
        done = (np.abs(g) <= tol) | (hi - lo <= 4 * _EPS * np.maximum(np.abs(x), 1e-300))
        if np.all(done):
            return x
        lo = np.where(g < 0, x, lo)
        hi = np.where(g > 0, x, hi)
        with np.errstate(divide='ignore', invalid='ignore'):
            newton = x - g / dg
        inside = np.isfinite(newton) & (newton > lo) & (newton < hi)
        step = np.where(inside, newton, 0.5 * (lo + hi))
        x = np.where(done, x, step)

    f, _ = func(x)
    worst = float(np.max(np.abs(f - target)))
    if worst <= tol:
        return x
    logger.error(f'newton_bisection stalled after {maxiter} iterations, worst residual {worst:.3e}')
    raise ConvergenceError(
        f'Safeguarded Newton did not converge (worst residual {worst:.3e})',
        bracket=(lo, hi), last_iterate=x,
    )
