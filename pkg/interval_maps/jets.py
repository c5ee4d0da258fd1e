"""
Truncated Taylor arithmetic (jets) with numpy batching.

A Jet stores the Taylor coefficients c_0..c_K of a function at a point, so
that c_k = f^(k)(x)/k!. The coefficient array has shape (K+1, *batch) and all
operations broadcast over the batch axes, which lets branch evaluators written
with ordinary operators run on floats, arrays and jets alike.
"""
import math
from numbers import Integral, Number

import numpy as np

from .exceptions import UnsupportedOrderError


class Jet:
    """Truncated Taylor expansion of order K (optionally batched)"""

    __slots__ = ('coeffs',)
    # Make ndarray <op> Jet defer to the reflected Jet method
    __array_ufunc__ = None

    def __init__(self, coeffs):
        coeffs = np.asarray(coeffs)
        if coeffs.ndim == 0:
            raise ValueError('Jet coefficients need a leading order axis')
        if not np.iscomplexobj(coeffs):
            coeffs = coeffs.astype(float)
        self.coeffs = coeffs

    # --- construction -------------------------------------------------

    @classmethod
    def variable(cls, x, order):
        """Identity jet x + dx at the point(s) x"""
        x = np.asarray(x)
        dtype = np.result_type(x, float)
        coeffs = np.zeros((order + 1,) + x.shape, dtype=dtype)
        coeffs[0] = x
        if order >= 1:
            coeffs[1] = 1.0
        return cls(coeffs)

    @classmethod
    def constant(cls, value, order, shape=None):
        value = np.asarray(value)
        if shape is None:
            shape = value.shape
        dtype = np.result_type(value, float)
        coeffs = np.zeros((order + 1,) + tuple(shape), dtype=dtype)
        coeffs[0] = value
        return cls(coeffs)

    @classmethod
    def from_derivatives(cls, derivatives):
        """Build a jet from (f, f', f'', ...) values"""
        derivatives = np.asarray(derivatives)
        factorials = np.array([math.factorial(k) for k in range(derivatives.shape[0])], dtype=float)
        factorials = factorials.reshape((-1,) + (1,) * (derivatives.ndim - 1))
        return cls(derivatives / factorials)

    # --- inspection ---------------------------------------------------

    @property
    def order(self):
        return self.coeffs.shape[0] - 1

    @property
    def value(self):
        return self.coeffs[0]

    @property
    def shape(self):
        return self.coeffs.shape[1:]

    def derivative(self, k):
        """k-th derivative at the expansion point"""
        if k > self.order:
            raise UnsupportedOrderError(f'Jet of order {self.order} has no derivative of order {k}')
        return self.coeffs[k] * math.factorial(k)

    @property
    def derivatives(self):
        """Array (f, f', ..., f^(K)) with the batch axes trailing"""
        factorials = np.array([math.factorial(k) for k in range(self.order + 1)], dtype=float)
        factorials = factorials.reshape((-1,) + (1,) * (self.coeffs.ndim - 1))
        return self.coeffs * factorials

    def truncate(self, order):
        if order > self.order:
            raise UnsupportedOrderError(f'Cannot raise jet order from {self.order} to {order}')
        return Jet(self.coeffs[:order + 1])

    def __getitem__(self, key):
        if not isinstance(key, tuple):
            key = (key,)
        return Jet(self.coeffs[(slice(None),) + key])

    def __repr__(self):
        return f'Jet(order={self.order}, derivatives={self.derivatives!r})'

    # --- arithmetic ---------------------------------------------------

    def _coerce(self, other):
        if isinstance(other, Jet):
            if other.order != self.order:
                order = min(self.order, other.order)
                return self.truncate(order), other.truncate(order)
            return self, other
        return self, Jet.constant(other, self.order)

    def __add__(self, other):
        if not isinstance(other, Jet):
            other = np.asarray(other)
            shape = np.broadcast_shapes(self.shape, other.shape)
            coeffs = np.zeros((self.order + 1,) + shape, dtype=np.result_type(self.coeffs, other))
            coeffs[...] = self.coeffs
            coeffs[0] = coeffs[0] + other
            return Jet(coeffs)
        a, b = self._coerce(other)
        return Jet(a.coeffs + b.coeffs)

    __radd__ = __add__

    def __neg__(self):
        return Jet(-self.coeffs)

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if not isinstance(other, Jet):
            return Jet(self.coeffs * _lift(other))
        a, b = self._coerce(other)
        return Jet(_cauchy_product(a.coeffs, b.coeffs))

    __rmul__ = __mul__

    def __truediv__(self, other):
        if not isinstance(other, Jet):
            return Jet(self.coeffs / _lift(other))
        return self * other.reciprocal()

    def __rtruediv__(self, other):
        return self.reciprocal() * other

    def __pow__(self, p):
        if isinstance(p, Jet):
            return (self.log() * p).exp()
        return self.power(p)

    def __rpow__(self, base):
        return (self * np.log(base)).exp()

    # --- elementary functions ------------------------------------------

    def reciprocal(self):
        a = self.coeffs
        out = np.zeros(a.shape, dtype=a.dtype)
        out[0] = 1.0 / a[0]
        for n in range(1, self.order + 1):
            acc = sum(a[k] * out[n - k] for k in range(1, n + 1))
            out[n] = -acc * out[0]
        return Jet(out)

    def exp(self):
        a = self.coeffs
        out = np.zeros(a.shape, dtype=a.dtype)
        out[0] = np.exp(a[0])
        for n in range(1, self.order + 1):
            out[n] = sum(k * a[k] * out[n - k] for k in range(1, n + 1)) / n
        return Jet(out)

    def log(self):
        return self._log(np.log(self.coeffs[0]))

    def log_abs(self):
        """Jet of log|f| (same derivatives as log f away from zeros)"""
        if np.iscomplexobj(self.coeffs):
            raise TypeError('log_abs is defined for real jets only')
        return self._log(np.log(np.abs(self.coeffs[0])))

    def _log(self, head):
        a = self.coeffs
        out = np.zeros(a.shape, dtype=np.result_type(a, head))
        out[0] = head
        for n in range(1, self.order + 1):
            acc = sum(k * out[k] * a[n - k] for k in range(1, n))
            out[n] = (a[n] - acc / n) / a[0]
        return Jet(out)

    def power(self, p):
        """Jet of f**p for a scalar exponent p"""
        if isinstance(p, Integral) or (isinstance(p, float) and p.is_integer()):
            return self._integer_power(int(p))
        a = self.coeffs
        zero = a[0] == 0
        if np.any(zero):
            if p <= self.order:
                raise UnsupportedOrderError(
                    f'x**{p} at x=0 has no derivative of order {math.ceil(p)} (jet order {self.order})'
                )
            if np.all(zero):
                return Jet(np.zeros_like(a))
        safe_head = np.where(zero, 1.0, a[0])
        out = np.zeros(a.shape, dtype=np.result_type(a, float))
        out[0] = safe_head ** p
        for n in range(1, self.order + 1):
            acc = sum((p * k - (n - k)) * a[k] * out[n - k] for k in range(1, n + 1))
            out[n] = acc / (n * safe_head)
        if np.any(zero):
            out = np.where(zero, 0.0, out)
        return Jet(out)

    def _integer_power(self, p):
        if p < 0:
            return self._integer_power(-p).reciprocal()
        result = Jet.constant(np.ones(self.shape), self.order)
        base = self
        while p:
            if p & 1:
                result = result * base
            p >>= 1
            if p:
                base = base * base
        return result

    def sqrt(self):
        return self.power(0.5)

    def compose(self, inner):
        """Jet of f∘g where self is the expansion of f at g(x)

        Args:
            inner: Jet of g at x; its value must be the point self expands at.

        Returns:
            Jet of f∘g at x (Faa di Bruno through Horner on g - g(x)).
        """
        order = min(self.order, inner.order)
        shift = Jet(inner.coeffs[:order + 1].copy())
        shift.coeffs[0] = 0.0
        result = Jet.constant(self.coeffs[order], order, shape=np.broadcast_shapes(self.shape, inner.shape))
        for k in range(order - 1, -1, -1):
            result = result * shift + self.coeffs[k]
        return result

    def invert(self, at_value):
        """Jet of the inverse function f^{-1} at f(x), by series reversion

        Args:
            at_value: the point x itself (the jet only knows f(x) and derivatives).

        Returns:
            Jet of f^{-1} at f(x), with value at_value.
        """
        order = self.order
        slope = self.coeffs[1]
        u = Jet.variable(np.zeros(self.shape), order)
        u.coeffs[0] = 0.0
        s = u / slope
        for _ in range(order):
            nonlinear = Jet.constant(np.zeros(self.shape), order)
            power = s
            for k in range(2, order + 1):
                power = power * s
                nonlinear = nonlinear + power * self.coeffs[k]
            s = (u - nonlinear) / slope
        coeffs = s.coeffs.copy()
        coeffs[0] = at_value
        return Jet(coeffs)


def _lift(other):
    """Add a leading order axis so plain values broadcast against coeffs"""
    other = np.asarray(other)
    return other.reshape((1,) + other.shape)


def _cauchy_product(a, b):
    order = min(a.shape[0], b.shape[0]) - 1
    shape = np.broadcast_shapes(a.shape[1:], b.shape[1:])
    out = np.zeros((order + 1,) + shape, dtype=np.result_type(a, b))
    for n in range(order + 1):
        out[n] = sum(a[k] * b[n - k] for k in range(n + 1))
    return out


# --- dispatchers usable on floats, arrays and jets ----------------------

def exp(x):
    return x.exp() if isinstance(x, Jet) else np.exp(x)


def log(x):
    return x.log() if isinstance(x, Jet) else np.log(x)


def log_abs(x):
    return x.log_abs() if isinstance(x, Jet) else np.log(np.abs(x))


def sqrt(x):
    return x.sqrt() if isinstance(x, Jet) else np.sqrt(x)


def value_of(x):
    """Plain value of a jet, or the input itself"""
    return x.value if isinstance(x, Jet) else x


def first_derivative(x):
    return x.coeffs[1]


def is_scalar(x):
    return isinstance(x, Number) or (isinstance(x, np.ndarray) and x.ndim == 0)
