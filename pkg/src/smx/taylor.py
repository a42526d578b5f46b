"""Truncated power-series arithmetic for exact high-order derivatives.

A :class:`PowerSeries` holds the coefficients c0..cN of a function's Taylor
expansion about some point and propagates them through arithmetic, so the
N-th derivative of a composite expression comes out exact to rounding, with
no finite differencing anywhere.  This is what user-defined potentials use
to supply expansion coefficients; the built-in models bypass it in favour
of closed forms.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ParameterError, SingularityError


@dataclass(frozen=True)
class TaylorSeries:
    """Expansion of the scaled potential term about ``center``.

    ``coeffs[mu]`` multiplies (x - center)**mu; there are ``order + 1``
    entries and all must be finite.
    """

    center: float
    coeffs: np.ndarray
    order: int = field(default=-1)

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=float)
        object.__setattr__(self, "coeffs", c)
        if self.order < 0:
            object.__setattr__(self, "order", len(c) - 1)
        if len(c) != self.order + 1:
            raise ParameterError(
                f"expected {self.order + 1} coefficients, got {len(c)}"
            )
        if not np.all(np.isfinite(c)):
            raise SingularityError(
                f"non-finite expansion coefficients at center {self.center!r}"
            )

    def __call__(self, x):
        """Evaluate the truncated series at absolute position x."""
        delta = np.asarray(x, dtype=float) - self.center
        acc = np.zeros_like(delta)
        for c in self.coeffs[::-1]:
            acc = acc * delta + c
        return acc


class PowerSeries:
    """Truncated power series in one variable, fixed order.

    Supports +, -, *, /, integer powers, exp and log.  Mixing with plain
    numbers treats them as constant series.  The order of a binary result
    is the smaller of the operand orders.
    """

    __slots__ = ("c",)

    def __init__(self, coeffs, order=None):
        c = np.asarray(coeffs, dtype=float)
        if c.ndim != 1 or len(c) == 0:
            raise ParameterError("coefficients must be a non-empty 1-d sequence")
        if order is not None:
            out = np.zeros(order + 1)
            n = min(len(c), order + 1)
            out[:n] = c[:n]
            c = out
        self.c = c

    @property
    def order(self):
        return len(self.c) - 1

    def __repr__(self):
        return f"PowerSeries({self.c.tolist()})"

    def _coerce(self, other):
        if isinstance(other, PowerSeries):
            return other
        if np.isscalar(other):
            return PowerSeries([float(other)], order=self.order)
        return NotImplemented

    def __add__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        n = min(len(self.c), len(o.c))
        return PowerSeries(self.c[:n] + o.c[:n])

    __radd__ = __add__

    def __neg__(self):
        return PowerSeries(-self.c)

    def __sub__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        n = min(len(self.c), len(o.c))
        return PowerSeries(self.c[:n] - o.c[:n])

    def __rsub__(self, other):
        return (-self).__add__(other)

    def __mul__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        n = min(len(self.c), len(o.c))
        return PowerSeries(np.convolve(self.c[:n], o.c[:n])[:n])

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return self * o.reciprocal()

    def __rtruediv__(self, other):
        return self.reciprocal() * other

    def reciprocal(self):
        a = self.c
        if a[0] == 0.0:
            raise SingularityError("reciprocal of a series with zero leading term")
        b = np.zeros_like(a)
        b[0] = 1.0 / a[0]
        for n in range(1, len(a)):
            b[n] = -np.dot(b[:n], a[n:0:-1]) / a[0]
        return PowerSeries(b)

    def __pow__(self, n):
        if not isinstance(n, (int, np.integer)):
            raise ParameterError("only integer powers are supported")
        if n < 0:
            return self.reciprocal() ** (-n)
        result = PowerSeries([1.0], order=self.order)
        base = self
        n = int(n)
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def exp(self):
        a = self.c
        b = np.zeros_like(a)
        b[0] = math.exp(a[0])
        for n in range(1, len(a)):
            b[n] = np.dot(np.arange(1, n + 1) * a[1 : n + 1], b[n - 1 :: -1]) / n
        return PowerSeries(b)

    def log(self):
        a = self.c
        if a[0] <= 0.0:
            raise SingularityError("log of a series with non-positive leading term")
        b = np.zeros_like(a)
        b[0] = math.log(a[0])
        for n in range(1, len(a)):
            s = np.dot(np.arange(1, n) * b[1:n], a[n - 1 : 0 : -1]) if n > 1 else 0.0
            b[n] = (a[n] - s / n) / a[0]
        return PowerSeries(b)


def exp(s):
    return s.exp() if isinstance(s, PowerSeries) else math.exp(s)


def log(s):
    return s.log() if isinstance(s, PowerSeries) else math.log(s)


def seed(center, order):
    """The identity function x as a series about ``center``."""
    c = np.zeros(order + 1)
    c[0] = center
    if order >= 1:
        c[1] = 1.0
    return PowerSeries(c)


def taylor_coefficients(fn, center, order):
    """Taylor coefficients of ``fn`` about ``center`` via series propagation.

    ``fn`` must accept a :class:`PowerSeries` (or anything supporting the
    same operators) and return one.  Raises SingularityError if the result
    is non-finite.
    """
    out = fn(seed(center, order))
    if np.isscalar(out):
        c = np.zeros(order + 1)
        c[0] = float(out)
    else:
        c = np.asarray(out.c, dtype=float)
    if not np.all(np.isfinite(c)):
        raise SingularityError(f"series provider returned non-finite values at {center!r}")
    return c
