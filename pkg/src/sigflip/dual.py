"""Vector forward-mode dual numbers.

A :class:`DualScalar` carries a value and its full gradient with respect to
the chart coordinates. Arithmetic mixes freely with plain floats, so any
function written against ``+ - * /`` and the helpers below works on both
floats and duals.
"""

from __future__ import annotations

import math
from typing import Sequence, Union

import numpy as np

Number = Union[float, "DualScalar"]


class DualScalar:
    __slots__ = ("value", "gradient")

    def __init__(self, value: float, gradient) -> None:
        self.value = float(value)
        self.gradient = np.asarray(gradient, dtype=float)

    @classmethod
    def constant(cls, value: float, n: int) -> "DualScalar":
        return cls(value, np.zeros(n))

    @classmethod
    def variable(cls, value: float, index: int, n: int) -> "DualScalar":
        grad = np.zeros(n)
        grad[index] = 1.0
        return cls(value, grad)

    def __repr__(self) -> str:
        return f"DualScalar({self.value!r}, {self.gradient.tolist()!r})"

    def __add__(self, other):
        if isinstance(other, DualScalar):
            return DualScalar(self.value + other.value, self.gradient + other.gradient)
        return DualScalar(self.value + other, self.gradient)

    __radd__ = __add__

    def __sub__(self, other):
        if isinstance(other, DualScalar):
            return DualScalar(self.value - other.value, self.gradient - other.gradient)
        return DualScalar(self.value - other, self.gradient)

    def __rsub__(self, other):
        return DualScalar(other - self.value, -self.gradient)

    def __neg__(self):
        return DualScalar(-self.value, -self.gradient)

    def __pos__(self):
        return self

    def __mul__(self, other):
        if isinstance(other, DualScalar):
            return DualScalar(
                self.value * other.value,
                self.value * other.gradient + other.value * self.gradient,
            )
        return DualScalar(self.value * other, self.gradient * other)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, DualScalar):
            if other.value == 0.0:
                raise ZeroDivisionError("dual division by zero")
            q = self.value / other.value
            return DualScalar(q, (self.gradient - q * other.gradient) / other.value)
        if other == 0:
            raise ZeroDivisionError("dual division by zero")
        return DualScalar(self.value / other, self.gradient / other)

    def __rtruediv__(self, other):
        if self.value == 0.0:
            raise ZeroDivisionError("dual division by zero")
        q = other / self.value
        return DualScalar(q, -q / self.value * self.gradient)

    def __abs__(self):
        # subgradient 0 at the kink
        sign = 0.0 if self.value == 0.0 else math.copysign(1.0, self.value)
        return DualScalar(abs(self.value), sign * self.gradient)

    # comparisons act on the value only; used for branch decisions
    def __lt__(self, other):
        return self.value < value_of(other)

    def __le__(self, other):
        return self.value <= value_of(other)

    def __gt__(self, other):
        return self.value > value_of(other)

    def __ge__(self, other):
        return self.value >= value_of(other)


def value_of(x: Number) -> float:
    return x.value if isinstance(x, DualScalar) else float(x)


def _lift(x: Number, fval: float, fprime: float) -> Number:
    if isinstance(x, DualScalar):
        return DualScalar(fval, fprime * x.gradient)
    return fval


def sin(x: Number) -> Number:
    v = value_of(x)
    return _lift(x, math.sin(v), math.cos(v))


def cos(x: Number) -> Number:
    v = value_of(x)
    return _lift(x, math.cos(v), -math.sin(v))


def exp(x: Number) -> Number:
    ev = math.exp(value_of(x))
    return _lift(x, ev, ev)


def log(x: Number) -> Number:
    v = value_of(x)
    return _lift(x, math.log(v), 1.0 / v)


def sqrt(x: Number) -> Number:
    r = math.sqrt(value_of(x))
    if isinstance(x, DualScalar):
        if r == 0.0:
            raise ZeroDivisionError("derivative of sqrt at 0")
        return DualScalar(r, x.gradient / (2.0 * r))
    return r


def tanh(x: Number) -> Number:
    t = math.tanh(value_of(x))
    return _lift(x, t, 1.0 - t * t)


def fabs(x: Number) -> Number:
    return abs(x)


def ipow(x: Number, k: int) -> Number:
    """Integer power; valid for negative bases."""
    v = value_of(x)
    if k < 0 and v == 0.0:
        raise ZeroDivisionError("zero to a negative power")
    val = v**k
    if isinstance(x, DualScalar):
        return DualScalar(val, k * v ** (k - 1) * x.gradient if k != 0 else 0.0 * x.gradient)
    return float(val)


def rpow(x: Number, y: Number) -> Number:
    """Real power ``x**y`` for ``x > 0``, or ``x == 0`` with constant ``y > 0``."""
    xv, yv = value_of(x), value_of(y)
    val = xv**yv
    if not isinstance(x, DualScalar) and not isinstance(y, DualScalar):
        return float(val)
    n = (x if isinstance(x, DualScalar) else y).gradient.shape[0]
    grad = np.zeros(n)
    if isinstance(x, DualScalar):
        grad = grad + yv * xv ** (yv - 1.0) * x.gradient
    if isinstance(y, DualScalar):
        grad = grad + val * math.log(xv) * y.gradient
    return DualScalar(val, grad)


def seed(point: Sequence[float]) -> list[DualScalar]:
    """Coordinate duals at ``point``: value p_i, gradient e_i."""
    n = len(point)
    return [DualScalar.variable(float(p), i, n) for i, p in enumerate(point)]


def promote(x: Number, n: int) -> DualScalar:
    return x if isinstance(x, DualScalar) else DualScalar.constant(x, n)
