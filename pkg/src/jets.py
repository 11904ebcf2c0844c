#!/usr/bin/env python3
"""Forward-mode dual numbers.

A Dual carries a value and a vector of partial derivatives. Nesting a Dual whose
coefficients are themselves Duals yields exact second derivatives, which is how
Jet2 values are produced. The elementary functions below accept plain floats or
Duals of any nesting depth.
"""

from dataclasses import dataclass
import math

import numpy as np


class Dual:
    __slots__ = ('value', 'eps')

    def __init__(self, value, eps):
        self.value = value
        self.eps = eps

    def __repr__(self):
        return f'Dual({self.value!r}, {self.eps!r})'

    def __neg__(self):
        return Dual(-self.value, -self.eps)

    def __add__(self, other):
        if isinstance(other, np.ndarray):
            return NotImplemented
        if isinstance(other, Dual):
            return Dual(self.value + other.value, self.eps + other.eps)
        return Dual(self.value + other, self.eps)

    __radd__ = __add__

    def __sub__(self, other):
        if isinstance(other, np.ndarray):
            return NotImplemented
        if isinstance(other, Dual):
            return Dual(self.value - other.value, self.eps - other.eps)
        return Dual(self.value - other, self.eps)

    def __rsub__(self, other):
        return Dual(other - self.value, -self.eps)

    def __mul__(self, other):
        if isinstance(other, np.ndarray):
            return NotImplemented
        if isinstance(other, Dual):
            return Dual(self.value * other.value,
                        self.eps * other.value + other.eps * self.value)
        return Dual(self.value * other, self.eps * other)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, np.ndarray):
            return NotImplemented
        if isinstance(other, Dual):
            return self * reciprocal(other)
        return Dual(self.value / other, self.eps / other)

    def __rtruediv__(self, other):
        return reciprocal(self) * other


def primal(u) -> float:
    """Innermost value of a (possibly nested) dual number."""
    while isinstance(u, Dual):
        u = u.value
    return float(u)


def reciprocal(u):
    if isinstance(u, Dual):
        return Dual(reciprocal(u.value), u.eps * (-reciprocal(u.value * u.value)))
    return 1.0 / u


def power(u, k: int):
    if k == 0:
        return 1.0
    if isinstance(u, Dual):
        return Dual(power(u.value, k), u.eps * (k * power(u.value, k - 1)))
    return u ** k


def sin(u):
    if isinstance(u, Dual):
        return Dual(sin(u.value), u.eps * cos(u.value))
    return math.sin(u)


def cos(u):
    if isinstance(u, Dual):
        return Dual(cos(u.value), u.eps * (-sin(u.value)))
    return math.cos(u)


def exp(u):
    if isinstance(u, Dual):
        e = exp(u.value)
        return Dual(e, u.eps * e)
    return math.exp(u)


def ln(u):
    if isinstance(u, Dual):
        return Dual(ln(u.value), u.eps * reciprocal(u.value))
    return math.log(u)


def sqrt(u):
    if isinstance(u, Dual):
        s = sqrt(u.value)
        return Dual(s, u.eps * (0.5 * reciprocal(s)))
    return math.sqrt(u)


def seed_first_order(x) -> list:
    d = len(x)
    return [Dual(float(x[i]), np.eye(d)[i]) for i in range(d)]


def seed_second_order(x) -> list:
    """Variables as duals over duals: the outer tangent is an object array of inner constants."""
    d = len(x)
    inner = seed_first_order(x)
    seeded = []
    for i in range(d):
        eps = np.empty(d, dtype=object)
        for j in range(d):
            eps[j] = Dual(1.0 if i == j else 0.0, np.zeros(d))
        seeded.append(Dual(inner[i], eps))
    return seeded


@dataclass(frozen=True)
class Jet1:
    value: float
    gradient: np.ndarray


@dataclass(frozen=True)
class Jet2:
    """Value, gradient and Hessian of a scalar field at a point.

    Only the lower triangle of the Hessian is stored (row-major packed), so the
    full matrix handed out by `hessian` is symmetric by construction.
    """

    value: float
    gradient: np.ndarray
    hessian_lower: np.ndarray

    @property
    def dim(self) -> int:
        return len(self.gradient)

    @property
    def hessian(self) -> np.ndarray:
        d = self.dim
        full = np.zeros((d, d))
        rows, cols = np.tril_indices(d)
        full[rows, cols] = self.hessian_lower
        full[cols, rows] = self.hessian_lower
        return full


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


def to_jet1(result, d: int) -> Jet1:
    if not isinstance(result, Dual):
        return Jet1(float(result), _frozen(np.zeros(d)))
    return Jet1(float(result.value), _frozen(result.eps))


def to_jet2(result, d: int) -> Jet2:
    rows, cols = np.tril_indices(d)
    if not isinstance(result, Dual):
        return Jet2(float(result), _frozen(np.zeros(d)), _frozen(np.zeros(len(rows))))
    inner = result.value
    if isinstance(inner, Dual):
        value, gradient = float(inner.value), inner.eps
    else:
        value, gradient = float(inner), np.zeros(d)
    lower = np.zeros(len(rows))
    for k, (i, j) in enumerate(zip(rows, cols)):
        entry = result.eps[i]
        if isinstance(entry, Dual):
            lower[k] = entry.eps[j]
    return Jet2(value, _frozen(gradient), _frozen(lower))
