#!/usr/bin/env python3
"""Matrix-valued fields and finite-difference oracles for scalar fields."""

import logging
from typing import Sequence

import numpy as np

import constants as c
from exceptions import DimensionError
from expression import Expression, parse

logger = logging.getLogger(__name__)


class MatrixField:
    """A square grid of expressions; entry [a][i] is the component in row a, column i."""

    def __init__(self, entries: Sequence[Sequence[Expression]]):
        size = len(entries)
        if size == 0 or size % 2 or any(len(row) != size for row in entries):
            raise DimensionError(f'Matrix field must be square with even size, got {size} rows')
        dims = {e.dim for row in entries for e in row}
        if len(dims) != 1:
            raise DimensionError(f'Entries live on different dimensions: {sorted(dims)}')
        self.entries = tuple(tuple(row) for row in entries)
        self.size = size
        self.dim = dims.pop()

    @classmethod
    def from_strings(cls, rows: Sequence[Sequence[str]], dim: int) -> 'MatrixField':
        return cls([[parse(str(src), dim) for src in row] for row in rows])

    @classmethod
    def from_matrix(cls, matrix, dim: int) -> 'MatrixField':
        return cls.from_strings([[repr(float(v)) for v in row] for row in np.asarray(matrix)], dim)

    def sources(self) -> list:
        return [[e.source for e in row] for row in self.entries]

    def value(self, x) -> np.ndarray:
        return np.array([[e.evaluate(x) for e in row] for row in self.entries])

    def jet1(self, x):
        """Return (value, deriv) with deriv[a, i, m] the partial of entry [a][i] along x^m."""
        value = np.zeros((self.size, self.size))
        deriv = np.zeros((self.size, self.size, self.dim))
        for a, row in enumerate(self.entries):
            for i, e in enumerate(row):
                jet = e.eval_jet1(x)
                value[a, i] = jet.value
                deriv[a, i] = jet.gradient
        return value, deriv


def default_steps(x, scale: float) -> np.ndarray:
    return scale * np.maximum(1.0, np.abs(np.asarray(x, dtype=float)))


def fd_gradient(f: Expression, x, h=None) -> np.ndarray:
    """Central differences (f(x + h e_i) - f(x - h e_i)) / 2h."""
    x = np.asarray(x, dtype=float)
    steps = default_steps(x, c.FD_STEP_GRADIENT) if h is None else np.full(len(x), float(h))
    if np.any(steps <= 0):
        raise ValueError(f'Finite-difference step must be positive, got {h}')
    grad = np.zeros(len(x))
    for i, hi in enumerate(steps):
        e = np.zeros(len(x))
        e[i] = hi
        grad[i] = (f.evaluate(x + e) - f.evaluate(x - e)) / (2.0 * hi)
    return grad


def fd_hessian(f: Expression, x, h=None) -> np.ndarray:
    """Four-point central stencil; the diagonal uses the same stencil with i = j."""
    x = np.asarray(x, dtype=float)
    d = len(x)
    steps = default_steps(x, c.FD_STEP_HESSIAN) if h is None else np.full(d, float(h))
    hess = np.zeros((d, d))
    for i in range(d):
        for j in range(i + 1):
            ei = np.zeros(d)
            ej = np.zeros(d)
            ei[i] = steps[i]
            ej[j] = steps[j]
            hess[i, j] = (f.evaluate(x + ei + ej) - f.evaluate(x + ei - ej)
                          - f.evaluate(x - ei + ej) + f.evaluate(x - ei - ej)) / (4.0 * steps[i] * steps[j])
            hess[j, i] = hess[i, j]
    return hess
