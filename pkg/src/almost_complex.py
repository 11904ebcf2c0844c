#!/usr/bin/env python3
"""Almost complex structures on a single chart of R^2n and their Nijenhuis tensor.

Index convention: row = upper index a, column = lower index i, so that the
matrix-vector product realizes (Jv)^a = J^a_i v^i. Derivatives are stored as
deriv[a, i, m] = d J^a_i / d x^m.
"""

from dataclasses import dataclass
import functools
import logging
from typing import Optional, Sequence

import numpy as np

import constants as c
from exceptions import DimensionError
from fields import MatrixField

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class StructureJet:
    value: np.ndarray
    deriv: np.ndarray


@dataclass(frozen=True)
class ValidationResult:
    passed: bool
    residual: float


class AlmostComplexStructure:
    """Base class: subclasses provide `_compute_jet`. Jets are cached per point."""

    kind = 'abstract'

    def __init__(self, dim: int):
        if dim <= 0 or dim % 2:
            raise DimensionError(f'Almost complex structures need an even dimension, got {dim}')
        self.dim = dim

    def _compute_jet(self, x: np.ndarray) -> StructureJet:
        raise NotImplementedError

    @functools.lru_cache(maxsize=4096)
    def _cached_jet(self, key: bytes) -> StructureJet:
        jet = self._compute_jet(np.frombuffer(key, dtype=float))
        jet.value.setflags(write=False)
        jet.deriv.setflags(write=False)
        return jet

    def jet(self, x) -> StructureJet:
        x = np.ascontiguousarray(x, dtype=float)
        if x.shape != (self.dim,):
            raise DimensionError(f'Point of shape {x.shape} for a structure on R^{self.dim}')
        return self._cached_jet(x.tobytes())

    def matrix(self, x) -> np.ndarray:
        return self.jet(x).value

    def value(self, x) -> np.ndarray:
        """J(x) only; subclasses skip the derivative work. Used by the finite-difference oracles."""
        return self.matrix(x)

    def describe(self) -> dict:
        return {'kind': self.kind, 'dim': self.dim}


class FieldStructure(AlmostComplexStructure):
    """J given entry by entry as a MatrixField."""

    def __init__(self, field: MatrixField, kind: str = 'custom', **params):
        if field.size != field.dim:
            raise DimensionError(f'A {field.size}x{field.size} field cannot act on R^{field.dim}')
        super().__init__(field.dim)
        self.field = field
        self.kind = kind
        self.params = params

    def _compute_jet(self, x):
        value, deriv = self.field.jet1(x)
        return StructureJet(value, deriv)

    def value(self, x):
        return self.field.value(x)

    def describe(self) -> dict:
        return {'kind': self.kind, 'dim': self.dim, **self.params}


class ConjugatedStructure(AlmostComplexStructure):
    """J_A = A J_std A^-1 with A = Id + epsilon * S(x); squares to -Id exactly up to rounding."""

    kind = 'conjugated'

    def __init__(self, s_field: MatrixField, epsilon: float):
        if s_field.size != s_field.dim:
            raise DimensionError(f'A {s_field.size}x{s_field.size} field cannot act on R^{s_field.dim}')
        super().__init__(s_field.dim)
        self.s_field = s_field
        self.epsilon = float(epsilon)
        self._j0 = standard_matrix(self.dim)

    def _compute_jet(self, x):
        s, ds = self.s_field.jet1(x)
        a = np.eye(self.dim) + self.epsilon * s
        da = self.epsilon * ds
        a_inv = np.linalg.inv(a)
        value = a @ self._j0 @ a_inv
        deriv = np.zeros((self.dim, self.dim, self.dim))
        for m in range(self.dim):
            da_inv = -a_inv @ da[:, :, m] @ a_inv
            deriv[:, :, m] = da[:, :, m] @ self._j0 @ a_inv + a @ self._j0 @ da_inv
        return StructureJet(value, deriv)

    def value(self, x):
        a = np.eye(self.dim) + self.epsilon * self.s_field.value(x)
        return a @ self._j0 @ np.linalg.inv(a)

    def describe(self) -> dict:
        return {'kind': self.kind, 'dim': self.dim, 'epsilon': self.epsilon,
                's_matrix': self.s_field.sources()}


def standard_matrix(dim: int) -> np.ndarray:
    """Coordinates (x1, y1, x2, y2, ...): J d/dx_k = d/dy_k and J d/dy_k = -d/dx_k."""
    if dim <= 0 or dim % 2:
        raise DimensionError(f'Almost complex structures need an even dimension, got {dim}')
    j = np.zeros((dim, dim))
    for k in range(0, dim, 2):
        j[k + 1, k] = 1.0
        j[k, k + 1] = -1.0
    return j


def standard_structure(dim: int) -> FieldStructure:
    return FieldStructure(MatrixField.from_matrix(standard_matrix(dim), dim), kind='standard')


def custom_structure(rows: Sequence[Sequence[str]], dim: int) -> FieldStructure:
    return FieldStructure(MatrixField.from_strings(rows, dim), kind='custom')


def default_perturbation_rows(dim: int) -> list:
    """Off-diagonal polynomial field used when a conjugated structure gives no S."""
    rows = []
    for i in range(dim):
        row = []
        for j in range(dim):
            if i == j:
                row.append('0')
                continue
            a = (i + j) % dim + 1
            b = (i + 2 * j + 1) % dim + 1
            k = (2 * i + j) % dim + 1
            row.append(f'x{a}*x{b} + x{k}')
        rows.append(row)
    return rows


def conjugated_structure(dim: int, epsilon: float,
                         s_rows: Optional[Sequence[Sequence[str]]] = None) -> ConjugatedStructure:
    rows = s_rows if s_rows is not None else default_perturbation_rows(dim)
    return ConjugatedStructure(MatrixField.from_strings(rows, dim), epsilon)


def sheared_structure(dim: int, shear: float) -> FieldStructure:
    """Pullback of the standard structure by (.., y_n) -> (.., y_n + shear * x1^2).

    The pullback of a constant structure under a diffeomorphism is integrable, but
    its coefficients depend on x1.
    """
    if dim < 4:
        raise DimensionError(f'The sheared structure needs dim >= 4, got {dim}')
    rows = [[repr(float(v)) for v in row] for row in standard_matrix(dim)]
    s = repr(2.0 * float(shear))
    rows[dim - 2][0] = f'-{s}*x1'
    rows[dim - 1][1] = f'{s}*x1'
    return FieldStructure(MatrixField.from_strings(rows, dim), kind='sheared', shear=float(shear))


def validate(J: AlmostComplexStructure, x, tol: float = c.TOL_ACS) -> ValidationResult:
    """Check J(x)^2 = -Id in the max-entry norm."""
    x = np.asarray(x, dtype=float)
    if J.dim % 2 or x.shape != (J.dim,):
        raise DimensionError(f'Point of shape {x.shape} for a structure on R^{J.dim}')
    m = J.matrix(x)
    if m.shape != (J.dim, J.dim):
        raise DimensionError(f'Structure matrix has shape {m.shape}')
    residual = float(np.max(np.abs(m @ m + np.eye(J.dim))))
    return ValidationResult(residual <= tol, residual)


class NijenhuisComponents:
    """N^a_{il} at a point, stored only for i < l so antisymmetry holds by storage."""

    def __init__(self, dim: int, upper: np.ndarray):
        self.dim = dim
        self.pairs = tuple((i, l) for i in range(dim) for l in range(i + 1, dim))
        if upper.shape != (dim, len(self.pairs)):
            raise DimensionError(f'Expected {dim}x{len(self.pairs)} components, got {upper.shape}')
        self.upper = upper
        self.upper.setflags(write=False)

    @classmethod
    def from_full(cls, full: np.ndarray) -> 'NijenhuisComponents':
        dim = full.shape[0]
        upper = np.array([[full[a, i, l] for i in range(dim) for l in range(i + 1, dim)]
                          for a in range(dim)]).reshape(dim, -1)
        return cls(dim, upper)

    def full(self) -> np.ndarray:
        out = np.zeros((self.dim, self.dim, self.dim))
        for k, (i, l) in enumerate(self.pairs):
            out[:, i, l] = self.upper[:, k]
            out[:, l, i] = -self.upper[:, k]
        return out

    def apply(self, v, w) -> np.ndarray:
        """Contraction N^a_{il} v^i w^l, summed pairwise as (v^i w^l - v^l w^i)."""
        v = np.asarray(v, dtype=float)
        w = np.asarray(w, dtype=float)
        if v.shape != (self.dim,) or w.shape != (self.dim,):
            raise DimensionError(f'Vectors of shapes {v.shape}, {w.shape} on R^{self.dim}')
        wedge = np.array([v[i] * w[l] - v[l] * w[i] for i, l in self.pairs])
        return self.upper @ wedge

    def norm(self) -> float:
        return float(np.max(np.abs(self.upper))) if self.upper.size else 0.0


def nijenhuis_from_jet(jet: StructureJet) -> NijenhuisComponents:
    j, dj = jet.value, jet.deriv
    # N^a_il = J^m_i J^a_{l,m} - J^m_l J^a_{i,m} - J^a_m (J^m_{l,i} - J^m_{i,l}); the first
    # and third terms are antisymmetrized copies of the same array.
    t1 = np.einsum('mi,alm->ail', j, dj)
    t3 = np.einsum('am,mli->ail', j, dj)
    half = t1 - t3
    full = half - np.transpose(half, (0, 2, 1))
    return NijenhuisComponents.from_full(full)


def nijenhuis(J: AlmostComplexStructure, x) -> NijenhuisComponents:
    return nijenhuis_from_jet(J.jet(x))


def nijenhuis_apply(J: AlmostComplexStructure, x, v, w) -> np.ndarray:
    return nijenhuis(J, x).apply(v, w)


def nijenhuis_norm(J: AlmostComplexStructure, x) -> float:
    return nijenhuis(J, x).norm()
