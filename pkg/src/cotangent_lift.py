#!/usr/bin/env python3
"""The lift of an almost complex structure J on M to T*M.

Chart coordinates on T*M are (x^1..x^2n, p_1..p_2n) and every 4n-vector or
4n x 4n matrix below is written in the frame (d/dx^1..d/dx^2n, d/dp_1..d/dp_2n).
A 2-form sigma is stored as the matrix S with sigma(V, W) = V^T S W; a bivector
the same way on covectors.

    omega       = dp_i ^ dx^i                  [[0, -I], [I, 0]]
    omega^-1    = d/dx^a (x) d/dp_a - d/dp_a (x) d/dx^a   [[0, I], [-I, 0]]
    d(Jhat*theta) = [[B, -J^T], [J, 0]],  B_ij = p_a (J^a_{j,i} - J^a_{i,j})
    g^J         = [[G, 0], [0, 0]],       G_ij = 1/2 p_a N^a_il J^l_j

The lifted structure is reached two ways: through the twisted form
varpi = d(Jhat*theta) + g^J, sending V to omega^-1(varpi(V, .), .), and through
the closed coordinate form with base block J, fiber block J^T and a
p-dependent correction from dx^i to d/dp_j.
"""

from dataclasses import dataclass
import logging
from typing import Optional

import numpy as np

from almost_complex import AlmostComplexStructure, NijenhuisComponents, nijenhuis_from_jet
from exceptions import DimensionError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class CotangentPoint:
    """alpha = p_a dx^a at the base point x."""

    x: np.ndarray
    p: np.ndarray

    def __post_init__(self):
        x = np.array(self.x, dtype=float)
        p = np.array(self.p, dtype=float)
        if x.ndim != 1 or x.shape != p.shape or len(x) % 2:
            raise DimensionError(f'Cotangent point needs x and p of equal even length, got {x.shape} and {p.shape}')
        if not (np.all(np.isfinite(x)) and np.all(np.isfinite(p))):
            raise ValueError(f'Cotangent point has non-finite entries: x={x}, p={p}')
        x.setflags(write=False)
        p.setflags(write=False)
        object.__setattr__(self, 'x', x)
        object.__setattr__(self, 'p', p)

    @property
    def dim(self) -> int:
        return len(self.x)

    def as_vector(self) -> np.ndarray:
        return np.concatenate([self.x, self.p])


def _check_vector(alpha: CotangentPoint, v) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    if v.shape != (2 * alpha.dim,):
        raise DimensionError(f'Tangent vector of shape {v.shape} at a point of T*R^{alpha.dim}')
    return v


def pi_star(v) -> np.ndarray:
    """Base part of a tangent vector of T*M (or of each column of a matrix)."""
    v = np.asarray(v, dtype=float)
    return v[: v.shape[0] // 2]


def theta(alpha: CotangentPoint, v) -> float:
    """Tautological form: alpha(pi_* V)."""
    v = _check_vector(alpha, v)
    return float(alpha.p @ pi_star(v))


def omega(dim: int) -> np.ndarray:
    if dim <= 0 or dim % 2:
        raise DimensionError(f'Base dimension must be even, got {dim}')
    eye = np.eye(dim)
    zero = np.zeros((dim, dim))
    return np.block([[zero, -eye], [eye, zero]])


def omega_inverse(dim: int) -> np.ndarray:
    """Closed block form; omega @ omega_inverse = omega_inverse @ omega = Id."""
    if dim <= 0 or dim % 2:
        raise DimensionError(f'Base dimension must be even, got {dim}')
    eye = np.eye(dim)
    zero = np.zeros((dim, dim))
    return np.block([[zero, eye], [-eye, zero]])


def omega_inverse_apply(dim: int, covector) -> np.ndarray:
    """The vector omega^-1(xi, .)."""
    return omega_inverse(dim).T @ np.asarray(covector, dtype=float)


def _check_base(J: AlmostComplexStructure, alpha: CotangentPoint) -> None:
    if J.dim != alpha.dim:
        raise DimensionError(f'Structure on R^{J.dim} at a cotangent point over R^{alpha.dim}')


def jhat_pullback_omega(J: AlmostComplexStructure, alpha: CotangentPoint) -> np.ndarray:
    """d(Jhat*theta) at alpha, where Jhat(alpha) = alpha o J and Jhat*theta = p_a J^a_i dx^i."""
    _check_base(J, alpha)
    jet = J.jet(alpha.x)
    j, dj = jet.value, jet.deriv
    # dj[a, i, m] = d_m J^a_i, so base[i, j] = p_a (d_i J^a_j - d_j J^a_i)
    grad = np.einsum('a,aim->im', alpha.p, dj)
    base = grad.T - grad
    zero = np.zeros_like(j)
    return np.block([[base, -j.T], [j, zero]])


def _g_block(nij: NijenhuisComponents, j: np.ndarray, p: np.ndarray) -> np.ndarray:
    contracted = np.einsum('a,ail->il', p, nij.full())
    return 0.5 * contracted @ j


def g_J(J: AlmostComplexStructure, alpha: CotangentPoint) -> np.ndarray:
    """g^J(V, W) = 1/2 alpha(N(pi_* V, J pi_* W)); only the base-base block is nonzero."""
    _check_base(J, alpha)
    jet = J.jet(alpha.x)
    block = _g_block(nijenhuis_from_jet(jet), jet.value, alpha.p)
    out = np.zeros((2 * alpha.dim, 2 * alpha.dim))
    out[: alpha.dim, : alpha.dim] = block
    return out


def g_J_expanded(J: AlmostComplexStructure, alpha: CotangentPoint) -> np.ndarray:
    """Same tensor as g_J, written out in first derivatives of J without going through N.

    G_ij = 1/2 p_a { (J^m_i J^l_j - J^m_j J^l_i) J^a_{l,m} + J^a_{i,j} - J^a_{j,i} }.
    Agreement with g_J uses J^2 = -Id.
    """
    _check_base(J, alpha)
    jet = J.jet(alpha.x)
    j, dj = jet.value, jet.deriv
    pdj = np.einsum('a,alm->lm', alpha.p, dj)
    quad = j.T @ pdj.T @ j  # quad[i, j] = J^m_i J^l_j p_a J^a_{l,m}
    direct = np.einsum('a,aij->ij', alpha.p, dj)
    block = 0.5 * (quad - quad.T + direct - direct.T)
    out = np.zeros((2 * alpha.dim, 2 * alpha.dim))
    out[: alpha.dim, : alpha.dim] = block
    return out


def twisted_form(J: AlmostComplexStructure, alpha: CotangentPoint) -> np.ndarray:
    """varpi^J = d(Jhat*theta) + g^J."""
    return jhat_pullback_omega(J, alpha) + g_J(J, alpha)


@dataclass(frozen=True)
class LiftedStructure:
    matrix: np.ndarray
    route: str

    @property
    def base_dim(self) -> int:
        return self.matrix.shape[0] // 2

    @property
    def base_block(self) -> np.ndarray:
        n = self.base_dim
        return self.matrix[:n, :n]

    @property
    def vertical_leak(self) -> np.ndarray:
        """Top-right block; zero because the lift maps vertical vectors to vertical vectors."""
        n = self.base_dim
        return self.matrix[:n, n:]

    @property
    def correction_block(self) -> np.ndarray:
        n = self.base_dim
        return self.matrix[n:, :n]

    @property
    def fiber_block(self) -> np.ndarray:
        n = self.base_dim
        return self.matrix[n:, n:]

    def apply(self, v) -> np.ndarray:
        return self.matrix @ np.asarray(v, dtype=float)

    def square_residual(self) -> float:
        m = self.matrix
        return float(np.max(np.abs(m @ m + np.eye(len(m)))))


def lifted_structure_definitional(J: AlmostComplexStructure, alpha: CotangentPoint) -> LiftedStructure:
    """V -> omega^-1(varpi^J(V, .), .) as one matrix product."""
    varpi = twisted_form(J, alpha)
    matrix = (varpi @ omega_inverse(alpha.dim)).T
    return LiftedStructure(matrix, 'definitional')


def lifted_structure_coordinates(J: AlmostComplexStructure, alpha: CotangentPoint) -> LiftedStructure:
    """J^a_i dx^i (x) d/dx^a + J^i_a dp_i (x) d/dp_a + C_ji dx^i (x) d/dp_j with

    C_ji = 1/2 p_a { (J^m_i J^l_j - J^m_j J^l_i) J^a_{l,m} - (J^a_{i,j} - J^a_{j,i}) }.
    """
    _check_base(J, alpha)
    jet = J.jet(alpha.x)
    j, dj = jet.value, jet.deriv
    n = alpha.dim
    pdj = np.einsum('a,alm->lm', alpha.p, dj)
    quad = j.T @ pdj.T @ j
    direct = np.einsum('a,aij->ij', alpha.p, dj)
    correction = 0.5 * ((quad - quad.T) - (direct - direct.T))  # indexed [i, j]
    matrix = np.zeros((2 * n, 2 * n))
    matrix[:n, :n] = j
    matrix[n:, n:] = j.T
    matrix[n:, :n] = correction.T
    return LiftedStructure(matrix, 'coordinates')


def lifted_structure(J: AlmostComplexStructure, alpha: CotangentPoint) -> LiftedStructure:
    return lifted_structure_coordinates(J, alpha)


def route_difference(J: AlmostComplexStructure, alpha: CotangentPoint) -> float:
    definitional = lifted_structure_definitional(J, alpha).matrix
    coordinates = lifted_structure_coordinates(J, alpha).matrix
    return float(np.max(np.abs(definitional - coordinates)))


def projection_residual(J: AlmostComplexStructure, alpha: CotangentPoint, lifted: Optional[LiftedStructure] = None) -> float:
    """max |pi_* o JJ - J o pi_*| as matrices from T(T*M) to TM."""
    lifted = lifted or lifted_structure(J, alpha)
    n = alpha.dim
    pi = np.hstack([np.eye(n), np.zeros((n, n))])
    return float(np.max(np.abs(pi @ lifted.matrix - J.matrix(alpha.x) @ pi)))


def eq32_residual(J: AlmostComplexStructure, alpha: CotangentPoint, v, w) -> float:
    """|omega(JJ V, W) - d(Jhat*theta)(V, W) - g^J(V, W)| with JJ from the coordinate route.

    V and W may also be matrices of column vectors; the worst pair is returned.
    """
    v = np.asarray(v, dtype=float)
    w = np.asarray(w, dtype=float)
    if v.shape[0] != 2 * alpha.dim or w.shape[0] != 2 * alpha.dim:
        raise DimensionError(f'Tangent vectors of shapes {v.shape}, {w.shape} at a point of T*R^{alpha.dim}')
    lifted = lifted_structure_coordinates(J, alpha)
    lhs = (lifted.matrix @ v).T @ omega(alpha.dim) @ w
    rhs = v.T @ twisted_form(J, alpha) @ w
    return float(np.max(np.abs(lhs - rhs)))
