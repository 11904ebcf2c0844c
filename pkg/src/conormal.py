#!/usr/bin/env python3
"""Conormal bundle of a hypersurface and the checks of its total reality for the lifted structure.

A conormal point over x in Gamma is alpha = lambda * drho|_x. Curves
t -> lambda(t) drho|_{x(t)} inside the bundle have velocity
(xdot, lambdadot grad rho + lambda Hess rho xdot), which gives the tangent spaces
used throughout this module.
"""

from dataclasses import dataclass
import logging
from typing import Optional, Union

import numpy as np
import scipy.linalg

from almost_complex import AlmostComplexStructure, nijenhuis
import constants as c
from cotangent_lift import CotangentPoint, lifted_structure, omega
from exceptions import DimensionError, NotInDistribution, RankDeficient
from hypersurface import (DistributionFrame, Hypersurface, invariant_distribution, levi_matrix,
                          LeviReport, levi_report, theta_form)
import utils

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ConormalPoint:
    x: np.ndarray
    lam: float
    alpha: CotangentPoint

    @classmethod
    def build(cls, surface: Hypersurface, x, lam: float,
              lambda_min: float = c.LAMBDA_MIN) -> 'ConormalPoint':
        if not abs(lam) >= lambda_min:
            raise ValueError(f'|lambda| = {abs(lam):.3g} is below {lambda_min}: the zero section is excluded')
        x = np.array(x, dtype=float)
        return cls(x, float(lam), CotangentPoint(x, lam * surface.gradient(x)))

    def annihilation_residual(self, frame: DistributionFrame) -> float:
        """max |alpha(u)| over the tangent columns of T_x Gamma."""
        return utils.max_abs(self.alpha.p @ frame.tangent_basis)


@dataclass(frozen=True)
class ConormalTangentBasis:
    """`matrix` has orthonormal columns spanning T_alpha N*(Gamma); `raw` keeps the lifted columns."""

    matrix: np.ndarray
    raw: np.ndarray

    @property
    def rank(self) -> int:
        return self.matrix.shape[1]


def conormal_tangent_basis(surface: Hypersurface, cp: ConormalPoint,
                           frame: Optional[DistributionFrame] = None) -> ConormalTangentBasis:
    """Columns (u_k, lambda Hess rho u_k) for u_k in T_x Gamma and (0, grad rho), orthonormalized."""
    n = surface.dim
    tangent = frame.tangent_basis if frame is not None else scipy.linalg.null_space(surface.gradient(cp.x)[np.newaxis, :])
    hess = surface.hessian(cp.x)
    lifted = np.vstack([tangent, cp.lam * hess @ tangent])
    fiber = np.concatenate([np.zeros(n), surface.gradient(cp.x)])[:, np.newaxis]
    raw = np.hstack([lifted, fiber])
    basis, rank = utils.orthonormal_columns(raw)
    if rank < n:
        raise RankDeficient(f'Conormal tangent space has numerical rank {rank} < {n} at {cp.x}')
    return ConormalTangentBasis(basis, raw)


def constraint_residual(surface: Hypersurface, cp: ConormalPoint, columns: np.ndarray) -> float:
    """Largest violation of drho(xdot) = 0 and pdot - lambda Hess xdot in span(grad rho)."""
    n = surface.dim
    grad = surface.gradient(cp.x)
    unit = grad / np.linalg.norm(grad)
    xdot, pdot = columns[:n], columns[n:]
    tangency = grad @ xdot
    defect = pdot - cp.lam * surface.hessian(cp.x) @ xdot
    off_ray = defect - np.outer(unit, unit @ defect)
    return max(utils.max_abs(tangency), utils.max_abs(off_ray))


def corrupted_basis(surface: Hypersurface, cp: ConormalPoint, basis: ConormalTangentBasis) -> np.ndarray:
    """Raw basis with one base-lifted column kicked by (0, e_j).

    e_j is the coordinate axis closest to T_x Gamma and the kicked column is the one
    least aligned with it, so the remaining columns pair with the kick through
    omega((0, e_j), (u, .)) = e_j . u and the result is far from Lagrangian.
    """
    n = surface.dim
    grad = surface.gradient(cp.x)
    axis = int(np.argmin(np.abs(grad) / np.linalg.norm(grad)))
    tangent_columns = basis.raw[:n, : n - 1]
    kicked = int(np.argmin(np.abs(tangent_columns[axis])))
    corrupted = basis.raw.copy()
    corrupted[n + axis, kicked] += 1.0
    return corrupted


def lagrangian_residual(cp: ConormalPoint, basis: Union[ConormalTangentBasis, np.ndarray]) -> float:
    """max |omega(b_i, b_j)| over column pairs."""
    columns = basis.matrix if isinstance(basis, ConormalTangentBasis) else np.asarray(basis, dtype=float)
    return utils.max_abs(columns.T @ omega(cp.alpha.dim) @ columns)


@dataclass(frozen=True)
class TotalRealityResult:
    dim_intersection: int
    margin: float
    singular_values: np.ndarray
    dhat_basis: np.ndarray

    @property
    def totally_real(self) -> bool:
        return self.dim_intersection == 0


def total_reality(J: AlmostComplexStructure, surface: Hypersurface, cp: ConormalPoint,
                  basis: Optional[ConormalTangentBasis] = None,
                  tol_angle: float = c.TOL_ANGLE) -> TotalRealityResult:
    """Principal angles between W = T_alpha N*(Gamma) and its image under the lifted structure.

    Cosines within tol_angle of 1 count as a common direction. The margin is the
    smallest principal angle, zero once a common direction exists.
    """
    basis = basis or conormal_tangent_basis(surface, cp)
    w = basis.matrix
    image, rank = utils.orthonormal_columns(lifted_structure(J, cp.alpha).matrix @ w)
    if rank < w.shape[1]:
        raise RankDeficient(f'Image of the conormal tangent space has rank {rank} at {cp.x}')
    cosines, vectors = utils.principal_cosines(w, image)
    dim_intersection = int(np.count_nonzero(cosines >= 1.0 - tol_angle))
    margin = 0.0 if dim_intersection else float(np.arccos(cosines[0]))
    dhat = image @ vectors[:, :dim_intersection]
    if dim_intersection:
        logger.debug('W and JW share %d directions at x=%s, lambda=%s', dim_intersection, cp.x, cp.lam)
    return TotalRealityResult(dim_intersection, margin, cosines, dhat)


@dataclass(frozen=True)
class Lemma31Result:
    vacuous: bool
    rank: int
    min_base_singular_value: float
    distribution_residual: float

    @property
    def passed(self) -> bool:
        if self.vacuous:
            return True
        return (self.min_base_singular_value > c.TOL_RESIDUAL
                and self.distribution_residual <= c.TOL_RESIDUAL)


def lemma31_check(J: AlmostComplexStructure, surface: Hypersurface, cp: ConormalPoint,
                  dhat_basis: np.ndarray) -> Lemma31Result:
    """pi_* restricted to W & JW is injective and lands in D_x.

    Injectivity is the same statement as "no common direction is vertical", so one
    singular value covers both.
    """
    n = surface.dim
    if dhat_basis.size == 0 or dhat_basis.shape[1] == 0:
        return Lemma31Result(True, 0, float('inf'), 0.0)
    base = dhat_basis[:n]
    s = scipy.linalg.svdvals(base)
    rank = int(np.count_nonzero(s > c.TOL_RESIDUAL))
    grad = surface.gradient(cp.x)
    theta = theta_form(surface, J, cp.x)
    residual = max(utils.max_abs(grad @ base), utils.max_abs(theta @ base))
    return Lemma31Result(False, rank, float(s[-1]), residual)


def eq35_residual(J: AlmostComplexStructure, surface: Hypersurface, cp: ConormalPoint, v, w) -> float:
    """|lambda dtheta(v, w) + 1/2 alpha(N(v, Jw))| for v, w in D_x.

    Every common direction of W and JW would force this to vanish; with w = Jv the
    Nijenhuis term drops out and what is left is |lambda| times the Levi form.
    """
    x = cp.x
    v = np.asarray(v, dtype=float)
    w = np.asarray(w, dtype=float)
    if v.shape != (surface.dim,) or w.shape != (surface.dim,):
        raise DimensionError(f'Vectors of shapes {v.shape}, {w.shape} in R^{surface.dim}')
    grad = surface.gradient(x)
    theta = theta_form(surface, J, x)
    for u in (v, w):
        tol = c.TOL_MEMBERSHIP * max(1.0, np.linalg.norm(u)) * max(1.0, np.linalg.norm(grad))
        if abs(grad @ u) > tol or abs(theta @ u) > tol:
            raise NotInDistribution(f'drho = {grad @ u:.3g}, theta = {theta @ u:.3g} at {x}')
    j = J.matrix(x)
    bracket = nijenhuis(J, x).apply(v, j @ w)
    return float(abs(cp.lam * (v @ levi_matrix(surface, J, x) @ w) + 0.5 * cp.alpha.p @ bracket))


@dataclass(frozen=True)
class ContactCertificate:
    """dtheta restricted to D x D: its smallest singular value and whether J is integrable there."""

    margin: float
    integrable: bool

    @property
    def certifies(self) -> bool:
        return self.integrable and self.margin > c.TOL_EIG


def contact_certificate(surface: Hypersurface, J: AlmostComplexStructure, x,
                        tol_nijenhuis: float = c.TOL_RESIDUAL,
                        report: Optional[LeviReport] = None) -> ContactCertificate:
    """Every v in D has a partner w in D with dtheta(v, w) != 0 iff the restricted form is non-singular."""
    if report is None:
        report = levi_report(surface, J, x, tol_nijenhuis=tol_nijenhuis,
                             frame=invariant_distribution(surface, J, x))
    return ContactCertificate(report.contact_margin, not report.contact_informational)
