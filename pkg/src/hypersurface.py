#!/usr/bin/env python3
"""Real hypersurfaces {rho = 0}, their J-invariant distribution and Levi forms.

The defining 1-form theta = (drho o J) is extended to the whole chart as
theta_i = rho_{,m} J^m_i so that its exterior derivative can be taken ambiently;
only its values on the distribution are meaningful.
"""

from dataclasses import dataclass
import functools
import logging
from typing import Optional, Sequence

import numpy as np
import scipy.linalg

from almost_complex import AlmostComplexStructure, nijenhuis_norm
import constants as c
from exceptions import (DegenerateGradient, DimensionError, DomainError, NoConvergence,
                        NotInDistribution, UnexpectedDimension)
from expression import BinOp, Const, Expression, parse
import jets

logger = logging.getLogger(__name__)


class Hypersurface:
    """Gamma = {x : rho(x) = 0} with |grad rho| bounded below on accepted samples."""

    def __init__(self, rho: Expression, gradient_floor: float = c.GRADIENT_FLOOR,
                 tol_surface: float = c.TOL_SURFACE, kind: str = 'custom', **params):
        if gradient_floor <= 0:
            raise ValueError(f'gradient_floor must be positive, got {gradient_floor}')
        self.rho = rho
        self.dim = rho.dim
        self.gradient_floor = float(gradient_floor)
        self.tol_surface = float(tol_surface)
        self.kind = kind
        self.params = params

    def __repr__(self):
        return f'Hypersurface({self.rho.source!r}, dim={self.dim})'

    @functools.lru_cache(maxsize=4096)
    def _cached_jet2(self, key: bytes) -> jets.Jet2:
        return self.rho.eval_jet2(np.frombuffer(key, dtype=float))

    def jet2(self, x) -> jets.Jet2:
        x = np.ascontiguousarray(x, dtype=float)
        if x.shape != (self.dim,):
            raise DimensionError(f'Point of shape {x.shape} for a hypersurface in R^{self.dim}')
        return self._cached_jet2(x.tobytes())

    def gradient(self, x) -> np.ndarray:
        return self.rho.eval_jet1(x).gradient

    def hessian(self, x) -> np.ndarray:
        return self.jet2(x).hessian

    def scaled(self, factor: float) -> 'Hypersurface':
        """The same zero set defined by factor * rho."""
        if factor == 0:
            raise ValueError('Scaling a defining function by zero')
        rho = Expression(BinOp('*', Const(float(factor)), self.rho.ast), self.dim)
        return Hypersurface(rho, self.gradient_floor * abs(factor), self.tol_surface,
                            self.kind, **self.params)

    def describe(self) -> dict:
        return {'kind': self.kind, 'rho': self.rho.source, **self.params}


def sphere(dim: int, radius: float = 1.0) -> Hypersurface:
    terms = ' + '.join(f'x{i}^2' for i in range(1, dim + 1))
    rho = parse(f'{terms} - {float(radius) ** 2!r}', dim)
    return Hypersurface(rho, kind='sphere', radius=float(radius))


def plane(dim: int, axis: Optional[int] = None) -> Hypersurface:
    """Levi-flat hyperplane {x_axis = 0}; axis defaults to the last coordinate."""
    axis = dim if axis is None else axis
    if not 1 <= axis <= dim:
        raise DimensionError(f'Plane axis {axis} outside 1..{dim}')
    return Hypersurface(parse(f'x{axis}', dim), kind='plane', axis=axis)


def heisenberg(dim: int) -> Hypersurface:
    """rho = |z'|^2 - y_n, the model strongly pseudoconvex quadric (positive Levi form)."""
    if dim < 4:
        raise DimensionError(f'The Heisenberg quadric needs dim >= 4, got {dim}')
    squares = ' + '.join(f'x{i}^2' for i in range(1, dim - 1))
    return Hypersurface(parse(f'{squares} - x{dim}', dim), kind='heisenberg')


def indefinite_quadric(dim: int) -> Hypersurface:
    """rho = y_n + |z_1|^2 - |z_2|^2 - ... - |z_{n-1}|^2; Levi form of mixed signature."""
    if dim < 6:
        raise DimensionError(f'An indefinite Levi form needs dim >= 6, got {dim}')
    negative = ' - '.join(f'x{i}^2' for i in range(3, dim - 1))
    return Hypersurface(parse(f'x{dim} + x1^2 + x2^2 - {negative}', dim), kind='indefinite_quadric')


def ellipsoid(dim: int, semi_axes: Sequence[float]) -> Hypersurface:
    if len(semi_axes) != dim or any(a <= 0 for a in semi_axes):
        raise DimensionError(f'Need {dim} positive semi-axes, got {list(semi_axes)}')
    terms = ' + '.join(f'x{i}^2 / {float(a) ** 2!r}' for i, a in enumerate(semi_axes, start=1))
    return Hypersurface(parse(f'{terms} - 1', dim), kind='ellipsoid',
                        semi_axes=[float(a) for a in semi_axes])


def custom(rho: str, dim: int, gradient_floor: float = c.GRADIENT_FLOOR) -> Hypersurface:
    return Hypersurface(parse(rho, dim), gradient_floor=gradient_floor)


def project_to_surface(surface: Hypersurface, x0, max_steps: int = c.NEWTON_MAX_STEPS) -> np.ndarray:
    """Newton iteration x <- x - rho(x) grad / |grad|^2 until |rho| <= tol_surface * (1 + |x0|)."""
    x = np.array(x0, dtype=float)
    if x.shape != (surface.dim,):
        raise DimensionError(f'Point of shape {x.shape} for a hypersurface in R^{surface.dim}')
    tol = surface.tol_surface * (1.0 + np.linalg.norm(x))
    for step in range(max_steps + 1):
        jet = surface.rho.eval_jet1(x)
        grad_norm = np.linalg.norm(jet.gradient)
        if grad_norm < surface.gradient_floor:
            raise DegenerateGradient(f'|grad rho| = {grad_norm:.3g} below {surface.gradient_floor} at {x}')
        if abs(jet.value) <= tol:
            logger.debug('Projected onto %r in %d steps', surface, step)
            return x
        x = x - jet.value * jet.gradient / grad_norm ** 2
    raise NoConvergence(f'Newton projection from {np.asarray(x0)} did not converge in {max_steps} steps')


def sample_surface(surface: Hypersurface, box: Sequence[float], n_points: int,
                   rng: np.random.Generator,
                   max_attempts: int = c.SAMPLE_ATTEMPTS_PER_POINT) -> np.ndarray:
    """Uniform draws in the box projected onto the surface; projections leaving the box are rejected."""
    lo, hi = float(box[0]), float(box[1])
    points = []
    rejected = 0
    for index in range(n_points):
        for _ in range(max_attempts):
            x0 = rng.uniform(lo, hi, surface.dim)
            try:
                x = project_to_surface(surface, x0)
            except (NoConvergence, DegenerateGradient, DomainError) as e:
                logger.debug('Rejected start %s: %s', x0, e)
                rejected += 1
                continue
            if np.all((x >= lo) & (x <= hi)):
                points.append(x)
                break
            rejected += 1
        else:
            raise NoConvergence(f'No surface point found for sample {index} after {max_attempts} attempts')
    if rejected:
        logger.warning('Rejected %d starting points while sampling %d points on %r', rejected, n_points, surface)
    return np.array(points).reshape(n_points, surface.dim)


def theta_form(surface: Hypersurface, J: AlmostComplexStructure, x) -> np.ndarray:
    """theta_i = rho_{,m} J^m_i, so theta(v) = drho(Jv)."""
    return J.matrix(x).T @ surface.gradient(x)


@dataclass(frozen=True)
class DistributionFrame:
    x: np.ndarray
    tangent_basis: np.ndarray
    d_basis: np.ndarray

    def invariance_residual(self, j: np.ndarray) -> float:
        """Size of the part of J * D that leaves span(D)."""
        image = j @ self.d_basis
        leak = image - self.d_basis @ (self.d_basis.T @ image)
        return float(np.max(np.abs(leak))) if leak.size else 0.0


def invariant_distribution(surface: Hypersurface, J: AlmostComplexStructure, x) -> DistributionFrame:
    """D_x = ker(drho) & ker(theta), dimension 2n - 2."""
    x = np.asarray(x, dtype=float)
    grad = surface.gradient(x)
    if np.linalg.norm(grad) < surface.gradient_floor:
        raise DegenerateGradient(f'|grad rho| below {surface.gradient_floor} at {x}')
    constraints = np.vstack([grad, theta_form(surface, J, x)])
    s = scipy.linalg.svdvals(constraints)
    if s[-1] <= c.TOL_MEMBERSHIP * s[0]:
        raise UnexpectedDimension(f'drho and theta are dependent at {x} (singular values {s})')
    tangent = scipy.linalg.null_space(grad[np.newaxis, :])
    d_basis = scipy.linalg.null_space(constraints)
    if d_basis.shape[1] != surface.dim - 2:
        raise UnexpectedDimension(f'Distribution has dimension {d_basis.shape[1]}, expected {surface.dim - 2}')
    return DistributionFrame(x, tangent, d_basis)


def levi_matrix(surface: Hypersurface, J: AlmostComplexStructure, x) -> np.ndarray:
    """dtheta as a skew matrix in ambient coordinates: dtheta[i, j] = d_i theta_j - d_j theta_i."""
    x = np.asarray(x, dtype=float)
    jet = surface.jet2(x)
    structure = J.jet(x)
    # d_i theta_j = rho_{,mi} J^m_j + rho_{,m} J^m_{j,i}
    partials = jet.hessian @ structure.value + np.einsum('m,mji->ij', jet.gradient, structure.deriv)
    return partials - partials.T


def _membership(surface: Hypersurface, J: AlmostComplexStructure, x, v) -> None:
    grad = surface.gradient(x)
    theta = theta_form(surface, J, x)
    tol = c.TOL_MEMBERSHIP * max(1.0, np.linalg.norm(v)) * max(1.0, np.linalg.norm(grad))
    if abs(grad @ v) > tol or abs(theta @ v) > tol:
        raise NotInDistribution(f'drho(v) = {grad @ v:.3g}, theta(v) = {theta @ v:.3g} at {x}')


def levi_form(surface: Hypersurface, J: AlmostComplexStructure, x, v) -> float:
    """L_x(v) = -dtheta(v, Jv)."""
    x = np.asarray(x, dtype=float)
    v = np.asarray(v, dtype=float)
    if v.shape != (surface.dim,):
        raise DimensionError(f'Vector of shape {v.shape} in R^{surface.dim}')
    _membership(surface, J, x, v)
    return float(-v @ levi_matrix(surface, J, x) @ (J.matrix(x) @ v))


def levi_bilinear(surface: Hypersurface, J: AlmostComplexStructure, x, v, w) -> float:
    """The bilinear form -dtheta(v, Jw) on D_x."""
    x = np.asarray(x, dtype=float)
    _membership(surface, J, x, np.asarray(v, dtype=float))
    _membership(surface, J, x, np.asarray(w, dtype=float))
    return float(-np.asarray(v) @ levi_matrix(surface, J, x) @ (J.matrix(x) @ np.asarray(w)))


def classify(eigenvalues: np.ndarray, threshold: float) -> str:
    if eigenvalues.size == 0 or np.any(np.abs(eigenvalues) <= threshold):
        return c.DEGENERATE
    if np.all(eigenvalues > 0):
        return c.POSITIVE
    if np.all(eigenvalues < 0):
        return c.NEGATIVE
    return c.INDEFINITE


@dataclass(frozen=True)
class LeviReport:
    x: np.ndarray
    bilinear: np.ndarray
    symmetric_part: np.ndarray
    eigenvalues: np.ndarray
    classification: str
    contact_check: bool
    contact_informational: bool
    contact_margin: float
    nijenhuis_norm: float


def levi_report(surface: Hypersurface, J: AlmostComplexStructure, x,
                tol_eig: float = c.TOL_EIG, tol_nijenhuis: float = c.TOL_RESIDUAL,
                frame: Optional[DistributionFrame] = None) -> LeviReport:
    """Levi form on D_x in an orthonormal frame and its classification.

    Eigenvalues count as zero below tol_eig * max(max |eigenvalue|, |grad rho|);
    the scale makes the classification invariant under rho -> c rho. contact_check
    asks whether dtheta is non-degenerate on D x D; it only characterizes contact
    distributions for integrable J, so it is flagged informational when |N| > tol_nijenhuis.
    """
    x = np.asarray(x, dtype=float)
    frame = frame or invariant_distribution(surface, J, x)
    d = frame.d_basis
    dtheta = levi_matrix(surface, J, x)
    bilinear = -d.T @ dtheta @ J.matrix(x) @ d
    symmetric = 0.5 * (bilinear + bilinear.T)
    eigenvalues = scipy.linalg.eigvalsh(symmetric)
    scale = max(float(np.max(np.abs(eigenvalues))) if eigenvalues.size else 0.0,
                float(np.linalg.norm(surface.gradient(x))))
    classification = classify(eigenvalues, tol_eig * scale)

    restricted = d.T @ dtheta @ d
    contact_check = bool(abs(np.linalg.det(restricted)) > tol_eig ** (surface.dim - 2))
    contact_margin = float(scipy.linalg.svdvals(restricted)[-1]) if restricted.size else 0.0
    n_norm = nijenhuis_norm(J, x)
    informational = n_norm > tol_nijenhuis
    if informational and contact_check:
        logger.warning('Contact check at %s is informational: |N| = %.3g', x, n_norm)
    return LeviReport(x, bilinear, symmetric, eigenvalues, classification, contact_check,
                      informational, contact_margin, n_norm)
