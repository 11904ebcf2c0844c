#!/usr/bin/env python3
"""Finite-difference oracles that recompute tensors from their definitions.

They only evaluate values (never jets), so they are independent of the
coordinate formulas they are compared against.
"""

from typing import Callable

import numpy as np

from almost_complex import AlmostComplexStructure
import constants as c
from cotangent_lift import CotangentPoint
from fields import default_steps
from hypersurface import Hypersurface

VectorField = Callable[[np.ndarray], np.ndarray]


def fd_jacobian(field: VectorField, x) -> np.ndarray:
    """Column m holds the central difference of `field` along x^m."""
    x = np.asarray(x, dtype=float)
    steps = default_steps(x, c.FD_STEP_GRADIENT)
    columns = []
    for m, h in enumerate(steps):
        e = np.zeros(len(x))
        e[m] = h
        columns.append((np.asarray(field(x + e)) - np.asarray(field(x - e))) / (2.0 * h))
    return np.stack(columns, axis=-1)


def lie_bracket(a: np.ndarray, da: np.ndarray, b: np.ndarray, db: np.ndarray) -> np.ndarray:
    """[A, B]^k = A^m d_m B^k - B^m d_m A^k from values and Jacobians (da[k, m] = d_m A^k)."""
    return db @ a - da @ b


def fd_lie_bracket(a: VectorField, b: VectorField, x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    return lie_bracket(a(x), fd_jacobian(a, x), b(x), fd_jacobian(b, x))


def nijenhuis_bracket_oracle(J: AlmostComplexStructure, x) -> np.ndarray:
    """Full N^a_il from N(v, w) = [JX, JY] - [X, Y] - J([X, JY] + [JX, Y]).

    X = e_i and Y = e_l are extended as constant fields, so the Jacobian of JX is
    the finite-difference derivative of column i of J and [X, Y] = 0.
    """
    x = np.asarray(x, dtype=float)
    d = J.dim
    j = J.value(x)
    dj = fd_jacobian(J.value, x)  # dj[a, i, m] ~ d_m J^a_i
    zero = np.zeros((d, d))
    basis = np.eye(d)
    out = np.zeros((d, d, d))
    for i in range(d):
        for l in range(d):
            x_i, x_l = basis[i], basis[l]
            jx_i, jx_l = j[:, i], j[:, l]
            d_jx_i, d_jx_l = dj[:, i, :], dj[:, l, :]
            out[:, i, l] = (lie_bracket(jx_i, d_jx_i, jx_l, d_jx_l)
                            - lie_bracket(x_i, zero, x_l, zero)
                            - j @ (lie_bracket(x_i, zero, jx_l, d_jx_l)
                                   + lie_bracket(jx_i, d_jx_i, x_l, zero)))
    return out


def fd_exterior_derivative(one_form: VectorField, z) -> np.ndarray:
    """Matrix D with D[k, l] = d_k s_l - d_l s_k for the 1-form with components s(z)."""
    jac = fd_jacobian(one_form, z)  # jac[l, k] = d_k s_l
    return jac.T - jac


def fd_jhat_pullback_omega(J: AlmostComplexStructure, alpha: CotangentPoint) -> np.ndarray:
    """d of the 1-form (x, p) -> p_a J^a_i(x) dx^i on T*M, by central differences."""
    d = J.dim
    jx = J.value

    def pulled_back_theta(z):
        x, p = z[:d], z[d:]
        return np.concatenate([jx(x).T @ p, np.zeros(d)])

    return fd_exterior_derivative(pulled_back_theta, np.concatenate([alpha.x, alpha.p]))


def fd_levi_form(surface: Hypersurface, J: AlmostComplexStructure, x, v,
                 alternative_extension: bool = False) -> float:
    """-dtheta(v, Jv) with dtheta taken by finite differences of the ambient 1-form.

    With `alternative_extension` the 1-form is replaced by theta + (1 + x1^2) drho,
    which agrees with theta on the distribution and must give the same value.
    """
    x = np.asarray(x, dtype=float)
    v = np.asarray(v, dtype=float)
    jx = J.value

    def theta(y):
        grad = surface.rho.eval_jet1(y).gradient
        form = jx(y).T @ grad
        if alternative_extension:
            form = form + (1.0 + y[0] ** 2) * grad
        return form

    dtheta = fd_exterior_derivative(theta, x)
    return float(-v @ dtheta @ (jx(x) @ v))
