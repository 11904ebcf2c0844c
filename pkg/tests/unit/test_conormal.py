# Copyright 2024 dwellir
# See LICENSE file for licensing details.

import unittest

import numpy as np

from almost_complex import conjugated_structure, sheared_structure, standard_structure
import constants as c
from conormal import (ConormalPoint, conormal_tangent_basis, constraint_residual, contact_certificate,
                      corrupted_basis, eq35_residual, lagrangian_residual, lemma31_check,
                      total_reality)
from exceptions import DimensionError, NotInDistribution
import hypersurface
from hypersurface import invariant_distribution, levi_form, levi_report, sample_surface

STANDARD = standard_structure(4)
PERTURBED = conjugated_structure(4, 0.05)
SPHERE = hypersurface.sphere(4)
ELLIPSOID = hypersurface.ellipsoid(4, [1.0, 1.25, 1.5, 2.0])
PLANE = hypersurface.plane(4)
LAMBDAS = (1.0, -1.0, 0.5, -0.5, 0.1, -0.1, 10.0, -10.0)


def _points(surface, n: int, seed: int, box=(-1.5, 1.5)):
    return sample_surface(surface, box, n, np.random.default_rng(seed))


class TestConormalPoint(unittest.TestCase):

    def test_build(self):
        x = np.array([1.0, 0.0, 0.0, 0.0])
        cp = ConormalPoint.build(SPHERE, x, -2.0)
        np.testing.assert_array_equal(cp.alpha.p, [-4.0, 0.0, 0.0, 0.0])
        self.assertEqual(cp.lam, -2.0)
        frame = invariant_distribution(SPHERE, STANDARD, x)
        self.assertLessEqual(cp.annihilation_residual(frame), 1e-15)

    def test_zero_section_excluded(self):
        with self.assertRaises(ValueError):
            ConormalPoint.build(SPHERE, [1.0, 0.0, 0.0, 0.0], 0.0)
        with self.assertRaises(ValueError):
            ConormalPoint.build(SPHERE, [1.0, 0.0, 0.0, 0.0], 1e-8)


class TestTangentBasis(unittest.TestCase):

    def test_lagrangian(self):
        for surface, J in ((SPHERE, PERTURBED), (ELLIPSOID, STANDARD), (PLANE, STANDARD)):
            for x in _points(surface, 10, 51, box=(-2.5, 2.5)):
                for lam in LAMBDAS:
                    cp = ConormalPoint.build(surface, x, lam)
                    basis = conormal_tangent_basis(surface, cp)
                    self.assertEqual(basis.rank, 4)
                    np.testing.assert_allclose(basis.matrix.T @ basis.matrix, np.eye(4), atol=1e-12)
                    self.assertLessEqual(lagrangian_residual(cp, basis), 1e-9)
                    self.assertLessEqual(lagrangian_residual(cp, basis.raw), 1e-9 * max(1.0, abs(lam)))
                    self.assertLessEqual(constraint_residual(surface, cp, basis.raw), 1e-9 * max(1.0, abs(lam)))

    def test_frame_and_null_space_agree(self):
        x = _points(SPHERE, 1, 52)[0]
        cp = ConormalPoint.build(SPHERE, x, 2.0)
        frame = invariant_distribution(SPHERE, STANDARD, x)
        first = conormal_tangent_basis(SPHERE, cp, frame).matrix
        second = conormal_tangent_basis(SPHERE, cp).matrix
        # same subspace: projections agree
        np.testing.assert_allclose(first @ first.T, second @ second.T, atol=1e-12)

    def test_corrupted_basis_is_not_lagrangian(self):
        for surface in (SPHERE, PLANE):
            for x in _points(surface, 10, 53):
                for lam in LAMBDAS:
                    cp = ConormalPoint.build(surface, x, lam)
                    basis = conormal_tangent_basis(surface, cp)
                    self.assertGreater(lagrangian_residual(cp, corrupted_basis(surface, cp, basis)),
                                       c.CORRUPTION_FLOOR)

    def test_constraint_residual_detects_off_bundle_columns(self):
        x = np.array([1.0, 0.0, 0.0, 0.0])
        cp = ConormalPoint.build(SPHERE, x, 1.0)
        # a radial base component leaves the surface
        column = np.array([[1.0], [0.0], [0.0], [0.0], [2.0], [0.0], [0.0], [0.0]])
        self.assertGreater(constraint_residual(SPHERE, cp, column), 0.5)


class TestTotalReality(unittest.TestCase):

    def test_sphere_is_totally_real(self):
        for J in (STANDARD, PERTURBED, sheared_structure(4, 0.1)):
            for x in _points(SPHERE, 10, 61):
                for lam in LAMBDAS:
                    result = total_reality(J, SPHERE, ConormalPoint.build(SPHERE, x, lam))
                    self.assertTrue(result.totally_real, (J.describe(), x, lam))
                    self.assertEqual(result.dhat_basis.shape, (8, 0))

    def test_sphere_margin_floor(self):
        for x in _points(SPHERE, 10, 62):
            for lam in LAMBDAS:
                result = total_reality(STANDARD, SPHERE, ConormalPoint.build(SPHERE, x, lam))
                self.assertGreaterEqual(result.margin, 0.049)
                self.assertEqual(len(result.singular_values), 4)

    def test_ellipsoid_is_totally_real(self):
        for x in _points(ELLIPSOID, 10, 63, box=(-2.5, 2.5)):
            for lam in LAMBDAS:
                self.assertEqual(total_reality(STANDARD, ELLIPSOID,
                                               ConormalPoint.build(ELLIPSOID, x, lam)).dim_intersection, 0)

    def test_plane_is_not_totally_real(self):
        for x in _points(PLANE, 10, 64, box=(-1.0, 1.0)):
            for lam in LAMBDAS:
                cp = ConormalPoint.build(PLANE, x, lam)
                result = total_reality(STANDARD, PLANE, cp)
                self.assertEqual(result.dim_intersection, 2)
                self.assertEqual(result.margin, 0.0)
                self.assertFalse(result.totally_real)
                lemma = lemma31_check(STANDARD, PLANE, cp, result.dhat_basis)
                self.assertFalse(lemma.vacuous)
                self.assertEqual(lemma.rank, 2)
                self.assertTrue(lemma.passed)

    def test_lemma_is_vacuous_without_common_directions(self):
        x = np.array([0.0, 0.6, 0.0, 0.8])
        cp = ConormalPoint.build(SPHERE, x, 1.0)
        result = total_reality(STANDARD, SPHERE, cp)
        lemma = lemma31_check(STANDARD, SPHERE, cp, result.dhat_basis)
        self.assertTrue(lemma.vacuous)
        self.assertTrue(lemma.passed)

    def test_joint_rescaling(self):
        # rho -> k rho with lambda -> lambda / k leaves the covector and the bundle unchanged
        x = _points(SPHERE, 1, 65)[0]
        for k in (0.5, 4.0):
            scaled = SPHERE.scaled(k)
            for lam in (1.0, -0.5):
                base = total_reality(PERTURBED, SPHERE, ConormalPoint.build(SPHERE, x, lam))
                other = total_reality(PERTURBED, scaled, ConormalPoint.build(scaled, x, lam / k))
                self.assertEqual(base.dim_intersection, other.dim_intersection)
                self.assertAlmostEqual(base.margin, other.margin, places=9)

    def test_indefinite_quadric(self):
        surface = hypersurface.indefinite_quadric(6)
        J = standard_structure(6)
        for x in _points(surface, 5, 66, box=(-0.5, 0.5)):
            for lam in (1.0, -2.0):
                self.assertEqual(total_reality(J, surface, ConormalPoint.build(surface, x, lam)).dim_intersection, 0)


class TestLeviCertificate(unittest.TestCase):

    def test_certificate_equals_levi_form(self):
        for x in _points(SPHERE, 10, 71):
            frame = invariant_distribution(SPHERE, STANDARD, x)
            j = STANDARD.matrix(x)
            for lam in LAMBDAS:
                cp = ConormalPoint.build(SPHERE, x, lam)
                for v in frame.d_basis.T:
                    residual = eq35_residual(STANDARD, SPHERE, cp, v, j @ v)
                    expected = abs(lam) * abs(levi_form(SPHERE, STANDARD, x, v))
                    self.assertLessEqual(abs(residual - expected), 1e-6 * expected)

    def test_nijenhuis_term_drops_out_for_w_equal_jv(self):
        x = np.array([0.0, 0.6, 0.0, 0.8])
        frame = invariant_distribution(SPHERE, PERTURBED, x)
        j = PERTURBED.matrix(x)
        cp = ConormalPoint.build(SPHERE, x, 3.0)
        for v in frame.d_basis.T:
            expected = 3.0 * abs(levi_form(SPHERE, PERTURBED, x, v))
            self.assertAlmostEqual(eq35_residual(PERTURBED, SPHERE, cp, v, j @ v), expected, places=9)

    def test_rejects_vectors_outside_distribution(self):
        x = np.array([1.0, 0.0, 0.0, 0.0])
        cp = ConormalPoint.build(SPHERE, x, 1.0)
        with self.assertRaises(NotInDistribution):
            eq35_residual(STANDARD, SPHERE, cp, x, np.array([0.0, 0.0, 1.0, 0.0]))
        with self.assertRaises(DimensionError):
            eq35_residual(STANDARD, SPHERE, cp, np.ones(3), np.ones(3))

    def test_contact_certificate(self):
        x = np.array([1.0, 0.0, 0.0, 0.0])
        self.assertTrue(contact_certificate(ELLIPSOID, STANDARD, x).certifies)
        self.assertFalse(contact_certificate(PLANE, STANDARD, np.zeros(4)).certifies)
        perturbed = contact_certificate(SPHERE, PERTURBED, np.array([0.0, 0.6, 0.0, 0.8]))
        self.assertFalse(perturbed.integrable)
        self.assertFalse(perturbed.certifies)
        self.assertGreater(contact_certificate(SPHERE, STANDARD, x).margin, 1.0)
        report = levi_report(ELLIPSOID, STANDARD, x)
        self.assertEqual(contact_certificate(ELLIPSOID, STANDARD, x, report=report),
                         contact_certificate(ELLIPSOID, STANDARD, x))


if __name__ == '__main__':
    unittest.main()
