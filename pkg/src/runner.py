#!/usr/bin/env python3
"""Runs a scenario: sampling, then per-point stages, merged in sample order."""

from concurrent.futures import ThreadPoolExecutor
import logging
from typing import Callable, List

import numpy as np

from almost_complex import nijenhuis, validate
from conormal import (ConormalPoint, conormal_tangent_basis, constraint_residual, contact_certificate,
                      corrupted_basis, eq35_residual, lagrangian_residual, lemma31_check, total_reality)
import constants as c
from cotangent_lift import (g_J, g_J_expanded, lifted_structure_coordinates,
                            lifted_structure_definitional, eq32_residual, projection_residual)
from exceptions import AcxError, StageError
from hypersurface import invariant_distribution, levi_form, levi_report, sample_surface
import oracles
from report import RunReport, summarize
from scenario import Scenario, lambda_grid
import utils

logger = logging.getLogger(__name__)

PER_LAMBDA_MODES = (c.MODE_CHECK, c.MODE_TOTAL_REALITY)


def _floats(values) -> list:
    return [float(v) for v in np.ravel(values)]


def _relative_error(value: float, reference: float, floor: float = 1.0) -> float:
    return float(abs(value - reference) / max(abs(reference), floor))


class ScenarioRun:
    """One execution of a scenario in a given mode; `run` is deterministic given the seed."""

    def __init__(self, scenario: Scenario, mode: str = c.MODE_CHECK):
        if mode not in c.MODES:
            raise ValueError(f'Unknown mode {mode!r}, choose from {", ".join(c.MODES)}')
        self.scenario = scenario
        self.mode = mode
        self.structure = scenario.build_structure()
        self.surface = scenario.build_surface()
        self.tolerances = scenario.tolerances

    def _stage(self, stage: str, index: int, fn: Callable, *args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except (AcxError, np.linalg.LinAlgError) as e:
            raise StageError(stage, index, e) from e

    def sample_points(self, rng: np.random.Generator) -> np.ndarray:
        s = self.scenario.sampling
        points = []
        for index in range(s.n_points):
            points.append(self._stage('sampling', index, sample_surface, self.surface, s.box, 1, rng)[0])
        return np.array(points).reshape(s.n_points, self.surface.dim)

    def _nijenhuis_fields(self, x: np.ndarray, rng: np.random.Generator) -> dict:
        J = self.structure
        components = nijenhuis(J, x)
        v = rng.standard_normal(J.dim)
        v /= np.linalg.norm(v)
        full = components.full()
        oracle = oracles.nijenhuis_bracket_oracle(J, x)
        return {
            'nijenhuis_norm': components.norm(),
            'nijenhuis_vjv': utils.max_abs(components.apply(v, J.matrix(x) @ v)),
            'nijenhuis_oracle_error': utils.max_abs(full - oracle) / max(1.0, utils.max_abs(full)),
        }

    def _levi_fields(self, x: np.ndarray, frame) -> dict:
        J, surface = self.structure, self.surface
        report = levi_report(surface, J, x, tol_eig=self.tolerances.tol_eig,
                             tol_nijenhuis=self.tolerances.tol_residual, frame=frame)
        certificate = contact_certificate(surface, J, x, report=report)
        oracle_error = extension_error = 0.0
        for v in frame.d_basis.T:
            value = levi_form(surface, J, x, v)
            oracle_error = max(oracle_error, _relative_error(value, oracles.fd_levi_form(surface, J, x, v)))
            alternative = oracles.fd_levi_form(surface, J, x, v, alternative_extension=True)
            extension_error = max(extension_error, _relative_error(alternative, value))
        return {
            'levi_classification': report.classification,
            'levi_eigenvalues': _floats(report.eigenvalues),
            'contact_check': report.contact_check,
            'contact_informational': report.contact_informational,
            'contact_margin': report.contact_margin,
            'contact_certifies': certificate.certifies,
            'distribution_invariance': frame.invariance_residual(J.matrix(x)),
            'levi_oracle_error': oracle_error,
            'levi_extension_error': extension_error,
        }

    def _lift_fields(self, cp: ConormalPoint, basis, rng: np.random.Generator) -> dict:
        J, alpha = self.structure, cp.alpha
        coordinates = lifted_structure_coordinates(J, alpha)
        definitional = lifted_structure_definitional(J, alpha)
        pairs = c.EQ32_PAIRS_PER_RECORD
        v = rng.standard_normal((2 * J.dim, pairs))
        w = rng.standard_normal((2 * J.dim, pairs))
        return {
            'lift_square_residual': max(coordinates.square_residual(), definitional.square_residual()),
            'route_difference': utils.max_abs(coordinates.matrix - definitional.matrix),
            'projection_residual': projection_residual(J, alpha, coordinates),
            'vertical_leak': utils.max_abs(coordinates.vertical_leak),
            'g_expansion_difference': utils.max_abs(g_J(J, alpha) - g_J_expanded(J, alpha)),
            'eq32_residual': max(eq32_residual(J, alpha, v, w),
                                 eq32_residual(J, alpha, basis.matrix, basis.matrix)),
        }

    def _conormal_fields(self, cp: ConormalPoint, basis, frame) -> dict:
        J, surface = self.structure, self.surface
        result = total_reality(J, surface, cp, basis, tol_angle=self.tolerances.tol_angle)
        lemma = lemma31_check(J, surface, cp, result.dhat_basis)
        j = J.matrix(cp.x)
        eq35, certificate_error = [], 0.0
        for v in frame.d_basis.T:
            residual = eq35_residual(J, surface, cp, v, j @ v)
            expected = abs(cp.lam) * abs(levi_form(surface, J, cp.x, v))
            eq35.append(residual)
            certificate_error = max(certificate_error, _relative_error(residual, expected, floor=1e-12))
        return {
            'dim_intersection': result.dim_intersection,
            'margin': result.margin,
            'singular_values': _floats(result.singular_values),
            'lagrangian_residual': lagrangian_residual(cp, basis),
            'constraint_residual': constraint_residual(surface, cp, basis.raw),
            'annihilation_residual': cp.annihilation_residual(frame),
            'corrupted_lagrangian_residual': lagrangian_residual(cp, corrupted_basis(surface, cp, basis)),
            'lemma31_vacuous': lemma.vacuous,
            'lemma31_passed': lemma.passed,
            'lemma31_rank': lemma.rank,
            'lemma31_residual': lemma.distribution_residual,
            'eq35_residuals': _floats(eq35),
            'eq35_certificate_error': certificate_error,
        }

    def evaluate_point(self, index: int, x: np.ndarray, lambdas: List[float],
                       seed: np.random.SeedSequence) -> List[dict]:
        rng = np.random.default_rng(seed)
        J, surface = self.structure, self.surface
        base = {'sample': index, 'x': _floats(x), 'lambda_index': None, 'lambda': None}
        base['acs_residual'] = self._stage('acs', index, validate, J, x, self.tolerances.tol_acs).residual
        if self.mode in (c.MODE_CHECK, c.MODE_NIJENHUIS):
            base.update(self._stage('nijenhuis', index, self._nijenhuis_fields, x, rng))
        if self.mode == c.MODE_NIJENHUIS:
            return [base]
        frame = self._stage('levi', index, invariant_distribution, surface, J, x)
        if self.mode in (c.MODE_CHECK, c.MODE_LEVI):
            base.update(self._stage('levi', index, self._levi_fields, x, frame))
        if self.mode == c.MODE_LEVI:
            return [base]

        records = []
        for k, lam in enumerate(lambdas):
            record = dict(base, lambda_index=k)
            record['lambda'] = lam
            cp = self._stage('conormal', index, ConormalPoint.build, surface, x, lam)
            basis = self._stage('conormal', index, conormal_tangent_basis, surface, cp, frame)
            if self.mode == c.MODE_CHECK:
                record.update(self._stage('lift', index, self._lift_fields, cp, basis, rng))
            record.update(self._stage('total_reality', index, self._conormal_fields, cp, basis, frame))
            records.append(record)
        return records

    def run(self) -> RunReport:
        sampling_rng, lambda_rng, pair_seeds = self.scenario.streams()
        points = self.sample_points(sampling_rng)
        lambdas = lambda_grid(self.scenario.sampling.n_lambdas, lambda_rng) if self.mode in PER_LAMBDA_MODES else []
        seeds = pair_seeds.spawn(len(points))
        workers = utils.worker_count()
        logger.info('Running %s (%s) on %d points, %d lambdas, %d workers',
                    self.scenario.name, self.mode, len(points), len(lambdas), workers)
        with ThreadPoolExecutor(max_workers=workers) as pool:
            per_point = list(pool.map(self.evaluate_point, range(len(points)), points,
                                      [lambdas] * len(points), seeds))
        records = [record for batch in per_point for record in batch]
        summary = summarize(records, self.tolerances.model_dump(), self.scenario.expect.model_dump())
        return RunReport(self.scenario.describe(), self.mode, records, summary)


def run_scenario(scenario: Scenario, mode: str = c.MODE_CHECK) -> RunReport:
    return ScenarioRun(scenario, mode).run()
