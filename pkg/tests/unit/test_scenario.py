# Copyright 2024 dwellir
# See LICENSE file for licensing details.

import copy
import os
from pathlib import Path
import tempfile
import unittest
from unittest import mock

import numpy as np

import constants as c
from exceptions import ConfigError, DegenerateGradient, ReportIoError, StageError
from report import RunReport, emit_report, parse_records, summarize, write_report
from runner import ScenarioRun, run_scenario
from scenario import BUILTINS, builtin_scenario, lambda_grid, load_scenario, resolve_scenario, scenario_from_dict
import utils

SCENARIO_TOML = """
[scenario]
name = "small-sphere"
dim = 4

[structure]
kind = "conjugated"
epsilon = 0.05

[surface]
kind = "sphere"
radius = 1.0

[sampling]
box = [-1.5, 1.5]
n_points = 2
n_lambdas = 1
seed = 7

[expect]
verdict = "TotallyReal"
"""


def small(name: str, n_points: int = 2, n_lambdas: int = 1, **surface):
    data = copy.deepcopy(BUILTINS[name])
    data['sampling'].update(n_points=n_points, n_lambdas=n_lambdas)
    data['surface'].update(surface)
    return scenario_from_dict(data, name)


class TestScenario(unittest.TestCase):

    def test_builtins_validate(self):
        for name in BUILTINS:
            s = builtin_scenario(name)
            self.assertEqual(s.name, name)
            self.assertGreaterEqual(s.dim, 4)
            self.assertIsNotNone(s.expect.verdict)
        self.assertEqual(builtin_scenario('indefinite-quadric').dim, 6)

    def test_unknown_builtin(self):
        with self.assertRaises(ConfigError):
            builtin_scenario('torus')

    def test_invalid_documents(self):
        base = copy.deepcopy(BUILTINS['sphere-std'])
        broken = []
        for section, update in (('scenario', {'dim': 5}), ('scenario', {'dim': 2}),
                                ('surface', {'radus': 2.0}), ('surface', {'kind': 'custom'}),
                                ('surface', {'kind': 'custom', 'rho': 'x1 +'}),
                                ('surface', {'kind': 'custom', 'rho': 'x9'}),
                                ('surface', {'kind': 'ellipsoid'}), ('surface', {'scale': 0.0}),
                                ('structure', {'kind': 'custom'}), ('structure', {'kind': 'twisted'}),
                                ('sampling', {'n_points': 0}), ('sampling', {'box': [1.0, -1.0]}),
                                ('expect', {'verdict': 'Real'})):
            data = copy.deepcopy(base)
            data[section] = dict(data[section], **update)
            broken.append(data)
        no_seed = copy.deepcopy(base)
        del no_seed['sampling']['seed']
        broken.append(no_seed)
        broken.append(dict(copy.deepcopy(base), plots={'enabled': True}))
        for data in broken:
            with self.assertRaises(ConfigError, msg=str(data)):
                scenario_from_dict(data)

    def test_overrides(self):
        s = builtin_scenario('sphere-std').with_overrides(seed=3, samples=5)
        self.assertEqual((s.sampling.seed, s.sampling.n_points), (3, 5))
        with self.assertRaises(ConfigError):
            builtin_scenario('sphere-std').with_overrides(samples=0)

    def test_load_toml(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = Path(tmp) / 'small.toml'
            path.write_text(SCENARIO_TOML)
            s = resolve_scenario(str(path))
            self.assertEqual(s.name, 'small-sphere')
            self.assertEqual(s.build_structure().describe()['kind'], 'conjugated')
            self.assertEqual(s.tolerances.tol_acs, c.TOL_ACS)
            (Path(tmp) / 'bad.toml').write_text('[scenario\nname = ')
            with self.assertRaises(ConfigError):
                load_scenario(Path(tmp) / 'bad.toml')
            with self.assertRaises(ConfigError):
                load_scenario(Path(tmp) / 'missing.toml')

    def test_shipped_scenario_files(self):
        files = sorted((Path(__file__).resolve().parents[2] / 'scenarios').glob('*.toml'))
        self.assertTrue(files)
        for path in files:
            s = load_scenario(path)
            self.assertEqual(s.name, path.stem)

    def test_lambda_grid(self):
        grid = lambda_grid(8, np.random.default_rng(1))
        self.assertEqual(len(grid), len(c.LAMBDA_GRID) + 8)
        self.assertEqual(tuple(grid[:4]), c.LAMBDA_GRID)
        for lam in grid[4:]:
            self.assertTrue(c.LAMBDA_RANGE[0] <= abs(lam) <= c.LAMBDA_RANGE[1])
        self.assertEqual(grid, lambda_grid(8, np.random.default_rng(1)))

    def test_streams_are_seeded(self):
        s = builtin_scenario('heisenberg')
        first, second = s.streams(), s.streams()
        self.assertEqual(first[0].random(), second[0].random())
        self.assertEqual(first[1].random(), second[1].random())


class TestRun(unittest.TestCase):

    def test_sphere(self):
        report = run_scenario(small('sphere-std'))
        s = report.summary
        self.assertEqual(s['n_records'], 2 * (len(c.LAMBDA_GRID) + 1))
        self.assertEqual(s['total_reality_verdict'], c.TOTALLY_REAL)
        self.assertEqual(s['levi_classification_histogram'][c.POSITIVE], 2)
        self.assertEqual(s['breaches'], [])
        self.assertTrue(s['acs_ok'])
        self.assertTrue(s['verdict_matches'])
        self.assertTrue(s['classification_matches'])
        self.assertTrue(s['ok'])
        self.assertGreaterEqual(s['worst_margins']['margin'], 0.049)
        self.assertEqual(s['nijenhuis_norm_max'], 0.0)
        self.assertGreater(s['worst_residuals']['corrupted_lagrangian_residual'], c.CORRUPTION_FLOOR)
        levi_records = [r for r in report.records if r['lambda_index'] == 0]
        self.assertTrue(levi_records)
        self.assertTrue(all(r['contact_certifies'] for r in levi_records))

    def test_plane(self):
        report = run_scenario(small('plane-flat'), c.MODE_TOTAL_REALITY)
        self.assertTrue(all(r['dim_intersection'] == 2 for r in report.records))
        self.assertTrue(all(r['margin'] == 0.0 for r in report.records))
        self.assertEqual(report.summary['total_reality_verdict'], c.NOT_TOTALLY_REAL)
        self.assertTrue(report.summary['ok'])

    def test_plane_levi(self):
        report = run_scenario(small('plane-flat'), c.MODE_LEVI)
        self.assertEqual(len(report.records), 2)
        self.assertEqual(report.summary['levi_classification_histogram'][c.DEGENERATE], 2)
        self.assertIsNone(report.summary['total_reality_verdict'])
        self.assertTrue(report.summary['classification_matches'])
        self.assertFalse(any(r['contact_certifies'] for r in report.records))

    def test_perturbed_sphere(self):
        report = run_scenario(small('sphere-perturbed-0.05', n_points=4), c.MODE_NIJENHUIS)
        self.assertGreater(report.summary['nijenhuis_norm_max'], 1e-3)
        self.assertEqual(report.summary['breaches'], [])
        self.assertNotIn('levi_classification', report.records[0])

    def test_reversed_orientation(self):
        s = small('sphere-std', scale=-1.0)
        report = run_scenario(s, c.MODE_LEVI)
        self.assertEqual(report.summary['levi_classification_histogram'][c.NEGATIVE], 2)
        self.assertFalse(report.summary['classification_matches'])
        self.assertFalse(report.summary['ok'])

    def test_determinism(self):
        s = small('heisenberg')
        first = emit_report(run_scenario(s), 'records')
        second = emit_report(run_scenario(s), 'records')
        self.assertEqual(first, second)

    def test_thread_count_does_not_change_output(self):
        s = small('sphere-sheared', n_points=3)
        with mock.patch.dict(os.environ, {c.THREADS_ENV: '1'}):
            serial = emit_report(run_scenario(s, c.MODE_TOTAL_REALITY), 'records')
        with mock.patch.dict(os.environ, {c.THREADS_ENV: '3'}):
            parallel = emit_report(run_scenario(s, c.MODE_TOTAL_REALITY), 'records')
        self.assertEqual(serial, parallel)

    def test_stage_errors_name_the_sample(self):
        run = ScenarioRun(small('sphere-std'))

        def fail():
            raise DegenerateGradient('flat')

        with self.assertRaises(StageError) as ctx:
            run._stage('levi', 3, fail)
        self.assertEqual((ctx.exception.stage, ctx.exception.sample), ('levi', 3))
        self.assertIsInstance(ctx.exception.cause, DegenerateGradient)

    def test_unknown_mode(self):
        with self.assertRaises(ValueError):
            ScenarioRun(small('sphere-std'), 'plot')

    def test_worker_count(self):
        with mock.patch.dict(os.environ, {c.THREADS_ENV: '2'}):
            self.assertEqual(utils.worker_count(), 2)
        for bad in ('zero', '0'):
            with mock.patch.dict(os.environ, {c.THREADS_ENV: bad}):
                self.assertEqual(utils.worker_count(), os.cpu_count() or 1)


class TestReport(unittest.TestCase):

    def test_records_round_trip(self):
        s = small('sphere-perturbed-0.05')
        report = run_scenario(s)
        header, records, summary = parse_records(emit_report(report, 'records'))
        self.assertEqual(header['mode'], c.MODE_CHECK)
        self.assertEqual(header['scenario']['scenario']['name'], 'sphere-perturbed-0.05')
        self.assertEqual(len(records), len(report.records))
        self.assertEqual(summarize(records, s.tolerances.model_dump(), s.expect.model_dump()), summary)
        self.assertEqual(summary, report.summary)

    def test_empty_report(self):
        report = RunReport({'scenario': {'name': 'empty'}}, c.MODE_CHECK, [], summarize([]))
        header, records, summary = parse_records(emit_report(report, 'records'))
        self.assertEqual(records, [])
        self.assertEqual(summary['n_records'], 0)
        self.assertIsNone(summary['total_reality_verdict'])
        self.assertTrue(summary['ok'])
        self.assertIn(b'empty', emit_report(report, 'human'))

    def test_number_format(self):
        report = RunReport({}, c.MODE_CHECK, [{'sample': 0, 'value': 0.1, 'whole': 2.0}], summarize([]))
        line = emit_report(report, 'records').decode().splitlines()[1]
        self.assertIn('"value": 0.10000000000000001', line)
        self.assertIn('"whole": 2.0', line)
        self.assertIn('"sample": 0', line)

    def test_non_finite_numbers(self):
        report = RunReport({}, c.MODE_CHECK, [{'sample': 0, 'margin': float('nan')}], summarize([]))
        with self.assertRaises(ReportIoError):
            emit_report(report, 'records')

    def test_unknown_format(self):
        with self.assertRaises(ValueError):
            emit_report(RunReport({}, c.MODE_CHECK, [], summarize([])), 'xml')

    def test_human_format(self):
        text = emit_report(run_scenario(small('plane-flat'), c.MODE_LEVI), 'human').decode()
        self.assertIn('plane-flat', text)
        self.assertIn('result', text)
        self.assertTrue(text.rstrip().endswith('OK'))

    def test_summary_flags_breaches(self):
        records = [{'sample': 0, 'lambda_index': 0, 'lambda': 1.0, 'acs_residual': 1e-3,
                    'dim_intersection': 1, 'margin': 0.0, 'lemma31_passed': True,
                    'corrupted_lagrangian_residual': 0.01}]
        summary = summarize(records, expect={'verdict': c.TOTALLY_REAL})
        self.assertFalse(summary['acs_ok'])
        self.assertEqual(summary['breaches'], ['acs_residual', 'corrupted_lagrangian_residual',
                                               'dim_intersection_parity'])
        self.assertFalse(summary['verdict_matches'])
        self.assertFalse(summary['ok'])

    def test_write_report(self):
        with tempfile.TemporaryDirectory() as tmp:
            out = Path(tmp) / 'report.jsonl'
            write_report(b'data\n', out)
            self.assertEqual(out.read_bytes(), b'data\n')
            with self.assertRaises(ReportIoError):
                write_report(b'data\n', Path(tmp) / 'missing' / 'report.jsonl')


if __name__ == '__main__':
    unittest.main()
