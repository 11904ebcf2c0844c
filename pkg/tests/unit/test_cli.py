# Copyright 2024 dwellir
# See LICENSE file for licensing details.

from pathlib import Path
import unittest

from click.testing import CliRunner

from acx import cli
import constants as c
from report import parse_records

PLANE_EXPECTING_TOTAL_REALITY = """
[scenario]
name = "plane-wrong-expectation"
dim = 4

[surface]
kind = "plane"

[sampling]
box = [-1.0, 1.0]
n_points = 2
n_lambdas = 0
seed = 1

[expect]
verdict = "TotallyReal"
"""


class TestCli(unittest.TestCase):

    def setUp(self):
        self.runner = CliRunner()

    def invoke(self, *args):
        return self.runner.invoke(cli, list(args))

    def test_list(self):
        result = self.invoke('list')
        self.assertEqual(result.exit_code, 0)
        for name in ('sphere-std', 'plane-flat', 'heisenberg', 'indefinite-quadric',
                     'sphere-perturbed-0.05', 'ellipsoid-std'):
            self.assertIn(name, result.output)

    def test_nijenhuis_stage(self):
        result = self.invoke('nijenhuis', 'sphere-perturbed-0.05', '--samples', '3')
        self.assertEqual(result.exit_code, 0, result.output)
        self.assertIn('OK', result.output)

    def test_check_records(self):
        result = self.invoke('check', 'plane-flat', '--samples', '2', '--format', 'records')
        self.assertEqual(result.exit_code, 0, result.output)
        header, records, summary = parse_records(result.output)
        self.assertEqual(header['mode'], c.MODE_CHECK)
        self.assertEqual(summary['total_reality_verdict'], c.NOT_TOTALLY_REAL)
        self.assertEqual(summary['levi_classification_histogram'][c.DEGENERATE], 2)
        self.assertTrue(all(r['dim_intersection'] == 2 for r in records))

    def test_levi_and_total_reality_stages(self):
        self.assertEqual(self.invoke('levi', 'heisenberg', '--samples', '2').exit_code, 0)
        self.assertEqual(self.invoke('total-reality', 'sphere-std', '--samples', '2').exit_code, 0)

    def test_same_seed_same_bytes(self):
        args = ('total-reality', 'ellipsoid-std', '--samples', '2', '--seed', '99', '--format', 'records')
        first, second = self.invoke(*args), self.invoke(*args)
        self.assertEqual(first.exit_code, 0)
        self.assertEqual(first.output, second.output)
        self.assertNotEqual(first.output, self.invoke(*args[:-4], '--seed', '100', '--format', 'records').output)

    def test_out_file(self):
        with self.runner.isolated_filesystem():
            result = self.invoke('levi', 'plane-flat', '--samples', '2', '--out', 'levi.txt')
            self.assertEqual(result.exit_code, 0)
            self.assertEqual(result.output, '')
            self.assertIn('Degenerate', Path('levi.txt').read_text())

    def test_expectation_mismatch_exits_one(self):
        with self.runner.isolated_filesystem():
            Path('plane.toml').write_text(PLANE_EXPECTING_TOTAL_REALITY)
            result = self.invoke('total-reality', 'plane.toml')
            self.assertEqual(result.exit_code, c.EXIT_CHECK_FAILED)
            self.assertIn('FAILED', result.output)

    def test_config_errors_exit_two(self):
        self.assertEqual(self.invoke('check', 'missing.toml').exit_code, c.EXIT_CONFIG_ERROR)
        self.assertEqual(self.invoke('check', 'sphere-std', '--samples', '0').exit_code, c.EXIT_CONFIG_ERROR)
        with self.runner.isolated_filesystem():
            Path('typo.toml').write_text('[surface]\nkind = "sphere"\nradus = 2.0\n[sampling]\nseed = 1\n')
            result = self.invoke('check', 'typo.toml')
            self.assertEqual(result.exit_code, c.EXIT_CONFIG_ERROR)
            self.assertIn('radus', result.output)

    def test_unknown_format_is_a_usage_error(self):
        self.assertEqual(self.invoke('check', 'sphere-std', '--format', 'xml').exit_code, 2)


if __name__ == '__main__':
    unittest.main()
