"""Integration tests of the command line interface."""
import csv
import json
import os
from unittest import TestCase, mock

import numpy as np

from test import testing_common

from orliczlab import settings
from orliczlab.orliczlab import run
from orliczlab.lib.opnorm import operator_norm
from orliczlab.lib.tensor import CoefficientTensor

HADAMARD = CoefficientTensor([[1, 1], [1, -1]])


class TestCommands(TestCase):
    def setUp(self):
        self.hadamard_path = testing_common.write_tensor(HADAMARD, 'hadamard.json')

    def run_logged(self, argv):
        with self.assertLogs(level='INFO') as logs:
            code = run(argv)
        return code, '\n'.join(logs.output)

    def test_exponents(self):
        code, output = self.run_logged(['exponents', '--p', 'inf,inf'])
        self.assertEqual(0, code)
        self.assertIn('inner=1 q=(2) mu=2 dual_cotype=2', output)

        code, output = self.run_logged(
            ['exponents', '--p', 'inf,inf,4', '--sigma', '3,1,2'])
        self.assertEqual(0, code)
        self.assertIn('inner=1 q=(4, 2) mu=2', output)

    def test_cotcrit(self):
        code, output = self.run_logged(
            ['cotcrit', '--p', 'inf,inf', '--r', '2', '--q', '2,2'])
        self.assertEqual(0, code)
        self.assertIn('lambda thresholds: (2, 2)', output)
        self.assertIn('admissible=True', output)

    def test_mixed_norm(self):
        code, output = self.run_logged(
            ['mixed-norm', '--tensor', self.hadamard_path, '--q', '2,1'])
        self.assertEqual(0, code)
        self.assertIn('2.82842712475', output)

    def test_mixed_norm_output(self):
        path = testing_common.data_path('mixed.json')
        code, _ = self.run_logged(
            ['--output', path, 'mixed-norm', '--tensor', self.hadamard_path,
             '--q', '2,1', '--order', '2,1'])
        self.assertEqual(0, code)
        with open(path) as f:
            document = json.load(f)
        self.assertIsNone(document['config'])
        self.assertEqual([2, 1], document['report']['order'])
        self.assertEqual(['2', '1'], document['report']['q'])
        self.assertAlmostEqual(2 * testing_common.SQRT2, document['report']['mixed_norm'])

    def test_cotcrit_output(self):
        path = testing_common.data_path('cotcrit.json')
        code, _ = self.run_logged(
            ['--output', path, 'cotcrit', '--p', 'inf,inf', '--r', '2', '--q', '2,2'])
        self.assertEqual(0, code)
        with open(path) as f:
            document = json.load(f)
        self.assertEqual(['2', '2'], document['report']['thresholds'])
        self.assertTrue(document['report']['admissible'])

    def test_opnorm(self):
        code, output = self.run_logged(
            ['opnorm', '--tensor', self.hadamard_path, '--p', 'inf,inf'])
        self.assertEqual(0, code)
        self.assertIn('2 [exact-enumeration]', output)

        code, output = self.run_logged(
            ['opnorm', '--tensor', self.hadamard_path, '--p', '2,2',
             '--method', 'ascent', '--starts', '4'])
        self.assertEqual(0, code)
        self.assertIn('1.41421356237 [alternating-ascent] (lower bound)', output)

    def test_opnorm_ascent_settings(self):
        with mock.patch('orliczlab.orliczlab.operator_norm',
                        wraps=operator_norm) as wrapped:
            code, _ = self.run_logged(
                ['opnorm', '--tensor', self.hadamard_path, '--p', '2,2',
                 '--method', 'ascent', '--tol', '1e-8', '--max-sweeps', '50'])
        self.assertEqual(0, code)
        self.assertEqual(1e-8, wrapped.call_args.kwargs['tol'])
        self.assertEqual(50, wrapped.call_args.kwargs['max_sweeps'])
        self.assertEqual(0, wrapped.call_args.kwargs['seed'])

    def test_opnorm_of_diagonal_by_ascent(self):
        path = testing_common.write_tensor(CoefficientTensor(np.eye(4)), 'diag4.json')
        code, output = self.run_logged(
            ['opnorm', '--tensor', path, '--p', '4,4', '--method', 'ascent',
             '--starts', '32', '--seed', '7'])
        self.assertEqual(0, code)
        self.assertIn('2 [alternating-ascent] (lower bound)', output)

    def test_search_constant_csv(self):
        path = testing_common.data_path('search.csv')
        code, _ = self.run_logged(
            ['--output', path, 'search-constant', '--n', '2'])
        self.assertEqual(0, code)
        with open(path) as f:
            records = list(csv.DictReader(f))
        self.assertEqual(1, len(records))
        self.assertEqual('2', records[0]['n'])
        self.assertEqual('1.41421356237', records[0]['ratio'])

    def test_verify_json_and_rerun(self):
        path = testing_common.data_path('verify.json')
        code, output = self.run_logged(
            ['--output', path, 'verify', '--p', 'inf,inf', '--q', '2',
             '--family', 'hadamard', '--k', '1', '--classical'])
        self.assertEqual(0, code)
        self.assertIn('PASS', output)
        with open(path) as f:
            document = json.load(f)
        self.assertAlmostEqual(testing_common.SQRT2, document['report']['max_ratio'])
        self.assertEqual('hadamard', document['config']['family']['kind'])
        self.assertEqual([2], document['config']['n_range'])

        code, output = self.run_logged(['--config', path, 'verify'])
        self.assertEqual(0, code)
        self.assertIn('max_ratio=1.41421356237', output)

    def test_verify_tensor_rerun(self):
        tensor_path = testing_common.write_tensor(
            CoefficientTensor([[1, 2], [3, -1]]), 'uneven.json')
        path = testing_common.data_path('verify_tensor.json')
        code, _ = self.run_logged(
            ['--output', path, 'verify', '--p', 'inf,inf', '--q', '3/2',
             '--tensor', tensor_path, '--seed', '7', '--check-embedding',
             '--classical', '--max-sweeps', '40'])
        self.assertEqual(0, code)
        with open(path) as f:
            first = json.load(f)
        config = first['config']
        self.assertEqual([os.path.abspath(tensor_path)], config['tensors'])
        self.assertEqual(7, config['seed'])
        self.assertEqual(40, config['max_sweeps'])
        self.assertTrue(config['check_embedding'])
        self.assertTrue(config['classical'])
        self.assertEqual(['3/2', '1'], first['report']['q'])

        rerun_path = testing_common.data_path('verify_tensor_rerun.json')
        code, output = self.run_logged(
            ['--config', path, '--output', rerun_path, 'verify'])
        self.assertEqual(0, code)
        self.assertIn('orlicz=', output)
        with open(rerun_path) as f:
            second = json.load(f)
        self.assertEqual(config, second['config'])
        self.assertEqual(first['report'], second['report'])

    def test_verify_tensor_files(self):
        code, output = self.run_logged(
            ['verify', '--p', 'inf,inf', '--q', '2', '--tensor', self.hadamard_path,
             '--tensor', self.hadamard_path])
        self.assertEqual(0, code)
        self.assertIn('instances=2', output)

    def test_probe_csv(self):
        path = testing_common.data_path('probe.csv')
        code, _ = self.run_logged(
            ['--output', path, 'probe', '--p', 'inf,inf', '--q', '1.0',
             '--family', 'random-sign', '--n', '4,6,8,12', '--seeds', '0,1'])
        self.assertEqual(0, code)
        with open(path) as f:
            records = list(csv.DictReader(f))
        self.assertEqual(8, len(records))
        self.assertEqual('growing', records[-1]['verdict'])
        self.assertEqual('', records[0]['slope'])

    def test_save(self):
        code, _ = self.run_logged(['--save', 'exponents', '--p', '4,4'])
        self.assertEqual(0, code)
        path = os.path.join(settings.home_dir, 'reports', 'exponents.json')
        with open(path) as f:
            document = json.load(f)
        self.assertEqual('4/3', document['report']['inner'])
        self.assertEqual(['4'], document['report']['q'])


class TestExitCodes(TestCase):
    def run_quiet(self, argv):
        with self.assertLogs(level='ERROR'):
            return run(argv)

    def test_missing_file(self):
        path = testing_common.data_path('missing.json')
        self.assertEqual(3, self.run_quiet(['opnorm', '--tensor', path, '--p', 'inf,inf']))

    def test_budget(self):
        self.assertEqual(4, self.run_quiet(
            ['search-constant', '--n', '5', '--budget', '100']))

    def test_rank_mismatch(self):
        path = testing_common.write_tensor(CoefficientTensor([[1, 1], [1, -1]]), 'h2.json')
        self.assertEqual(5, self.run_quiet(
            ['verify', '--p', 'inf,inf,inf', '--q', '2,2', '--tensor', path]))

    def test_exponent_domain(self):
        self.assertEqual(6, self.run_quiet(['cotcrit', '--p', 'inf,inf', '--r', 'inf']))

    def test_missing_family(self):
        self.assertEqual(2, self.run_quiet(['probe', '--p', 'inf,inf', '--q', '2']))

    def test_too_few_sizes(self):
        self.assertEqual(9, self.run_quiet(
            ['probe', '--p', 'inf,inf', '--q', '2', '--family', 'random-sign',
             '--n', '2,3,4']))

    def test_malformed_exponent(self):
        with self.assertRaises(SystemExit) as context:
            run(['exponents', '--p', 'two,inf'])
        self.assertEqual(2, context.exception.code)
