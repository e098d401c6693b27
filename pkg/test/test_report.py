import csv
from unittest import TestCase

from test import testing_common

from orliczlab.lib.exponents import ProblemSpec
from orliczlab.lib.experiments import probe_optimality, verify_inequality
from orliczlab.lib.report import (
    JsonRecord,
    format_number,
    log_table,
    report_records,
    write_csv,
    write_json,
)
from orliczlab.lib.witness import WitnessFamily, diagonal_witness, hadamard_witness

ORLICZ = ProblemSpec(m=2, p=('inf', 'inf'))


class TestFormatNumber(TestCase):
    def test_values(self):
        self.assertEqual('', format_number(None))
        self.assertEqual('pass', format_number('pass'))
        self.assertEqual('exp-1', format_number('exp-1'))
        self.assertEqual('true', format_number(True))
        self.assertEqual('7', format_number(7))
        self.assertEqual('1.41421356237', format_number(testing_common.SQRT2))


class TestWriters(TestCase):
    def test_verification_csv(self):
        report = verify_inequality(
            ORLICZ, ['2'], [hadamard_witness(1), diagonal_witness(2, 4)])
        path = testing_common.data_path('verification.csv')
        write_csv(report, path, experiment_id='orlicz-check')
        with open(path) as f:
            records = list(csv.DictReader(f))
        self.assertEqual(['pass', 'pass'], [r['verdict'] for r in records])
        self.assertEqual('orlicz-check', records[0]['experiment_id'])
        self.assertEqual('true', records[0]['opnorm_exact'])

    def test_growth_csv_and_table(self):
        report = probe_optimality(
            ORLICZ, ['2'], WitnessFamily(kind='hadamard'), [1, 2, 4, 8])
        path = testing_common.data_path('growth.csv')
        write_csv(report, path, experiment_id='hadamard-growth')
        with open(path) as f:
            records = list(csv.DictReader(f))
        self.assertEqual(4, len(records))
        self.assertEqual(report.verdict.value, records[-1]['verdict'])
        self.assertEqual('', records[0]['verdict'])
        with self.assertLogs('orliczlab.lib.report', level='INFO') as logs:
            log_table(report, 'hadamard-growth')
        self.assertEqual(5, len(logs.output))
        self.assertIn(report.verdict.value, logs.output[-1])

    def test_records_without_bound(self):
        report = verify_inequality(ORLICZ, ['3/2'], [hadamard_witness(1)])
        self.assertIsNone(report_records(report)[0]['verdict'])

    def test_json_record(self):
        path = testing_common.data_path('record.json')
        write_json(JsonRecord({'mixed_norm': 2.5}), path)
        with open(path) as f:
            self.assertIn('"mixed_norm": 2.5', f.read())
