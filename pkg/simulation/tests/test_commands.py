import json
import math
import tempfile
from io import StringIO
from pathlib import Path

import numpy as np
from django.core.management import call_command
from django.core.management.base import CommandError
from django.test import SimpleTestCase, tag

from core.io import read_dataset
from core.serializers import parse_document
from simulation.experiments import type1_summary
from simulation.management.commands.experiment import simulation_config


class SimulateCommandTests(SimpleTestCase):
    def setUp(self):
        self.dir = tempfile.TemporaryDirectory()
        self.root = Path(self.dir.name)
        self.config = self.root / 'config.json'
        self.config.write_text(json.dumps({'family': 'clayton', 'tau': 0.5, 'n': 40, 'mean_gap': 0.3}))

    def tearDown(self):
        self.dir.cleanup()

    def simulate(self, out, *extra):
        call_command('simulate', '--config', str(self.config), '--out-dir', str(out), '--seed', '4',
                     '--replicates', '2', *extra, stdout=StringIO())

    def test_writes_replicates_and_truth(self):
        out = self.root / 'a'
        self.simulate(out)
        data = read_dataset(out / 'data_1.csv')
        self.assertEqual(len(data), 40)
        truth = parse_document(out / 'truth_1.json')
        self.assertEqual(truth['replicate'], 1)
        self.assertEqual(truth['seed'], 4)
        self.assertAlmostEqual(truth['tau'], 0.5)

    def test_output_is_deterministic(self):
        self.simulate(self.root / 'a')
        self.simulate(self.root / 'b', '--workers', '2')
        for name in ('data_0.csv', 'data_1.csv', 'truth_0.json'):
            self.assertEqual((self.root / 'a' / name).read_bytes(), (self.root / 'b' / name).read_bytes())

    def test_invalid_config(self):
        self.config.write_text(json.dumps({'family': 'amh', 'tau': 0.5}))
        with self.assertRaises(CommandError) as ctx:
            self.simulate(self.root / 'a')
        self.assertEqual(ctx.exception.returncode, 2)

    def test_unreadable_config(self):
        self.config.write_text('{not json')
        with self.assertRaises(CommandError) as ctx:
            self.simulate(self.root / 'a')
        self.assertEqual(ctx.exception.returncode, 2)


@tag('slow')
class ExperimentCommandTests(SimpleTestCase):
    def test_small_estimation_suite(self):
        with tempfile.TemporaryDirectory() as root:
            out = Path(root) / 'report.json'
            stdout = StringIO()
            call_command('experiment', '--suite', 'estimation', '--replicates', '2', '--n', '150', '--seed', '2',
                         '--out', str(out), stdout=stdout)
            report = parse_document(out)
        self.assertEqual(report['suite'], 'estimation')
        self.assertAlmostEqual(report['settings']['tau'], 0.6)
        self.assertEqual(len(report['replicates']), 2)


class ExperimentConfigTests(SimpleTestCase):
    def setUp(self):
        self.dir = tempfile.TemporaryDirectory()
        self.config = Path(self.dir.name) / 'config.json'
        self.config.write_text(json.dumps({'family': 'clayton', 'tau': 0.5, 'n': 40, 'seed': 9}))
        self.options = {'config': str(self.config), 'seed': None, 'n': 500, 'tau': 0.6, 'family': 'clayton',
                        'maf': 0.4}

    def tearDown(self):
        self.dir.cleanup()

    def test_config_seed_kept_without_flag(self):
        self.assertEqual(simulation_config('estimation', self.options).seed, 9)

    def test_seed_flag_overrides_config(self):
        self.options['seed'] = 3
        self.assertEqual(simulation_config('estimation', self.options).seed, 3)

    def test_suite_defaults(self):
        self.options['config'] = None
        sim = simulation_config('estimation', self.options)
        self.assertEqual(sim.seed, 0)
        self.assertEqual(sim.n, 500)
        self.assertAlmostEqual(sim.tau, 0.6)


class Type1SummaryTests(SimpleTestCase):
    def test_levels_and_uniformity(self):
        p_values = (np.arange(200) + 0.5) / 200
        summary = type1_summary(p_values)
        self.assertEqual([row['level'] for row in summary], [0.05, 0.01, 'ks-uniform'])
        self.assertAlmostEqual(summary[0]['rejection_rate'], 0.05)
        self.assertNotIn('rejection_rate', summary[-1])
        self.assertGreater(summary[-1]['ks_p_value'], 0.99)

    def test_no_p_values(self):
        summary = type1_summary([])
        self.assertEqual(len(summary), 2)
        self.assertTrue(math.isnan(summary[0]['rejection_rate']))
