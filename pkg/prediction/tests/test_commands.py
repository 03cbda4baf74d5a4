import tempfile
from io import StringIO
from pathlib import Path

import numpy as np
import pandas as pd
from django.core.management import call_command
from django.core.management.base import CommandError
from django.test import SimpleTestCase

from prediction.management.commands.predict import parse_profile, parse_times
from prediction.surfaces import joint_survival
from sieve.serializers import dump_fit

from .test_surfaces import _fit


class ArgumentTests(SimpleTestCase):
    def test_range_includes_stop(self):
        np.testing.assert_allclose(parse_times('0:1:0.25'), [0.0, 0.25, 0.5, 0.75, 1.0])
        np.testing.assert_array_equal(parse_times('2,0.5'), [2.0, 0.5])

    def test_bad_times(self):
        for text in ('a,b', '0:1', '0:1:0'):
            with self.subTest(text=text), self.assertRaises(CommandError) as ctx:
                parse_times(text)
            self.assertEqual(ctx.exception.returncode, 2)

    def test_profile(self):
        np.testing.assert_array_equal(parse_profile('x2=1', ('x1', 'x2')), [0.0, 1.0])
        with self.assertRaises(CommandError):
            parse_profile('age=3', ('x1', 'x2'))


class PredictCommandTests(SimpleTestCase):
    def setUp(self):
        self.dir = tempfile.TemporaryDirectory()
        self.root = Path(self.dir.name)
        self.fit = _fit()
        self.fit_path = self.root / 'fit.json'
        dump_fit(self.fit, self.fit_path)
        self.out = self.root / 'grid.csv'

    def tearDown(self):
        self.dir.cleanup()

    def predict(self, *args):
        call_command('predict', '--fit', str(self.fit_path), '--out', str(self.out), *args, stdout=StringIO())
        return pd.read_csv(self.out)

    def test_joint_grid(self):
        table = self.predict('--times1', '0:2:1', '--times2', '1,3', '--z1', 'x1=0.5,x2=1', '--z2', 'x2=1')
        self.assertEqual(len(table), 6)
        row = table[(table.t1 == 2.0) & (table.t2 == 3.0)].iloc[0]
        expected = joint_survival(self.fit, 2.0, 3.0, np.array([0.5, 1.0]), np.array([0.0, 1.0]))
        self.assertAlmostEqual(row.value, expected, places=14)

    def test_conditional_curve(self):
        table = self.predict('--given-progressed-at', '1.5', '--horizon', '0:2:0.5')
        self.assertEqual(list(table.columns), ['s', 'value'])
        self.assertAlmostEqual(table.value.iloc[0], 1.0, places=12)

    def test_times_outside_the_fitted_range(self):
        with self.assertRaises(CommandError) as ctx:
            self.predict('--times1', '0,10', '--times2', '1')
        self.assertEqual(ctx.exception.returncode, 2)

    def test_grid_needs_both_axes(self):
        with self.assertRaises(CommandError) as ctx:
            self.predict('--times1', '1')
        self.assertEqual(ctx.exception.returncode, 2)
