import tempfile
from io import StringIO
from pathlib import Path

from django.core.management import call_command
from django.core.management.base import CommandError
from django.test import SimpleTestCase, tag

from core.io import write_dataset
from sieve.serializers import load_fit

from .factories import mixed_dataset, simulated_dataset


class FitCommandTests(SimpleTestCase):
    def setUp(self):
        self.dir = tempfile.TemporaryDirectory()
        self.root = Path(self.dir.name)
        self.data_path = self.root / 'data.csv'
        self.out = self.root / 'fit.json'

    def tearDown(self):
        self.dir.cleanup()

    def fit(self, *args):
        stdout = StringIO()
        call_command('fit', '--data', str(self.data_path), '--out', str(self.out), *args, stdout=stdout)
        return stdout.getvalue()

    def assertBadInput(self, *args):
        with self.assertRaises(CommandError) as ctx:
            self.fit(*args)
        self.assertEqual(ctx.exception.returncode, 2)

    def test_missing_data_file(self):
        self.assertBadInput()

    def test_bad_degree(self):
        write_dataset(mixed_dataset(), self.data_path)
        self.assertBadInput('--degree', '0')

    def test_bad_transform(self):
        write_dataset(mixed_dataset(), self.data_path)
        self.assertBadInput('--margin1', 'weibull')

    @tag('slow')
    def test_fit_writes_a_loadable_document(self):
        data = simulated_dataset(n=200, seed=8)
        write_dataset(data, self.data_path)
        output = self.fit('--degree', '3', '--tie-margins', 'all')
        fit = load_fit(self.out)
        self.assertEqual(fit.data_fingerprint, data.fingerprint())
        self.assertEqual(fit.layout.degree, 3)
        self.assertIn('tau', output)
