import math
from dataclasses import replace
import tempfile
from pathlib import Path

import numpy as np
import pandas as pd
from django.test import SimpleTestCase
from rest_framework.exceptions import ValidationError

from core.exceptions import DataFormatError
from core.io import dataset_frame, read_dataset, read_genotypes, write_dataset, write_table
from core.parallel import map_ordered, resolve_workers
from core.serializers import MatrixField, NumberField, parse_document, render_document
from sieve.records import Group
from sieve.tests.factories import mixed_dataset

HEADER = 'id,L1,R1,L2,R2,z1_age,zs_sex\n'


def _square(x):
    return x * x


class CsvTestCase(SimpleTestCase):
    def setUp(self):
        self.dir = tempfile.TemporaryDirectory()
        self.root = Path(self.dir.name)

    def tearDown(self):
        self.dir.cleanup()

    def write(self, name, text):
        path = self.root / name
        path.write_text(text)
        return path


class ReadDatasetTests(CsvTestCase):
    def test_reads_intervals_and_covariates(self):
        path = self.write('d.csv', HEADER + '1,0,2.5,1,inf,61,1\n2,0.5,1,0,3,70,0\n')
        data = read_dataset(path)
        self.assertEqual(data.ids, ('1', '2'))
        self.assertEqual(data.covariate_names, (('age', 'sex'), ('sex',)))
        self.assertEqual(data.shared, frozenset({'sex'}))
        self.assertTrue(math.isinf(data.right[0, 1]))
        np.testing.assert_array_equal(data.covariates[0][:, 0], [61.0, 70.0])

    def test_single_margin_rows(self):
        path = self.write('d.csv', 'id,L1,R1,L2,R2,group,zs_x\n1,0,1,,,m1,0.5\n2,,,1,2,m2,1\n3,0,1,1,2,,2\n')
        data = read_dataset(path)
        np.testing.assert_array_equal(data.groups, [1, 2, 0])
        self.assertTrue(np.isnan(data.left[0, 1]))

    def test_bad_number_reports_line(self):
        path = self.write('d.csv', HEADER + '1,0,2.5,1,inf,61,1\n2,0.5,abc,0,3,70,0\n')
        with self.assertRaises(DataFormatError) as ctx:
            read_dataset(path)
        self.assertEqual(ctx.exception.line, 3)
        self.assertIn('line 3', str(ctx.exception))

    def test_reversed_interval_reports_line(self):
        path = self.write('d.csv', HEADER + '1,0,2.5,1,inf,61,1\n2,0.5,1,0,3,70,0\n3,2,2,0,3,70,0\n')
        with self.assertRaises(DataFormatError) as ctx:
            read_dataset(path)
        self.assertEqual(ctx.exception.line, 4)

    def test_missing_covariate_reports_line(self):
        path = self.write('d.csv', HEADER + '1,0,2.5,1,inf,,1\n')
        with self.assertRaises(DataFormatError) as ctx:
            read_dataset(path)
        self.assertEqual(ctx.exception.line, 2)

    def test_header_problems(self):
        cases = {
            'missing column': 'id,L1,R1,L2\n1,0,1,0\n',
            'unknown column': 'id,L1,R1,L2,R2,age\n1,0,1,0,1,3\n',
            'duplicate covariate': 'id,L1,R1,L2,R2,z1_a,zs_a\n1,0,1,0,1,3,4\n',
        }
        for case, text in cases.items():
            with self.subTest(case=case), self.assertRaises(DataFormatError) as ctx:
                read_dataset(self.write('d.csv', text))
            self.assertEqual(ctx.exception.line, 1)

    def test_duplicate_id(self):
        path = self.write('d.csv', HEADER + '1,0,2.5,1,inf,61,1\n1,0.5,1,0,3,70,0\n')
        with self.assertRaises(DataFormatError) as ctx:
            read_dataset(path)
        self.assertEqual(ctx.exception.line, 3)

    def test_unknown_group(self):
        path = self.write('d.csv', 'id,L1,R1,L2,R2,group\n1,0,1,0,1,both\n')
        with self.assertRaises(DataFormatError):
            read_dataset(path)


class WriteDatasetTests(CsvTestCase):
    def test_round_trip(self):
        data = mixed_dataset()
        path = self.root / 'out.csv'
        write_dataset(data, path)
        again = read_dataset(path)
        self.assertEqual(again.fingerprint(), data.fingerprint())
        self.assertEqual(again.groups[-1], 2)

    def test_seventeen_digit_values_read_back_exactly(self):
        path = self.write('d.csv', HEADER + '1,0,0.30000000000000004,0.1,inf,-0.29999999999999999,0.33333333333333331\n')
        data = read_dataset(path)
        self.assertEqual(data.right[0, 0], 0.1 + 0.2)
        self.assertEqual(data.covariates[0][0, 0], -0.3)
        self.assertEqual(data.covariates[0][0, 1], 1.0 / 3.0)

    def test_random_values_round_trip_bit_for_bit(self):
        rng = np.random.default_rng(7)
        data = mixed_dataset()
        z = rng.normal(size=data.covariates[0].shape)
        noisy = replace(data, covariates=(z, z.copy()))
        path = self.root / 'noisy.csv'
        write_dataset(noisy, path)
        again = read_dataset(path)
        np.testing.assert_array_equal(again.covariates[0][:5], z[:5])
        self.assertEqual(again.fingerprint(), noisy.fingerprint())

    def test_frame_columns(self):
        frame = dataset_frame(mixed_dataset())
        self.assertEqual(list(frame.columns), ['id', 'L1', 'R1', 'L2', 'R2', 'group', 'z1_x1', 'z2_x1', 'zs_x2'])
        self.assertEqual(frame['group'].tolist()[-2:], [Group.MARGIN1.value, Group.MARGIN2.value])
        self.assertTrue(np.isnan(frame['z2_x1'].iloc[4]))

    def test_write_table_keeps_full_precision(self):
        path = self.root / 't.csv'
        write_table(pd.DataFrame({'value': [1.0 / 3.0]}), path)
        self.assertEqual(float(path.read_text().splitlines()[1]), 1.0 / 3.0)


class ReadGenotypesTests(CsvTestCase):
    def test_aligned_to_ids(self):
        path = self.write('g.csv', 'id,rs1,rs2\nb,0,1\na,2,0\nz,1,1\n')
        frame = read_genotypes(path, ('a', 'b'))
        self.assertEqual(list(frame.index), ['a', 'b'])
        self.assertEqual(frame['rs1'].tolist(), [2.0, 0.0])

    def test_missing_id(self):
        path = self.write('g.csv', 'id,rs1\na,0\n')
        with self.assertRaises(DataFormatError):
            read_genotypes(path, ('a', 'b'))

    def test_needs_snp_columns(self):
        path = self.write('g.csv', 'id\na\n')
        with self.assertRaises(DataFormatError):
            read_genotypes(path, ('a',))

    def test_allele_count_outside_range(self):
        path = self.write('g.csv', 'id,rs1,rs2\na,0,1\nb,2,3\n')
        with self.assertRaises(DataFormatError) as ctx:
            read_genotypes(path, ('a', 'b'))
        self.assertEqual(ctx.exception.line, 3)
        self.assertIn('rs2', str(ctx.exception))

    def test_blank_allele_count(self):
        path = self.write('g.csv', 'id,rs1\na,\nb,1\n')
        with self.assertRaises(DataFormatError) as ctx:
            read_genotypes(path, ('a', 'b'))
        self.assertEqual(ctx.exception.line, 2)
        self.assertIn('missing', str(ctx.exception))


class DocumentTests(SimpleTestCase):
    def test_non_finite_numbers_survive(self):
        with tempfile.TemporaryDirectory() as root:
            path = Path(root) / 'doc.json'
            render_document({'a': math.nan, 'b': math.inf, 'c': [1.5]}, path)
            document = parse_document(path)
        self.assertTrue(math.isnan(document['a']))
        self.assertEqual(document['b'], math.inf)
        self.assertEqual(document['c'], [1.5])

    def test_number_field(self):
        self.assertEqual(NumberField().to_internal_value('2.5'), 2.5)
        with self.assertRaises(ValidationError):
            NumberField().to_internal_value(True)

    def test_matrix_field(self):
        field = MatrixField()
        matrix = np.arange(6.0).reshape(2, 3)
        np.testing.assert_array_equal(field.to_internal_value(field.to_representation(matrix)), matrix)
        with self.assertRaises(ValidationError):
            field.to_internal_value({'rows': 2, 'cols': 2, 'data': [1.0]})


class ParallelTests(SimpleTestCase):
    def test_resolve_workers(self):
        self.assertEqual(resolve_workers(0), 1)
        self.assertEqual(resolve_workers(3), 3)

    def test_results_keep_input_order(self):
        self.assertEqual(map_ordered(_square, [3, 1, 2], workers=1), [9, 1, 4])
        self.assertEqual(map_ordered(_square, range(6), workers=2), [0, 1, 4, 9, 16, 25])
