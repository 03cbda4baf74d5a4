import math
import tempfile
from pathlib import Path

import numpy as np
from django.test import SimpleTestCase
from rest_framework.exceptions import ValidationError

from core.serializers import parse_document
from sieve.estimator import build_layout
from sieve.margins import TransformKind, TransformSpec
from sieve.params import TieMode
from sieve.serializers import FitResultSerializer, ParamLayoutSerializer, dump_fit, load_fit

from .factories import fit_config, hand_fit, mixed_dataset, params_for


class ParamLayoutSerializerTests(SimpleTestCase):
    def document(self, **overrides):
        values = {
            'covariates1': ['x1'], 'covariates2': ['x1'], 'degree': 3, 't_lo': 0.0, 't_hi': 5.0,
            'transform1': 'PO', 'transform2': {'kind': 'boxcox', 'r': 0.5}, 'tie': 'none',
        }
        values.update(overrides)
        return values

    def test_accepts_string_and_object_transforms(self):
        serializer = ParamLayoutSerializer(data=self.document())
        self.assertTrue(serializer.is_valid(), serializer.errors)
        layout = serializer.save()
        self.assertEqual(layout.transforms[1], TransformSpec(TransformKind.BOXCOX, r=0.5))
        self.assertEqual(layout.n_g, 0)

    def test_rejects_bad_range(self):
        serializer = ParamLayoutSerializer(data=self.document(t_hi=0.0))
        self.assertFalse(serializer.is_valid())
        self.assertIn('t_hi', serializer.errors)

    def test_rejects_unknown_transform(self):
        serializer = ParamLayoutSerializer(data=self.document(transform1='weibull'))
        self.assertFalse(serializer.is_valid())
        self.assertIn('transform1', serializer.errors)

    def test_inconsistent_tie(self):
        serializer = ParamLayoutSerializer(data=self.document(tie='all'))
        self.assertTrue(serializer.is_valid(), serializer.errors)
        with self.assertRaises(ValidationError):
            serializer.save()


class FitDocumentTests(SimpleTestCase):
    def setUp(self):
        self.data = mixed_dataset()
        layout = build_layout(self.data, fit_config(tie=TieMode.BETA))
        params = params_for(layout, alpha=0.55, kappa=1.7, beta1=[0.25, -1.0 / 3.0], beta2=[0.25, -1.0 / 3.0])
        self.fit = hand_fit(self.data, params, loglik=-12.345678901234567, condition_number=math.nan,
                            message='optimizer stopped before meeting the convergence criteria', converged=False)
        self.dir = tempfile.TemporaryDirectory()
        self.path = Path(self.dir.name) / 'fit.json'

    def tearDown(self):
        self.dir.cleanup()

    def test_round_trip_is_exact(self):
        dump_fit(self.fit, self.path)
        loaded = load_fit(self.path)
        np.testing.assert_array_equal(loaded.params.values, self.fit.params.values)
        np.testing.assert_array_equal(loaded.observed_information, self.fit.observed_information)
        self.assertEqual(loaded.layout, self.fit.layout)
        self.assertEqual(loaded.loglik, self.fit.loglik)
        self.assertFalse(loaded.converged)
        self.assertTrue(math.isnan(loaded.condition_number))
        self.assertEqual(loaded.data_fingerprint, self.data.fingerprint())
        self.assertEqual(loaded.tau, self.fit.tau)

    def test_document_has_readable_summaries(self):
        dump_fit(self.fit, self.path)
        document = parse_document(self.path)
        self.assertEqual(document['layout']['tie'], 'beta')
        self.assertEqual(document['labels'][:2], ['beta[x1]', 'beta[x2]'])
        self.assertAlmostEqual(document['estimates']['alpha'], 0.55, places=12)
        self.assertEqual(document['vcov_finite']['rows'], 4)
        self.assertAlmostEqual(document['tau'], self.fit.tau)

    def test_matrix_shape_is_checked(self):
        document = FitResultSerializer(self.fit).data
        document['observed_information'] = {'rows': 2, 'cols': 2, 'data': [1.0, 0.0, 0.0]}
        serializer = FitResultSerializer(data=document)
        self.assertFalse(serializer.is_valid())
        self.assertIn('observed_information', serializer.errors)

    def test_params_must_fit_the_layout(self):
        document = FitResultSerializer(self.fit).data
        document['params'] = document['params'][:-1]
        serializer = FitResultSerializer(data=document)
        self.assertTrue(serializer.is_valid(), serializer.errors)
        with self.assertRaises(ValidationError):
            serializer.save()
